"""Function oracles and a concrete, grid-computable subdifferential.

The subdifferential used throughout is the proximal one: for a base point
``x``, a tilt ``t`` and a step ``lam > 0`` we minimise

    y -> f(y) - <t, y> + ||y - x||^2 / (2 lam)

by exhaustive search on a grid followed by local zoom passes, and read off
the pair ``(p, t + (x - p) / lam)`` at the minimiser ``p``.  Sweeping base
points, steps and tilts yields a finite sample of the graph of ``df``.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .bodies import as_points
from .errors import EmptyGraphError, InvalidInputError

__all__ = ["FunctionOracle", "Grid", "box_grid", "SubgradientGraph",
           "MembershipCertificate", "fenchel_membership",
           "proximal_subgradient", "sample_graph", "lipschitz_estimate",
           "default_tilts", "StabilityReport", "check_stability"]

DEFAULT_LAMBDAS = (0.1, 0.01)
# zoom depth in decades: the final search cell is 10**-DEFAULT_REFINE spacings
DEFAULT_REFINE = 8
# stencil points per axis; a 21-point stencil shrinks the cell ten-fold per
# pass, the 5-point one used in higher dimension only halves it
ZOOM_POINTS = {1: 21}
ZOOM_POINTS_ND = 5
FACE_MARGIN = 1e-3
# keep the (batch x grid) work arrays below this many entries
CHUNK_ENTRIES = 4_000_000


@dataclass(frozen=True, eq=False)
class FunctionOracle:
    """A proper lsc function ``R^n -> R u {+inf}``.

    Parameters
    ----------
    func : callable
        Vectorised: maps an array of shape ``(..., n)`` to shape ``(...)``.
    domain : pair of array_like
        Box ``(lo, hi)`` used for grid sampling.
    name : str
    subgradient : callable, optional
        Maps a single point to an ``(k, n)`` array of known subgradients
        (``k = 0`` when the subdifferential is empty).
    """

    func: object
    domain: tuple
    name: str = "f"
    subgradient: object = None

    def __post_init__(self):
        lo, hi = (np.atleast_1d(np.asarray(v, dtype=float)) for v in self.domain)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise InvalidInputError("domain box must satisfy lo < hi")
        object.__setattr__(self, "domain", (lo, hi))

    @property
    def dim(self):
        return self.domain[0].size

    def __call__(self, x):
        x = as_points(x, self.dim)
        val = np.asarray(self.func(x), dtype=float)
        if np.any(np.isnan(val)) or np.any(val == -np.inf):
            raise InvalidInputError(f"{self.name} returned NaN or -inf")
        return float(val) if val.ndim == 0 else val

    def shifted(self, v, name=None):
        """``f + <v, .>`` as a new oracle."""
        v = np.asarray(v, dtype=float).reshape(self.dim)
        base = self.func
        return FunctionOracle(lambda x: base(x) + x @ v, self.domain,
                              name or f"{self.name}+<v,.>")


@dataclass(frozen=True, eq=False)
class Grid:
    """Tensor grid over a box; ``points`` is ``(N, n)`` in C order."""

    lo: np.ndarray
    hi: np.ndarray
    shape: tuple
    points: np.ndarray = field(repr=False)

    @property
    def spacing(self):
        return (self.hi - self.lo) / (np.asarray(self.shape) - 1)


def box_grid(lo, hi, resolution):
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    res = np.broadcast_to(np.asarray(resolution, dtype=int), lo.shape)
    if np.any(res < 2):
        raise InvalidInputError("resolution must be at least 2 per axis")
    axes = [np.linspace(a, b, r) for a, b, r in zip(lo, hi, res)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    return Grid(lo, hi, tuple(int(r) for r in res), pts)


def _grid_for(f, grid, resolution):
    if grid is None:
        return box_grid(*f.domain, resolution)
    if isinstance(grid, Grid):
        return grid
    return as_points(grid, f.dim).reshape(-1, f.dim)


@dataclass(frozen=True)
class SubgradientGraph:
    """Finite sample ``{(x_i, x_i*, f(x_i))}`` of a subdifferential graph."""

    x: np.ndarray
    xstar: np.ndarray
    fx: np.ndarray

    def __len__(self):
        return len(self.fx)

    @property
    def dim(self):
        return self.x.shape[1]

    @property
    def samples(self):
        return list(zip(self.x, self.xstar, self.fx))

    def __iter__(self):
        return iter(self.samples)

    @classmethod
    def from_pairs(cls, x, xstar, fx):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        xstar = np.asarray(xstar, dtype=float).reshape(x.shape)
        return cls(x, xstar, np.asarray(fx, dtype=float).reshape(len(x)))


@dataclass(frozen=True)
class MembershipCertificate:
    """Outcome of a grid Fenchel test; truthy iff ``member``."""

    member: bool
    worst_violation: float
    witness: np.ndarray

    def __bool__(self):
        return bool(self.member)


def fenchel_membership(f, x, xstar, grid=None, tol=1e-9, resolution=201):
    """Check ``<x*, y - x> <= f(y) - f(x) + tol`` on every finite grid point.

    Raises
    ------
    InvalidInputError
        If ``f(x)`` is infinite.
    """
    x = as_points(x, f.dim).reshape(f.dim)
    xstar = np.asarray(xstar, dtype=float).reshape(f.dim)
    fx = f(x)
    if not np.isfinite(fx):
        raise InvalidInputError("f(x) = +inf: x is outside dom f")
    pts = _grid_for(f, grid, resolution)
    pts = pts.points if isinstance(pts, Grid) else pts
    fy = f(pts)
    ok = np.isfinite(fy)
    pts, fy = pts[ok], fy[ok]
    excess = (pts - x) @ xstar - (fy - fx)
    i = int(np.argmax(excess))
    return MembershipCertificate(bool(excess[i] <= tol), float(excess[i]), pts[i])


def _sqdist(a, b):
    return np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)


def _prox_batch(f, base, lam, tilt, pts, fvals, box=None, spacing=None,
                refine=DEFAULT_REFINE):
    """Tilted proximal minimisers for a batch of base points.

    Returns ``(p, xstar, ok)``; ``ok`` is False where no finite value exists
    or the minimiser sits on the face of ``box``.
    """
    B, n = base.shape
    p = np.empty_like(base)
    best = np.empty(B)
    step = max(1, CHUNK_ENTRIES // max(len(pts) * n, 1))
    for s in range(0, B, step):
        sl = slice(s, s + step)
        h = (fvals[None, :] - tilt[sl] @ pts.T
             + _sqdist(base[sl], pts) / (2.0 * lam))
        idx = np.argmin(h, axis=1)
        p[sl] = pts[idx]
        best[sl] = h[np.arange(len(idx)), idx]
    ok = np.isfinite(best)

    if box is not None and refine > 0:
        lo, hi = box
        halfwidth = np.asarray(spacing, dtype=float)
        k = ZOOM_POINTS.get(n, ZOOM_POINTS_ND)
        shrink = k // 2
        passes = int(np.ceil(refine * np.log(10) / np.log(shrink) - 1e-9))
        unit = np.array(list(itertools.product(np.linspace(-1.0, 1.0, k), repeat=n)))
        mid = (len(unit) - 1) // 2
        for _ in range(passes):
            cand = np.clip(p[:, None, :] + unit[None] * halfwidth, lo, hi)
            # keep the incumbent so the objective never increases
            cand[:, mid] = p
            halfwidth = halfwidth / shrink
            fc = np.asarray(f.func(cand), dtype=float)
            h = (fc - np.einsum("bkn,bn->bk", cand, tilt)
                 + np.sum((cand - base[:, None, :]) ** 2, axis=-1) / (2.0 * lam))
            idx = np.argmin(h, axis=1)
            p = cand[np.arange(B), idx]
        # a minimiser this close to a face cannot be told apart from one
        # pushed against it, so both count as unlocalised
        margin = FACE_MARGIN * np.asarray(spacing, dtype=float)
        on_face = np.any((p <= lo + margin) | (p >= hi - margin), axis=1)
        ok &= ~on_face
    elif box is not None:
        lo, hi = box
        ok &= ~np.any((p <= lo) | (p >= hi), axis=1)

    xstar = tilt + (base - p) / lam
    return p, xstar, ok


def proximal_subgradient(f, x, lam, tilt=None, grid=None, resolution=201,
                         refine=DEFAULT_REFINE):
    """Approximate proximal subgradient obtained from a tilted prox step.

    Minimises ``f(y) - <tilt, y> + ||y - x||^2 / (2 lam)`` over ``grid``
    (default: the domain box of ``f`` at ``resolution`` points per axis),
    then zooms in on the incumbent until the search cell has shrunk by
    ``10**refine`` (ten-fold per pass in 1-D, halving per pass above).  Zoom passes only apply to box grids; an explicit
    point set is searched exhaustively and nothing else.

    Returns
    -------
    (p, xstar) or None
        ``None`` when the minimiser lies on the face of the box (the quadratic
        term failed to localise it) or no grid value is finite.
    """
    if not lam > 0:
        raise InvalidInputError("lam must be positive")
    x = as_points(x, f.dim).reshape(1, f.dim)
    t = np.zeros((1, f.dim)) if tilt is None else \
        np.asarray(tilt, dtype=float).reshape(1, f.dim)
    g = _grid_for(f, grid, resolution)
    if isinstance(g, Grid):
        p, s, ok = _prox_batch(f, x, lam, t, g.points, f(g.points),
                               (g.lo, g.hi), g.spacing, refine)
    else:
        p, s, ok = _prox_batch(f, x, lam, t, g, f(g))
    if not ok[0]:
        return None
    return p[0], s[0]


def lipschitz_estimate(f, grid):
    """Largest finite difference quotient between grid neighbours."""
    vals = f(grid.points).reshape(grid.shape)
    best = 0.0
    for axis, h in enumerate(grid.spacing):
        with np.errstate(invalid="ignore"):
            d = np.abs(np.diff(vals, axis=axis))
        d = d[np.isfinite(d)]
        if d.size:
            best = max(best, float(d.max() / h))
    return best


def default_tilts(dim, tilt_count, bound):
    """``tilt_count`` values per axis, uniform on ``[-bound, bound]``."""
    if tilt_count < 1:
        raise InvalidInputError("tilt_count must be at least 1")
    axis = np.zeros(1) if tilt_count == 1 else np.linspace(-bound, bound, tilt_count)
    return np.array(list(itertools.product(axis, repeat=dim)))


def _dedupe(x, s, atol=1e-12):
    key = np.round(np.hstack([x, s]) / atol)
    _, first = np.unique(key, axis=0, return_index=True)
    return np.sort(first)


def sample_graph(f, resolution=201, lam_schedule=DEFAULT_LAMBDAS, tilt_count=5,
                 tilts=None, refine=DEFAULT_REFINE):
    """Sweep base points x steps x tilts through the tilted prox.

    ``tilts`` overrides ``tilt_count``; otherwise tilts span
    ``[-L, L]`` per axis with ``L`` the empirical Lipschitz bound of ``f``
    on the grid.  Pairs repeating another pair to ``1e-12`` are dropped, so
    the same point can carry several subgradients.

    Raises
    ------
    EmptyGraphError
        If no base point produced a localised minimiser.
    """
    grid = box_grid(*f.domain, resolution)
    fvals = f(grid.points)
    if tilts is None:
        tilts = default_tilts(f.dim, tilt_count, lipschitz_estimate(f, grid))
    else:
        tilts = np.asarray(tilts, dtype=float).reshape(-1, f.dim)

    base = grid.points
    xs, ss = [], []
    for lam in lam_schedule:
        if not lam > 0:
            raise InvalidInputError("lambda values must be positive")
        for t in tilts:
            tb = np.broadcast_to(t, base.shape)
            p, s, ok = _prox_batch(f, base, lam, tb, grid.points, fvals,
                                   (grid.lo, grid.hi), grid.spacing, refine)
            xs.append(p[ok])
            ss.append(s[ok])
    x = np.vstack(xs)
    s = np.vstack(ss)
    if len(x) == 0:
        raise EmptyGraphError(f"no subgradient samples for {f.name}")
    keep = _dedupe(x, s)
    x, s = x[keep], s[keep]
    fx = f(x)
    fin = np.isfinite(fx)
    if not np.any(fin):
        raise EmptyGraphError(f"no finite samples for {f.name}")
    return SubgradientGraph(x[fin], s[fin], fx[fin])


@dataclass(frozen=True)
class StabilityReport:
    max_mismatch: float
    sizes: tuple
    tol: float

    @property
    def stable(self):
        return self.max_mismatch <= self.tol


def _one_sided_mismatch(a, b):
    tree = cKDTree(np.hstack([b.x, b.xstar]))
    dist, _ = tree.query(np.hstack([a.x, a.xstar]))
    return float(dist.max())


def check_stability(f, v, resolution=201, lam_schedule=DEFAULT_LAMBDAS,
                    tilt_count=5, tol=1e-6):
    """Compare the sampled graphs of ``f`` and ``f + <v, .>``.

    The second graph is sampled with every tilt moved by ``v``; each pair
    ``(x, x*)`` of the first graph, shifted to ``(x, x* + v)``, is matched to
    its nearest neighbour in the second and vice versa.
    """
    v = np.asarray(v, dtype=float).reshape(f.dim)
    grid = box_grid(*f.domain, resolution)
    tilts = default_tilts(f.dim, tilt_count, lipschitz_estimate(f, grid))
    g1 = sample_graph(f, resolution, lam_schedule, tilts=tilts)
    g2 = sample_graph(f.shifted(v), resolution, lam_schedule, tilts=tilts + v)
    moved = SubgradientGraph(g1.x, g1.xstar + v, g1.fx)
    mismatch = max(_one_sided_mismatch(moved, g2), _one_sided_mismatch(g2, moved))
    return StabilityReport(mismatch, (len(g1), len(g2)), tol)
