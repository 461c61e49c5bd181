"""Ekeland's variational principle on grids and the barrier sequence trace.

:func:`ekeland` turns an ``eps``-minimiser into a point that exactly
minimises ``f + (eps/lam) ||. - y||`` over a finite grid.

:func:`lemma_trace` builds, for a decreasing schedule ``eps_n``, points
``x_n, y_n`` in ``U`` with ``x_n*`` a proximal subgradient of ``f`` at
``x_n`` and ``y_n*`` a subgradient of the convex barrier ``g`` at ``y_n``,
and records the three quantities that must vanish:

* ``gap_xy  = ||x_n - y_n||``
* ``value   = f(x_n) + g(y_n)`` against ``inf_U (f + g)``
* ``pairing = <x_n*, x_n - xbar> + <y_n*, y_n - xbar>``
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bodies import ConvexBody, as_points
from .errors import ConvergenceWarning, InvalidInputError, PreconditionError
from .subdiff import _prox_batch, box_grid

__all__ = ["EkelandResult", "ekeland", "body_grid", "TraceStep", "TraceRecord",
           "lemma_trace", "default_eps_schedule"]

logger = logging.getLogger(__name__)

MAX_GRID_POINTS = 10 ** 6


@dataclass(frozen=True)
class EkelandResult:
    y: np.ndarray
    fy: float
    eps: float
    lam: float
    start: np.ndarray
    moves: int = 0


def body_grid(body, resolution, center=None):
    """Grid points of the box ``center + [-s, s]^n`` that lie in ``center + U``."""
    n = body.dim
    center = np.zeros(n) if center is None else as_points(center, n).reshape(n)
    _, outer = body.radius_bounds()
    g = box_grid(center - outer, center + outer, resolution)
    return g.points[body.contains(g.points - center)]


def _ekeland_indices(points, values, start, fstart, slope):
    """Index of the Ekeland point among ``points`` (-1 means ``start`` itself)."""
    cur, fcur, idx, moves = start, fstart, -1, 0
    while True:
        dist = np.linalg.norm(points - cur, axis=1)
        dominated = values + slope * dist <= fcur
        if idx >= 0:
            dominated[idx] = False
        cand = np.flatnonzero(dominated)
        if cand.size == 0:
            return idx, moves
        j = cand[np.argmin(values[cand])]
        if values[j] >= fcur:
            return idx, moves
        idx, cur, fcur, moves = j, points[j], values[j], moves + 1


def ekeland(f, domain, start, eps, lam, resolution=201):
    """Ekeland point on a finite grid.

    Starting from ``start``, repeatedly jump to the grid point of least
    ``f``-value among those ``z`` with ``f(z) + (eps/lam)||z - cur|| <= f(cur)``
    until no other point qualifies.  The result ``y`` satisfies

    * ``f(y) <= f(start)``,
    * ``||y - start|| <= lam``,
    * ``f(z) + (eps/lam)||z - y|| >= f(y)`` for every grid point ``z``.

    Parameters
    ----------
    f : FunctionOracle
    domain : ConvexBody or array_like
        A body (gridded with :func:`body_grid`) or an explicit ``(N, n)``
        point set.
    start : array_like
    eps, lam : float
        ``start`` must be an ``eps``-minimiser of ``f`` over the grid.

    Raises
    ------
    InvalidInputError
        If ``f`` is ``+inf`` on the whole grid or at ``start``.
    PreconditionError
        If ``f(start) > min f + eps``; ``.slack`` holds the excess.
    """
    if not (eps > 0 and lam > 0):
        raise InvalidInputError("eps and lam must be positive")
    if isinstance(domain, ConvexBody):
        points = body_grid(domain, resolution)
    else:
        points = as_points(domain, f.dim).reshape(-1, f.dim)
    start = as_points(start, f.dim).reshape(f.dim)
    values = f(points)
    fstart = f(start)
    if not np.any(np.isfinite(values)):
        raise InvalidInputError(f"{f.name} is +inf on the whole grid")
    if not np.isfinite(fstart):
        raise InvalidInputError("f(start) = +inf")
    slack = fstart - min(values.min(), fstart) - eps
    if slack > 0:
        raise PreconditionError(
            f"start is not an eps-minimiser (excess {slack:.3g})", slack)
    idx, moves = _ekeland_indices(points, values, start, fstart, eps / lam)
    if idx < 0:
        y, fy = start.copy(), fstart
    else:
        y, fy = points[idx].copy(), float(values[idx])
    return EkelandResult(y, float(fy), float(eps), float(lam), start, moves)


def default_eps_schedule(n_max=12):
    return 2.0 ** -np.arange(1, n_max + 1)


@dataclass(frozen=True)
class TraceStep:
    n: int
    eps: float
    x: np.ndarray
    xstar: np.ndarray
    y: np.ndarray
    ystar: np.ndarray
    gap_xy: float
    value: float
    inf_n: float
    pairing: float
    spacing: float
    grid_size: int

    @property
    def value_bound(self):
        return 2.0 * self.eps


@dataclass
class TraceRecord:
    """Sequences and diagnostics of one trace run.

    ``M`` is ``sup {||y - anchor|| : y in U}``; the pairing is expected to
    stay within ``(M + 1) eps_n`` up to :attr:`slack`.
    """

    anchor: np.ndarray
    M: float
    iterations: list = field(default_factory=list)
    inf_estimate: float = np.inf
    converged: bool = False

    def pairing_bound(self, step):
        return (self.M + 1.0) * step.eps

    @property
    def slack(self):
        """Largest excess of ``|pairing|`` over ``(M + 1) eps_n``."""
        return max((max(0.0, abs(s.pairing) - self.pairing_bound(s))
                    for s in self.iterations), default=0.0)

    def rows(self):
        for s in self.iterations:
            yield {"n": s.n, "eps": s.eps, "gap_xy": s.gap_xy, "value": s.value,
                   "inf": s.inf_n, "pairing": s.pairing, "spacing": s.spacing,
                   "grid_size": s.grid_size,
                   **{f"x{i + 1}": v for i, v in enumerate(s.x)},
                   **{f"xstar{i + 1}": v for i, v in enumerate(s.xstar)},
                   **{f"y{i + 1}": v for i, v in enumerate(s.y)},
                   **{f"ystar{i + 1}": v for i, v in enumerate(s.ystar)}}


def _resolutions(base, n_steps, dim, refine):
    res = []
    cap = int(np.floor(MAX_GRID_POINTS ** (1.0 / dim)))
    for n in range(1, n_steps + 1):
        r = (base - 1) * 2 ** n + 1 if refine else base
        res.append(min(r, cap))
    return res


def lemma_trace(f, g, anchor, n_max=12, eps_schedule=None, resolution=101,
                refine_grid=True, tol=None):
    """Run the barrier sequence construction for ``f`` and ``g``.

    Parameters
    ----------
    f : FunctionOracle
        Lower semicontinuous, bounded below on ``U``.
    g : BarrierFunction
        Convex continuous barrier for ``U = g.center + g.body``.
    anchor : array_like
        The reference point ``xbar`` in the pairing.
    n_max : int
    eps_schedule : sequence of float, optional
        Decreasing positive values; defaults to ``2**-n``.
    resolution : int
        Points per axis of the bounding box grid at ``n = 0``; doubled at each
        step when ``refine_grid`` (capped at ``1e6`` points in total).
    tol : float, optional
        Final-step tolerance for the convergence flag; defaults to the last
        ``eps``.

    For each ``n``: pick the first grid point ``z_n`` with
    ``(f+g)(z_n) < min(f+g) + eps_n``, move to its Ekeland point ``y_n`` (slope
    ``eps_n``), take ``y_n* = dg(y_n)`` and extract ``(x_n, x_n*)`` from the
    prox of ``f`` at ``y_n`` with step ``eps_n`` and tilt ``-y_n*``.
    """
    n = f.dim
    if g.dim != n:
        raise InvalidInputError("f and g live in different dimensions")
    anchor = as_points(anchor, n).reshape(n)
    eps_schedule = default_eps_schedule(n_max) if eps_schedule is None \
        else np.asarray(eps_schedule, dtype=float)[:n_max]
    if np.any(eps_schedule <= 0) or np.any(np.diff(eps_schedule) > 0):
        raise InvalidInputError("eps schedule must be positive and non-increasing")

    M = g.body.farthest_distance(anchor - g.center)
    record = TraceRecord(anchor=anchor, M=M)
    _, outer = g.body.radius_bounds()
    for step, (eps, res) in enumerate(zip(eps_schedule, _resolutions(
            resolution, len(eps_schedule), n, refine_grid)), start=1):
        pts = body_grid(g.body, res, g.center)
        fv = f(pts)
        total = fv + g(pts)
        if not np.any(np.isfinite(total)):
            raise InvalidInputError("f + g is +inf on the whole grid")
        inf_n = float(total.min())
        z = int(np.flatnonzero(total < inf_n + eps)[0])
        j, _ = _ekeland_indices(pts, total, pts[z], total[z], eps)
        j = z if j < 0 else j
        y = pts[j]
        ystar = g.subgradient(y)
        p, xstar, ok = _prox_batch(f, y[None], eps, -ystar[None], pts, fv)
        x, xstar = p[0], xstar[0]
        value = float(f(x) + total[j] - fv[j])
        pairing = float(xstar @ (x - anchor) + ystar @ (y - anchor))
        record.iterations.append(TraceStep(
            step, float(eps), x, xstar, y, ystar, float(np.linalg.norm(x - y)),
            value, inf_n, pairing, 2.0 * outer / (res - 1), len(pts)))
        logger.debug("trace n=%d eps=%.3g gap=%.3g value-inf=%.3g pairing=%.3g",
                     step, eps, record.iterations[-1].gap_xy, value - inf_n, pairing)

    last = record.iterations[-1]
    record.inf_estimate = last.inf_n
    tol = last.eps if tol is None else tol
    record.converged = (last.gap_xy <= tol + last.spacing
                        and abs(last.value - last.inf_n) <= 2 * last.eps
                        and abs(last.pairing) <= record.pairing_bound(last) + tol)
    if not record.converged:
        warnings.warn(
            f"trace diagnostics above tolerance at n={last.n}: gap={last.gap_xy:.3g}, "
            f"value-inf={last.value - last.inf_n:.3g}, pairing={last.pairing:.3g}",
            ConvergenceWarning, stacklevel=2)
    return record
