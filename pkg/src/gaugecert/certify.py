"""Monotonicity of sampled subdifferentials and the envelope convexity test.

For a sampled graph ``{(x_i, x_i*, f(x_i))}`` the *envelope*

    g(xbar) = max_i  f(x_i) + <x_i*, xbar - x_i>

is a finite max of affine functions.  When ``df`` is monotone, ``f`` coincides
with its envelope; :func:`certify_convexity` checks both halves on a grid.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .bodies import as_points
from .errors import EmptyGraphError, InvalidInputError
from .subdiff import (DEFAULT_LAMBDAS, box_grid, lipschitz_estimate,
                      sample_graph)

__all__ = ["MonotonicityReport", "monotonicity_check", "MintyResult",
           "minty_test", "envelope", "CertificationReport", "certify_convexity",
           "CERTIFIED", "NONCONVEX", "INCONCLUSIVE"]

logger = logging.getLogger(__name__)

CERTIFIED = "certified-convex"
NONCONVEX = "nonconvex-witnessed"
INCONCLUSIVE = "inconclusive"

MAX_GRAPH_SIZE = 5000
# graphs are usually sampled, so checks on them default to the looser
# tolerance that absorbs grid quantisation
GRAPH_TOL = 1e-6
_ROW_BLOCK = 512


@dataclass(frozen=True)
class MonotonicityReport:
    verdict: str
    worst_value: float
    worst_pair: tuple = None

    @property
    def monotone(self):
        return self.verdict == "monotone"


def monotonicity_check(graph, tol=GRAPH_TOL, max_size=MAX_GRAPH_SIZE):
    """Exact sweep of ``<x2* - x1*, x2 - x1>`` over all unordered pairs.

    ``worst_pair`` is ``((x1, x1*), (x2, x2*))`` at the minimum; a single
    sample is vacuously monotone with ``worst_value = +inf``.
    """
    m = len(graph)
    if m == 0:
        raise EmptyGraphError("monotonicity of an empty graph")
    if m > max_size:
        raise ValueError(f"graph has {m} samples, above the cap of {max_size}")
    x, s = graph.x, graph.xstar
    worst, pair = np.inf, None
    for start in range(0, m, _ROW_BLOCK):
        rows = slice(start, start + _ROW_BLOCK)
        vals = np.einsum("ijk,ijk->ij", s[rows, None, :] - s[None, :, :],
                         x[rows, None, :] - x[None, :, :])
        # only j > i
        i_idx = np.arange(start, min(start + _ROW_BLOCK, m))
        vals[np.arange(len(i_idx))[:, None] >= (np.arange(m)[None, :] - start)] = np.inf
        k = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[k] < worst:
            worst = float(vals[k])
            i, j = i_idx[k[0]], k[1]
            pair = ((x[i], s[i]), (x[j], s[j]))
    verdict = "monotone" if worst >= -tol else "violated"
    return MonotonicityReport(verdict, worst, pair)


@dataclass(frozen=True)
class MintyResult:
    related: bool
    worst_value: float
    witness: tuple = None

    def __bool__(self):
        return bool(self.related)


def minty_test(graph, x0, x0star, tol=GRAPH_TOL):
    """Is ``(x0, x0*)`` in monotone relation to every pair of ``graph``?

    True iff ``<x* - x0*, x - x0> >= -tol`` for all samples.  A true answer
    predicts ``x0*`` is a Fenchel subgradient of ``f`` at ``x0``; cross-check
    with :func:`gaugecert.subdiff.fenchel_membership`.
    """
    if len(graph) == 0:
        warnings.warn("Minty test against an empty graph is vacuously true",
                      stacklevel=2)
        return MintyResult(True, np.inf, None)
    x0 = as_points(x0, graph.dim).reshape(graph.dim)
    x0star = np.asarray(x0star, dtype=float).reshape(graph.dim)
    vals = np.einsum("ij,ij->i", graph.xstar - x0star, graph.x - x0)
    i = int(np.argmin(vals))
    return MintyResult(bool(vals[i] >= -tol), float(vals[i]),
                       (graph.x[i], graph.xstar[i]))


def envelope(graph, xbar):
    """``max_i f(x_i) + <x_i*, xbar - x_i>`` for one point or a batch."""
    if len(graph) == 0:
        raise EmptyGraphError("envelope of an empty graph")
    xbar = as_points(xbar, graph.dim)
    single = xbar.ndim == 1
    pts = xbar.reshape(-1, graph.dim)
    out = np.empty(len(pts))
    offset = graph.fx - np.einsum("ij,ij->i", graph.xstar, graph.x)
    for start in range(0, len(pts), _ROW_BLOCK):
        blk = pts[start:start + _ROW_BLOCK]
        out[start:start + _ROW_BLOCK] = (blk @ graph.xstar.T + offset).max(axis=1)
    return float(out[0]) if single else out.reshape(xbar.shape[:-1])


@dataclass(frozen=True)
class CertificationReport:
    """Verdict of the monotone-implies-convex pipeline.

    ``envelope_gap`` is ``max f - g`` over the test points (``g`` the
    envelope) and ``envelope_excess`` is ``max g - f``; both must be within
    ``tolerance`` for a convexity certificate.
    """

    verdict: str
    graph_size: int
    monotonicity: MonotonicityReport
    envelope_gap: float = None
    gap_witness: np.ndarray = None
    envelope_excess: float = None
    excess_witness: np.ndarray = None
    tolerance: float = None
    lipschitz_estimate: float = None
    spacing: float = None
    notes: tuple = ()


def certify_convexity(f, resolution=201, lam_schedule=DEFAULT_LAMBDAS,
                      tilt_count=5, test_points=None, tol=None, mono_tol=GRAPH_TOL,
                      n_random=0, seed=0, graph=None, max_size=MAX_GRAPH_SIZE):
    """Sample ``df``, test monotonicity, then compare ``f`` with its envelope.

    Parameters
    ----------
    f : FunctionOracle
    resolution, lam_schedule, tilt_count
        Passed to :func:`gaugecert.subdiff.sample_graph`.
    test_points : array_like, optional
        Where ``f`` and the envelope are compared; defaults to the sampling
        grid plus ``n_random`` uniform points drawn with ``seed``.
    tol : float, optional
        Envelope tolerance; defaults to ``100 * spacing * L`` with ``L`` the
        empirical Lipschitz bound of ``f`` on the grid.
    mono_tol : float
        Tolerance on pairwise monotonicity.
    graph : SubgradientGraph, optional
        Skip sampling and use this graph.
    max_size : int
        Largest graph the pairwise sweep accepts.

    Raises
    ------
    InvalidInputError
        If the sampled graph is larger than ``max_size``.
    """
    grid = box_grid(*f.domain, resolution)
    lhat = lipschitz_estimate(f, grid)
    spacing = float(np.max(grid.spacing))
    if tol is None:
        tol = max(100.0 * spacing * lhat, 1e-9)
    common = dict(tolerance=tol, lipschitz_estimate=lhat, spacing=spacing)

    if graph is None:
        try:
            graph = sample_graph(f, resolution, lam_schedule, tilt_count)
        except EmptyGraphError as exc:
            empty = MonotonicityReport("monotone", np.inf, None)
            return CertificationReport(INCONCLUSIVE, 0, empty,
                                       notes=(str(exc),), **common)
    if len(graph) > max_size:
        raise InvalidInputError(
            f"{len(graph)} subgradient samples exceed the pairwise cap of {max_size}; "
            "lower the resolution, the tilt count or the number of lambda values")
    mono = monotonicity_check(graph, mono_tol, max_size)
    if not mono.monotone:
        return CertificationReport(NONCONVEX, len(graph), mono, **common)

    if test_points is None:
        pts = grid.points
        if n_random:
            rng = np.random.default_rng(seed)
            lo, hi = f.domain
            pts = np.vstack([pts, rng.uniform(lo, hi, size=(n_random, f.dim))])
    else:
        pts = as_points(test_points, f.dim).reshape(-1, f.dim)
    fv = f(pts)
    live = np.isfinite(fv)
    notes = ()
    if not np.all(live):
        # the finite envelope cannot reproduce +inf outside dom f
        notes = (f"{int((~live).sum())} test points outside dom f skipped",)
    pts, fv = pts[live], fv[live]
    gv = envelope(graph, pts)
    gap = fv - gv
    i, j = int(np.argmax(gap)), int(np.argmin(gap))
    report = dict(envelope_gap=float(gap[i]), gap_witness=pts[i],
                  envelope_excess=float(-gap[j]), excess_witness=pts[j])
    if gap[i] <= tol and -gap[j] <= tol:
        verdict = CERTIFIED
    elif -gap[j] > tol:
        # an affine piece of a sampled pair rises above f
        verdict = NONCONVEX
    else:
        verdict = INCONCLUSIVE
    logger.info("certify %s: %s (gap %.3g, excess %.3g, tol %.3g)",
                f.name, verdict, gap[i], -gap[j], tol)
    return CertificationReport(verdict, len(graph), mono, notes=notes,
                               **report, **common)
