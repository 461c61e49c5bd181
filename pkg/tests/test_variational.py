import numpy as np
import pytest

from gaugecert import (Barrier, BarrierFunction, ConvergenceWarning,
                       FunctionOracle, HalfspacePolytope, InvalidInputError,
                       PreconditionError, ekeland, lemma_trace, make_function,
                       parse_expression, tube_body)
from gaugecert.variational import body_grid, default_eps_schedule


def ekeland_triple_holds(values, points, res, fstart, start):
    """Brute-force check of the three guarantees; exact, no tolerance."""
    dist_start = np.linalg.norm(res.y - start)
    cone = values + (res.eps / res.lam) * np.linalg.norm(points - res.y, axis=1)
    return (res.fy <= fstart, dist_start <= res.lam, bool(np.all(cone >= res.fy)))


def test_fixed_point_at_minimiser():
    f = make_function("quadratic")
    body = HalfspacePolytope([[1.0], [-1.0]])
    for eps, lam in ((0.1, 0.05), (1.0, 2.0)):
        res = ekeland(f, body, 0.0, eps, lam)
        assert res.y[0] == 0.0 and res.moves == 0


def test_linear_function_example():
    f = parse_expression("x", domain=(0, 1))
    pts = np.linspace(0, 1, 101)[:, None]
    res = ekeland(f, pts, 0.2, 0.25, 1.0)
    assert res.y[0] == 0.0
    assert all(ekeland_triple_holds(f(pts), pts, res, 0.2, np.array([0.2])))


def test_localisation_example():
    f = make_function("quadratic")
    pts = np.linspace(-1, 1, 201)[:, None]
    res = ekeland(f, pts, 0.3, 0.1, 0.05)
    assert abs(res.y[0] - 0.3) <= 0.05
    assert res.fy <= 0.09
    assert all(ekeland_triple_holds(f(pts), pts, res, 0.09, np.array([0.3])))


@pytest.mark.parametrize("expr", ["x", "x^2", "abs(x - 0.3)"])
@pytest.mark.parametrize("n", [101, 257, 1001])
@pytest.mark.parametrize("eps,lam", [(0.25, 1.0), (0.1, 0.05)])
def test_triple_from_every_admissible_start(expr, n, eps, lam):
    f = parse_expression(expr, domain=(-1, 1))
    pts = np.linspace(-1, 1, n)[:, None]
    vals = f(pts)
    starts = np.flatnonzero(vals <= vals.min() + eps)
    for i in starts[:: max(1, len(starts) // 25)]:
        res = ekeland(f, pts, pts[i], eps, lam)
        assert all(ekeland_triple_holds(vals, pts, res, vals[i], pts[i]))


def test_precondition_error_reports_slack():
    f = make_function("quadratic")
    pts = np.linspace(-1, 1, 21)[:, None]
    with pytest.raises(PreconditionError) as info:
        ekeland(f, pts, 0.9, 0.1, 1.0)
    assert info.value.slack == pytest.approx(0.81 - 0.1)


def test_infinite_everywhere_rejected():
    f = FunctionOracle(lambda x: np.full(x.shape[:-1], np.inf), (-1.0, 1.0))
    with pytest.raises(InvalidInputError):
        ekeland(f, np.linspace(-1, 1, 5), 0.0, 0.1, 1.0)
    with pytest.raises(InvalidInputError):
        ekeland(make_function("quadratic"), np.linspace(-1, 1, 5), 0.0, 0.0, 1.0)


def test_two_dimensional_body():
    f = make_function("abs", dim=2)
    body = tube_body([0, 0], [1, 0], 0.5)
    pts = body_grid(body, 41)
    res = ekeland(f, body, [0.1, 0.05], 0.2, 0.3, resolution=41)
    assert all(ekeland_triple_holds(f(pts), pts, res, f([0.1, 0.05]),
                                    np.array([0.1, 0.05])))


def _barrier_1d(scale=1.0):
    return BarrierFunction(Barrier(tube_body(0.0, 1.0, 0.5), scale))


def test_trace_collapses_at_common_minimiser():
    rec = lemma_trace(make_function("quadratic"), _barrier_1d(), 0.0, n_max=8)
    for s in rec.iterations:
        assert s.x[0] == 0.0 and s.y[0] == 0.0
        assert s.pairing == 0.0 and s.gap_xy == 0.0
    assert rec.converged and rec.slack == 0.0
    assert rec.M == pytest.approx(1.5)


def test_trace_quadratic_small_eps():
    rec = lemma_trace(make_function("quadratic"), _barrier_1d(), 0.0, n_max=14)
    last = rec.iterations[-1]
    assert last.eps < 1e-4
    assert last.gap_xy < 1e-3 and abs(last.pairing) < 1e-3


def brute_inf(f, n=400001):
    # U = (-0.5, 1.5) and k = mu / (1 - mu) written out by hand
    xs = np.linspace(-0.5, 1.5, n)[1:-1]
    mu = np.where(xs >= 0, xs / 1.5, -xs / 0.5)
    return float(np.min(f(xs[:, None]) + mu / (1 - mu)))


@pytest.mark.parametrize("name", ["quadratic", "step"])
def test_trace_value_within_two_eps(name):
    f = make_function(name)
    g = _barrier_1d()
    rec = lemma_trace(f, g, 0.0, n_max=10)
    ref = brute_inf(f)
    for s in rec.iterations:
        assert abs(s.value - ref) <= 2 * s.eps
        assert abs(s.value - s.inf_n) <= 2 * s.eps
        assert abs(s.pairing) <= rec.pairing_bound(s) + rec.slack
    assert s.gap_xy <= s.eps + s.spacing


def test_trace_tilted_barrier_moves_off_origin():
    # the linear part drags the minimiser of f + g away from 0
    f = make_function("abs")
    g = BarrierFunction(Barrier(tube_body(0.0, 1.0, 0.5)), linear=2.5)
    rec = lemma_trace(f, g, 0.0, n_max=8)
    last = rec.iterations[-1]
    assert last.y[0] > 0.05
    assert abs(last.value - last.inf_n) <= 2 * last.eps
    assert abs(last.pairing) <= rec.pairing_bound(last) + rec.slack


def test_trace_slack_shrinks_under_refinement():
    f = make_function("step")
    coarse = lemma_trace(f, _barrier_1d(), 0.0, n_max=8, resolution=51)
    fine = lemma_trace(f, _barrier_1d(), 0.0, n_max=8, resolution=101)
    assert fine.slack <= coarse.slack


def test_trace_rows_and_schedule():
    rec = lemma_trace(make_function("quadratic"), _barrier_1d(), 0.0, n_max=3)
    rows = list(rec.rows())
    assert [r["n"] for r in rows] == [1, 2, 3]
    np.testing.assert_allclose([r["eps"] for r in rows], default_eps_schedule(3))
    assert {"x1", "xstar1", "y1", "ystar1", "pairing"} <= set(rows[0])


def test_trace_non_convergence_warns():
    f = make_function("quadratic")
    with pytest.warns(ConvergenceWarning):
        lemma_trace(f, _barrier_1d(), 0.0, n_max=2, tol=-1.0)


def test_trace_schedule_validation():
    with pytest.raises(InvalidInputError):
        lemma_trace(make_function("quadratic"), _barrier_1d(), 0.0,
                    eps_schedule=[0.1, 0.2])
