import numpy as np
import pytest

from gaugecert import InvalidInputError, make_function, parse_expression
from gaugecert.functions import CONVEX, registry_names

XS = np.linspace(-1, 1, 41)


@pytest.mark.parametrize("name,ref", [
    ("quadratic", lambda x: x ** 2),
    ("abs", np.abs),
    ("neg_abs", lambda x: -np.abs(x)),
    ("cube", lambda x: x ** 3),
    ("max_affine", lambda x: np.maximum(x, 2 * x)),
    ("indicator_box", lambda x: np.where(np.abs(x) <= 0.5, 0.0, np.inf)),
    ("step", lambda x: np.where(x <= 0.5, 0.0, 1.0)),
])
def test_registry_formulas(name, ref):
    f = make_function(name)
    np.testing.assert_array_equal(f(XS[:, None]), ref(XS))


def test_registry_names_and_convex_set():
    assert registry_names() == sorted(["quadratic", "abs", "neg_abs", "cube",
                                       "max_affine", "indicator_box", "step"])
    assert CONVEX == {"quadratic", "abs", "max_affine", "indicator_box"}


def test_step_is_lower_semicontinuous_at_jump():
    f = make_function("step")
    assert f(0.5) == 0.0
    assert f(0.5 + 1e-12) == 1.0


def test_unknown_name():
    with pytest.raises(InvalidInputError, match="quadratic"):
        make_function("sine")


def test_max_affine_parameters():
    f = make_function("max_affine", slopes=[[-1.0], [1.0]], intercepts=[0.0, -0.5])
    assert f(0.0) == 0.0 and f(1.0) == 0.5
    np.testing.assert_array_equal(f.subgradient(0.25), [[-1.0], [1.0]])


@pytest.mark.parametrize("name", sorted(CONVEX))
def test_analytic_subgradients_are_fenchel(name):
    f = make_function(name)
    ys = XS[:, None]
    fy = f(ys)
    fin = np.isfinite(fy)
    for x in (-0.5, -0.2, 0.0, 0.3, 0.5):
        if not np.isfinite(f(x)):
            continue
        for s in f.subgradient(np.array([x])):
            assert np.all((ys[fin] - x) @ s <= fy[fin] - f(x) + 1e-12)


def test_neg_abs_has_no_subgradient_at_kink():
    assert make_function("neg_abs").subgradient(np.array([0.0])).shape == (0, 1)


def test_abs_subgradient_set_in_2d():
    sub = make_function("abs", dim=2).subgradient(np.array([0.0, 0.4]))
    assert {tuple(r) for r in sub} == {(-1, 1), (0, 1), (1, 1)}


@pytest.mark.parametrize("text,ref", [
    ("x^2 + 1", lambda x: x ** 2 + 1),
    ("x**3 - 2*x", lambda x: x ** 3 - 2 * x),
    ("abs(x - 0.3)", lambda x: np.abs(x - 0.3)),
    ("max(x, 2*x, -1)", lambda x: np.maximum(np.maximum(x, 2 * x), -1)),
    ("min(x, 0) / 2", lambda x: np.minimum(x, 0) / 2),
    ("-x1", lambda x: -x),
    ("x^-2", lambda x: x ** -2.0),
])
def test_expressions(text, ref):
    f = parse_expression(text, domain=(0.1, 1))
    xs = np.linspace(0.1, 1, 11)
    np.testing.assert_allclose(f(xs[:, None]), ref(xs))


def test_expression_two_dimensions():
    f = parse_expression("x1^2 + abs(y)", dim=2)
    assert f([0.5, -2.0]) == pytest.approx(2.25)


@pytest.mark.parametrize("text", ["exp(x)", "x ** 0.5", "__import__('os')", "x[0]",
                                  "lambda: 1", "t + 1", "abs(x, x)", "x < 1", "True"])
def test_expression_rejections(text):
    with pytest.raises(InvalidInputError):
        parse_expression(text)


def test_expression_extended_values():
    # +inf is a legal value of an lsc function, -inf and nan are not
    assert parse_expression("1 / (x - x)")(0.3) == np.inf
    with pytest.raises(InvalidInputError):
        parse_expression("-1 / (x - x)")(0.3)
    with pytest.raises(InvalidInputError):
        parse_expression("(x - x) / (x - x)")(0.3)
