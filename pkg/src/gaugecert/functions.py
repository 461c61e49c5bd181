"""Registry of test functions and a tiny expression language.

Registry (``x`` in ``R^n``, formulas applied coordinatewise where noted):

=============  ==============================================  =========
name           formula                                         convex?
=============  ==============================================  =========
quadratic      ``sum x_i^2``                                   yes
abs            ``sum |x_i|``                                   yes
neg_abs        ``-sum |x_i|``                                  no
cube           ``sum x_i^3``                                   no
max_affine     ``max_j <a_j, x> + b_j`` (default ``max(x, 2x)``)  yes
indicator_box  ``0`` on ``[-0.5, 0.5]^n``, ``+inf`` elsewhere  yes
step           ``0`` if ``x_1 <= 0.5`` else ``1``              no
=============  ==============================================  =========

Expressions use Python syntax restricted to numbers, the variables ``x``
(``x1``, ``x2``, ``x3`` in higher dimension), ``+ - * /``, integer powers
(``**`` or ``^``) and the calls ``abs``, ``max``, ``min``.
"""

import ast

import numpy as np

from .errors import InvalidInputError
from .subdiff import FunctionOracle

__all__ = ["REGISTRY", "make_function", "parse_expression", "registry_names"]

DEFAULT_DOMAIN = (-1.0, 1.0)


def _box(dim, domain):
    lo, hi = DEFAULT_DOMAIN if domain is None else domain
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (dim,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (dim,)).copy()
    return lo, hi


def _quadratic(dim, **_):
    return (lambda x: np.sum(x * x, axis=-1),
            lambda p: (2 * np.asarray(p, dtype=float)).reshape(1, dim))


def _sign_set(p):
    # all sign patterns of the l1 subdifferential restricted to {-1, 0, 1}
    opts = [[np.sign(v)] if v != 0 else [-1.0, 0.0, 1.0] for v in p]
    mesh = np.meshgrid(*opts, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _abs(dim, **_):
    return (lambda x: np.sum(np.abs(x), axis=-1),
            lambda p: _sign_set(np.asarray(p, dtype=float).reshape(dim)))


def _neg_abs(dim, **_):
    def sub(p):
        p = np.asarray(p, dtype=float).reshape(dim)
        if np.any(p == 0):
            return np.empty((0, dim))
        return -np.sign(p)[None]
    return lambda x: -np.sum(np.abs(x), axis=-1), sub


def _cube(dim, **_):
    return (lambda x: np.sum(x ** 3, axis=-1),
            lambda p: (3 * np.asarray(p, dtype=float) ** 2).reshape(1, dim))


def _max_affine(dim, slopes=None, intercepts=None, **_):
    if slopes is None:
        slopes = np.zeros((2, dim))
        slopes[0, 0], slopes[1, 0] = 1.0, 2.0
    a = np.asarray(slopes, dtype=float).reshape(-1, dim)
    b = np.zeros(len(a)) if intercepts is None else \
        np.asarray(intercepts, dtype=float).reshape(len(a))

    def sub(p):
        vals = a @ np.asarray(p, dtype=float).reshape(dim) + b
        return a[np.isclose(vals, vals.max(), rtol=0, atol=1e-12)]
    return lambda x: (x @ a.T + b).max(axis=-1), sub


def _indicator_box(dim, half_width=0.5, **_):
    def f(x):
        inside = np.all(np.abs(x) <= half_width, axis=-1)
        return np.where(inside, 0.0, np.inf)

    def sub(p):
        p = np.asarray(p, dtype=float).reshape(dim)
        if np.any(np.abs(p) > half_width):
            return np.empty((0, dim))
        # zero plus one unit outer normal per active face
        rows = [np.zeros(dim)]
        for i, v in enumerate(p):
            if abs(v) == half_width:
                e = np.zeros(dim)
                e[i] = np.sign(v)
                rows.append(e)
        return np.array(rows)
    return f, sub


def _step(dim, threshold=0.5, **_):
    return lambda x: np.where(x[..., 0] <= threshold, 0.0, 1.0), \
        lambda p: np.zeros((1, dim))


REGISTRY = {
    "quadratic": _quadratic,
    "abs": _abs,
    "neg_abs": _neg_abs,
    "cube": _cube,
    "max_affine": _max_affine,
    "indicator_box": _indicator_box,
    "step": _step,
}

CONVEX = frozenset({"quadratic", "abs", "max_affine", "indicator_box"})


def registry_names():
    return sorted(REGISTRY)


def make_function(name, dim=1, domain=None, **params):
    """Build a :class:`FunctionOracle` from the registry.

    ``step`` has subgradient ``0`` away from its jump; at the jump itself the
    listed analytic subgradient is only ``0`` although the proximal
    subdifferential there is ``[0, inf) e_1``.
    """
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown function {name!r}; choose one of {', '.join(registry_names())}"
        ) from None
    func, sub = factory(dim, **params)
    return FunctionOracle(func, _box(dim, domain), name, sub)


_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide}
_CALLS = frozenset({"abs", "max", "min"})


def _variables(dim):
    if dim == 1:
        return {"x": 0, "x1": 0}
    return {f"x{i + 1}": i for i in range(dim)} | \
        dict(zip(("x", "y", "z"), range(dim)))


def _compile(node, names):
    if isinstance(node, ast.Expression):
        return _compile(node.body, names)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        c = float(node.value)
        return lambda x: np.full(x.shape[:-1], c)
    if isinstance(node, ast.Name):
        if node.id not in names:
            raise InvalidInputError(
                f"unknown variable {node.id!r}; use {', '.join(sorted(names))}")
        i = names[node.id]
        return lambda x: x[..., i]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand, names)
        sign = -1.0 if isinstance(node.op, ast.USub) else 1.0
        return lambda x: sign * inner(x)
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            exp = node.right
            neg = isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub)
            val = exp.operand if neg else exp
            if not (isinstance(val, ast.Constant) and isinstance(val.value, int)):
                raise InvalidInputError("only integer powers are allowed")
            k = -val.value if neg else val.value
            base = _compile(node.left, names)
            return lambda x: np.power(base(x), float(k))
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise InvalidInputError(f"operator {type(node.op).__name__} not allowed")
        left, right = _compile(node.left, names), _compile(node.right, names)
        return lambda x: op(left(x), right(x))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
            and node.func.id in _CALLS and not node.keywords:
        args = [_compile(a, names) for a in node.args]
        if node.func.id == "abs":
            if len(args) != 1:
                raise InvalidInputError("abs takes exactly one argument")
            return lambda x: np.abs(args[0](x))
        if len(args) < 1:
            raise InvalidInputError(f"{node.func.id} needs arguments")
        red = np.maximum if node.func.id == "max" else np.minimum
        def call(x):
            out = args[0](x)
            for a in args[1:]:
                out = red(out, a(x))
            return out
        return call
    raise InvalidInputError(f"unsupported syntax: {ast.dump(node)[:60]}")


def parse_expression(text, dim=1, domain=None, name=None):
    """Compile ``text`` into a vectorised :class:`FunctionOracle`."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise InvalidInputError(f"malformed expression {text!r}: {exc.msg}") from None
    fn = _compile(tree, _variables(dim))

    def func(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(fn(np.asarray(x, dtype=float)), dtype=float)
    return FunctionOracle(func, _box(dim, domain), name or text)
