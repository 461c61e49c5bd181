"""Bounded open convex neighbourhoods of the origin and their gauges.

Three concrete bodies are provided:

* :class:`HalfspacePolytope` -- ``U = {x : <a_i, x> < 1 for all i}``,
* :class:`NormBall` -- open ``l_p`` ball of radius ``r`` for ``p`` in {1, 2, inf},
* :class:`SegmentTube` -- ``[a, b] + delta * B`` (open Euclidean ball), where the
  segment has already been shifted so that the origin is interior.

Every body evaluates its Minkowski functional (gauge)

    mu(x) = inf {t > 0 : x in t U}

on batches of points of shape ``(..., n)``.  Euclidean norms are used for all
radius constants.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection

from .errors import InvalidInputError

__all__ = ["ConvexBody", "HalfspacePolytope", "NormBall", "SegmentTube",
           "GaugeValue", "gauge", "gauge_subgradient", "radius_bounds",
           "tube_body", "contains", "body_from_spec", "as_points"]

GAUGE_TOL = 1e-10


def as_points(x, dim):
    """Coerce ``x`` to a float array of shape ``(..., dim)``.

    Scalars and 1-D arrays are accepted for ``dim == 1``.  Raises
    :class:`InvalidInputError` on non-finite coordinates or a dimension
    mismatch.
    """
    x = np.asarray(x, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.ndim == 0 or x.shape[-1] != dim:
        raise InvalidInputError(
            f"expected points of dimension {dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("non-finite coordinates in point")
    return x


class ConvexBody:
    """Base class.  Subclasses implement the vectorised primitives."""

    dim: int

    def gauge(self, x):
        raise NotImplementedError

    def subgradient(self, x):
        raise NotImplementedError

    def contains(self, x):
        raise NotImplementedError

    def radius_bounds(self):
        raise NotImplementedError

    def farthest_distance(self, point):
        """``sup {||y - point|| : y in U}``."""
        raise NotImplementedError

    def to_spec(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class HalfspacePolytope(ConvexBody):
    """``U = {x : A x < 1}`` with the rows of ``A`` as outer normals."""

    normals: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.normals, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2 or a.shape[0] == 0:
            raise InvalidInputError("normals must be a non-empty (m, n) array")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("non-finite normal")
        object.__setattr__(self, "normals", a)
        # computing the vertices also rejects unbounded polytopes
        object.__setattr__(self, "_vertices", _polytope_vertices(a))

    @property
    def dim(self):
        return self.normals.shape[1]

    @property
    def vertices(self):
        return self._vertices

    def gauge(self, x):
        x = as_points(x, self.dim)
        return np.maximum((x @ self.normals.T).max(axis=-1), 0.0)

    def subgradient(self, x):
        x = as_points(x, self.dim)
        vals = x @ self.normals.T
        idx = np.argmax(vals, axis=-1)  # first maximiser on ties
        g = self.normals[idx]
        zero = np.take_along_axis(vals, idx[..., None], axis=-1)[..., 0] <= 0
        return np.where(zero[..., None], 0.0, g)

    def contains(self, x):
        x = as_points(x, self.dim)
        return np.all(x @ self.normals.T < 1.0, axis=-1)

    def radius_bounds(self):
        inner = 1.0 / np.linalg.norm(self.normals, axis=1).max()
        outer = np.linalg.norm(self._vertices, axis=1).max()
        return float(inner), float(outer)

    def farthest_distance(self, point):
        point = as_points(point, self.dim)
        return float(np.linalg.norm(self._vertices - point, axis=1).max())

    def to_spec(self):
        return {"type": "polytope", "normals": self.normals.tolist()}


def _polytope_vertices(a):
    m, n = a.shape
    if n == 1:
        col = a[:, 0]
        if not (np.any(col > 0) and np.any(col < 0)):
            raise InvalidInputError("polytope is unbounded")
        hi = (1.0 / col[col > 0]).min()
        lo = (1.0 / col[col < 0]).max()
        return np.array([[lo], [hi]])
    for i in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[i] = -sign
            res = linprog(c, A_ub=a, b_ub=np.ones(m), bounds=[(None, None)] * n,
                          method="highs")
            if res.status == 3:
                raise InvalidInputError("polytope is unbounded")
    hs = HalfspaceIntersection(np.hstack([a, -np.ones((m, 1))]), np.zeros(n))
    return hs.intersections


@dataclass(frozen=True, eq=False)
class NormBall(ConvexBody):
    """Open ball ``{x : ||x||_p < r}``."""

    r: float
    p: float = 2
    n: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.r) and self.r > 0):
            raise InvalidInputError("ball radius must be positive")
        if self.p not in (1, 2, np.inf):
            raise InvalidInputError("norm order must be 1, 2 or inf")
        if int(self.n) < 1:
            raise InvalidInputError("dimension must be positive")

    @property
    def dim(self):
        return int(self.n)

    def gauge(self, x):
        x = as_points(x, self.dim)
        return np.linalg.norm(x, ord=self.p, axis=-1) / self.r

    def subgradient(self, x):
        x = as_points(x, self.dim)
        if self.p == 2:
            nrm = np.linalg.norm(x, axis=-1, keepdims=True)
            safe = np.where(nrm > 0, nrm, 1.0)
            return np.where(nrm > 0, x / (self.r * safe), 0.0)
        if self.p == 1:
            return np.sign(x) / self.r
        idx = np.argmax(np.abs(x), axis=-1)
        g = np.zeros_like(x)
        xi = np.take_along_axis(x, idx[..., None], axis=-1)
        np.put_along_axis(g, idx[..., None], np.sign(xi) / self.r, axis=-1)
        return g

    def contains(self, x):
        x = as_points(x, self.dim)
        return np.linalg.norm(x, ord=self.p, axis=-1) < self.r

    def radius_bounds(self):
        root = np.sqrt(self.dim)
        if self.p == 1:
            return self.r / root, self.r
        if self.p == np.inf:
            return self.r, self.r * root
        return self.r, self.r

    def _vertices(self):
        n = self.dim
        if self.p == 1:
            eye = np.eye(n) * self.r
            return np.vstack([eye, -eye])
        return self.r * np.array(list(itertools.product((-1.0, 1.0), repeat=n)))

    def farthest_distance(self, point):
        point = as_points(point, self.dim)
        if self.p == 2:
            return float(np.linalg.norm(point) + self.r)
        return float(np.linalg.norm(self._vertices() - point, axis=1).max())

    def to_spec(self):
        p = "inf" if self.p == np.inf else int(self.p)
        return {"type": "ball", "r": float(self.r), "p": p, "n": self.dim}


@dataclass(frozen=True, eq=False)
class SegmentTube(ConvexBody):
    """``U = [a, b] + delta * B`` with ``B`` the open Euclidean unit ball.

    ``a`` and ``b`` are the already-shifted endpoints; the origin must lie
    within ``delta`` of the segment.  Use :func:`tube_body` to build one from
    unshifted endpoints.
    """

    a: np.ndarray
    b: np.ndarray
    delta: float
    gauge_tol: float = GAUGE_TOL

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.shape != b.shape or a.ndim != 1:
            raise InvalidInputError("segment endpoints must be points of equal dimension")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidInputError("non-finite segment endpoint")
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise InvalidInputError("tube radius delta must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if self._seg_dist(np.zeros(a.size), 1.0) >= self.delta:
            raise InvalidInputError("origin is not interior to the tube")

    @property
    def dim(self):
        return self.a.size

    def _seg_dist(self, x, t):
        """Distance from ``x`` to the scaled segment ``t [a, b]``."""
        t = np.asarray(t, dtype=float)[..., None]
        start = t * self.a
        d = t * (self.b - self.a)
        dd = np.sum(d * d, axis=-1)
        safe = np.where(dd > 0, dd, 1.0)
        tau = np.where(dd > 0, np.sum((x - start) * d, axis=-1) / safe, 0.0)
        tau = np.clip(tau, 0.0, 1.0)
        return np.linalg.norm(x - start - tau[..., None] * d, axis=-1)

    def _project(self, z):
        d = self.b - self.a
        dd = d @ d
        tau = 0.0 if dd == 0 else np.clip(((z - self.a) @ d) / dd, 0.0, 1.0)
        return self.a + np.asarray(tau)[..., None] * d

    def contains(self, x):
        x = as_points(x, self.dim)
        return self._seg_dist(x, 1.0) < self.delta

    def gauge(self, x):
        # x/t in U  <=>  dist(x, t[a, b]) < t delta, monotone in t
        x = as_points(x, self.dim)
        shape = x.shape[:-1]
        flat = x.reshape(-1, self.dim)
        nrm = np.linalg.norm(flat, axis=-1)
        inner, outer = self.radius_bounds()
        out = np.zeros(flat.shape[0])
        live = nrm > 0
        xs = flat[live]
        lo = nrm[live] / outer * (1 - 1e-12)
        hi = nrm[live] / inner * (1 + 1e-12)
        while xs.size and np.any(hi - lo > self.gauge_tol * hi):
            mid = 0.5 * (lo + hi)
            inside = self._seg_dist(xs, mid) <= mid * self.delta
            hi = np.where(inside, mid, hi)
            lo = np.where(inside, lo, mid)
        mu = 0.5 * (lo + hi)
        # near mu = 1 the bisection may land on the wrong side; the exact
        # membership test at t = 1 decides which
        inside = self._seg_dist(xs, 1.0) < self.delta
        mu = np.where(inside, np.minimum(mu, np.nextafter(1.0, 0.0)),
                      np.maximum(mu, 1.0))
        out[live] = mu
        return out.reshape(shape)

    def subgradient(self, x):
        # normal of the supporting halfspace at x / mu(x), scaled so <g, x> = mu(x)
        x = as_points(x, self.dim)
        mu = self.gauge(x)
        safe = np.where(mu > 0, mu, 1.0)[..., None]
        z = x / safe
        nu = z - self._project(z)
        denom = np.sum(nu * z, axis=-1, keepdims=True)
        denom = np.where(denom > 0, denom, 1.0)
        return np.where(mu[..., None] > 0, nu / denom, 0.0)

    def radius_bounds(self):
        inner = self.delta - float(self._seg_dist(np.zeros(self.dim), 1.0))
        outer = max(np.linalg.norm(self.a), np.linalg.norm(self.b)) + self.delta
        return inner, float(outer)

    def farthest_distance(self, point):
        point = as_points(point, self.dim)
        return float(max(np.linalg.norm(self.a - point),
                         np.linalg.norm(self.b - point)) + self.delta)

    def to_spec(self):
        return {"type": "tube", "p": self.a.tolist(), "q": self.b.tolist(),
                "delta": float(self.delta)}


@dataclass(frozen=True)
class GaugeValue:
    """Gauge ``value`` and ``boundary_proximity = max(1 - value, 0)``."""

    value: float
    boundary_proximity: float


def gauge(body, x):
    """Minkowski functional of ``body`` at ``x`` (scalar or batch)."""
    mu = body.gauge(x)
    prox = np.maximum(1.0 - mu, 0.0)
    if np.ndim(mu) == 0:
        return GaugeValue(float(mu), float(prox))
    return GaugeValue(mu, prox)


def gauge_subgradient(body, x):
    """An element of the Fenchel subdifferential of the gauge at ``x``.

    Returns the zero covector at the origin.
    """
    return body.subgradient(x)


def radius_bounds(body):
    """Euclidean radii ``(delta, s)`` with ``delta B <= U <= s B``.

    The gauge then satisfies ``||x|| / s <= mu(x) <= ||x|| / delta``.
    """
    inner, outer = body.radius_bounds()
    if not (np.isfinite(outer) and inner > 0):
        raise RuntimeError("body is unbounded or has empty interior")
    return inner, outer


def contains(body, x):
    return body.contains(x)


def tube_body(p, q, delta):
    """The tube ``[p, q] + delta B`` translated by ``-p``."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if not delta > 0:
        raise InvalidInputError("tube radius delta must be positive")
    return SegmentTube(np.zeros_like(p), q - p, float(delta))


def body_from_spec(spec, dim=None):
    """Build a body from its JSON description.

    ``{"type": "polytope", "normals": [[...], ...]}``,
    ``{"type": "ball", "r": 1.0, "p": 2}`` or
    ``{"type": "tube", "p": [...], "q": [...], "delta": 0.5}``.
    """
    kind = spec.get("type")
    if kind == "polytope":
        return HalfspacePolytope(np.asarray(spec["normals"], dtype=float))
    if kind == "ball":
        p = spec.get("p", 2)
        p = np.inf if p in ("inf", "Infinity", float("inf")) else int(p)
        n = spec.get("n", dim if dim is not None else 1)
        return NormBall(float(spec["r"]), p, int(n))
    if kind == "tube":
        return tube_body(spec["p"], spec["q"], float(spec["delta"]))
    raise InvalidInputError(f"unknown body type {kind!r}")
