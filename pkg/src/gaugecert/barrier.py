"""The gauge barrier ``k = mu / (1 - mu)`` and its affine-tilted variant.

``k`` is finite and convex on the open body ``U``, vanishes at the origin and
blows up at the boundary.  Outside ``U`` it is extended by ``+inf``, which
keeps it lower semicontinuous.
"""

from dataclasses import dataclass

import numpy as np

from .bodies import as_points
from .errors import InvalidInputError, OutOfDomainError

__all__ = ["Barrier", "BarrierFunction", "barrier_eval", "barrier_subgradient",
           "level_lipschitz", "reciprocal_convexity_slack"]

# below this distance to the boundary the barrier is reported as +inf
BOUNDARY_EPS = 1e-14


@dataclass(frozen=True, eq=False)
class Barrier:
    """``scale * k`` over ``body``."""

    body: object
    scale: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise InvalidInputError("barrier scale must be positive")

    @property
    def dim(self):
        return self.body.dim

    def __call__(self, x):
        return barrier_eval(self, x)


def barrier_eval(bar, x):
    """Extended-value barrier: ``a mu/(1 - mu)`` inside ``U``, ``+inf`` outside."""
    mu = np.asarray(bar.body.gauge(x))
    gap = 1.0 - mu
    inside = gap >= BOUNDARY_EPS
    safe = np.where(inside, gap, 1.0)
    out = np.where(inside, bar.scale * mu / safe, np.inf)
    return float(out) if out.ndim == 0 else out


def barrier_subgradient(bar, x):
    """Chain rule ``a (1 - mu)^-2 g`` with ``g`` a gauge subgradient.

    Raises
    ------
    OutOfDomainError
        If some point has ``mu(x) >= 1``.
    """
    mu = np.asarray(bar.body.gauge(x))
    if np.any(1.0 - mu < BOUNDARY_EPS):
        raise OutOfDomainError("barrier subgradient requested outside the body")
    g = bar.body.subgradient(x)
    return bar.scale * g / ((1.0 - mu) ** 2)[..., None]


def level_lipschitz(bar, level):
    """Lipschitz constant of ``a k`` on ``{a k <= level}``.

    On that set ``mu <= t/(1+t)`` with ``t = level/a``, where the outer map
    ``s -> s/(1-s)`` has slope at most ``(1+t)^2``; the gauge itself is
    ``1/delta``-Lipschitz.
    """
    if not level > 0:
        raise InvalidInputError("level must be positive")
    inner, _ = bar.body.radius_bounds()
    t = level / bar.scale
    return bar.scale * (1.0 / inner) * (1.0 + t) ** 2


def reciprocal_convexity_slack(alpha, beta, lam):
    """``lam/alpha + (1-lam)/beta - 1/(lam alpha + (1-lam) beta)``.

    Non-negative for ``alpha, beta > 0`` and ``lam`` in ``[0, 1]``; it is
    what makes ``1/(1 - mu)`` convex.  Returned together with the closed
    form ``lam (1-lam) (alpha-beta)^2 / (alpha beta (lam alpha + (1-lam) beta))``.
    """
    alpha, beta, lam = (np.asarray(v, dtype=float) for v in (alpha, beta, lam))
    mix = lam * alpha + (1 - lam) * beta
    direct = lam / alpha + (1 - lam) / beta - 1.0 / mix
    closed = lam * (1 - lam) * (alpha - beta) ** 2 / (alpha * beta * mix)
    return direct, closed


@dataclass(frozen=True, eq=False)
class BarrierFunction:
    """``x -> a k(x - center) - <linear, x - center>`` on ``center + U``.

    This is the convex, continuous, bounded-below barrier that gets paired
    with ``f`` in the sequence construction; ``linear`` is the optional tilt
    used when testing a candidate pair ``(center, linear)``.
    """

    barrier: Barrier
    center: np.ndarray = None
    linear: np.ndarray = None

    def __post_init__(self):
        n = self.barrier.dim
        c = np.zeros(n) if self.center is None else as_points(self.center, n)
        v = np.zeros(n) if self.linear is None else as_points(self.linear, n)
        object.__setattr__(self, "center", np.array(c, dtype=float).reshape(n))
        object.__setattr__(self, "linear", np.array(v, dtype=float).reshape(n))

    @property
    def dim(self):
        return self.barrier.dim

    @property
    def body(self):
        return self.barrier.body

    def contains(self, x):
        x = as_points(x, self.dim)
        return self.body.contains(x - self.center)

    def __call__(self, x):
        x = as_points(x, self.dim)
        shifted = x - self.center
        return barrier_eval(self.barrier, shifted) - shifted @ self.linear

    def subgradient(self, x):
        x = as_points(x, self.dim)
        return barrier_subgradient(self.barrier, x - self.center) - self.linear
