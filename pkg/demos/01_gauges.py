"""
Gauges of convex bodies
=======================

A bounded convex body U around the origin is described completely by its
gauge mu(x) = inf {t > 0 : x in tU}.  Three kinds of body are available.
"""

# %%
import numpy as np

import gaugecert as gc

ball = gc.NormBall(r=1.0, p=2, n=2)
interval = gc.HalfspacePolytope([[0.5], [-1.0]])   # U = (-1, 2)
tube = gc.tube_body([0, 0], [1, 0], 0.5)            # stadium around [0, e1]

print(gc.gauge(ball, [0.6, 0.8]))
print(gc.gauge(interval, 1.0).value, gc.gauge(interval, -0.5).value)

# %%
# The gauge is sandwiched between two multiples of the norm.  The constants
# come from the inner and outer radii.
for name, body in [("ball", ball), ("interval", interval), ("tube", tube)]:
    inner, outer = gc.radius_bounds(body)
    print(f"{name:9s} inner {inner:.3f}  outer {outer:.3f}")

# %%
# Sublinearity on a batch of random points; the tube gauge is found by
# bisection, yet the defects sit at round-off level.
rng = np.random.default_rng(0)
x, y = rng.normal(size=(2, 10_000, 2))
mu = tube.gauge
print("subadditivity defect", np.max(mu(x + y) - mu(x) - mu(y)))
print("homogeneity defect  ", np.max(np.abs(mu(3.7 * x) - 3.7 * mu(x))))

# %%
# A subgradient of the gauge supports it globally.
g = gc.gauge_subgradient(tube, [1.2, 0.3])
print("subgradient", g, "support defect",
      np.max((x - [1.2, 0.3]) @ g - (mu(x) - tube.gauge([1.2, 0.3]))))
