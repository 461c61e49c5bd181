"""
The gauge barrier
=================

k = mu / (1 - mu) vanishes at the origin, is convex on U and blows up at
its boundary.  Outside U it takes the value +inf.
"""

# %%
import numpy as np

import gaugecert as gc

body = gc.tube_body([0, 0], [1, 0], 0.5)
bar = gc.Barrier(body, scale=1.0)

ray = np.array([1.0, 0.4])
ray /= body.gauge(ray)           # mu(ray) = 1: ray hits the boundary
for t in (0.0, 0.5, 0.9, 0.99, 0.999, 1.0):
    print(f"t={t:<6} k={gc.barrier_eval(bar, t * ray):.4g}")

# %%
# Lipschitz constants on sublevel sets grow with the level.
for level in (0.1, 1.0, 10.0):
    print(level, gc.level_lipschitz(bar, level))

# %%
# Convexity rests on a scalar inequality for reciprocals; its slack has a
# closed form.
rng = np.random.default_rng(1)
a, b, lam = rng.uniform(size=(3, 5))
direct, closed = gc.reciprocal_convexity_slack(a, b, lam)
print(np.c_[direct, closed])

# %%
# A chain-rule subgradient of the barrier.
print(gc.barrier_subgradient(bar, 0.5 * ray))
