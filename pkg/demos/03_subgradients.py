"""
Sampled subdifferentials
========================

Tilted proximal steps on a grid give pairs (p, x*) with x* a proximal
subgradient of f at p.  Sweeping base points, step sizes and tilts produces
a finite picture of the graph of the subdifferential.
"""

# %%
import numpy as np

import gaugecert as gc

quad = gc.make_function("quadratic")
p, xstar = gc.proximal_subgradient(quad, 1.0, lam=0.01)
print(p, xstar, "closed form", 1 / 1.02, 2 / 1.02)

# %%
# At the kink of |x| the tilts recover the whole interval [-1, 1].
absf = gc.make_function("abs")
graph = gc.sample_graph(absf, resolution=201, tilts=np.linspace(-0.9, 0.9, 7))
at_zero = np.abs(graph.x[:, 0]) < 1e-9
print(np.unique(np.round(graph.xstar[at_zero, 0], 6)))

# %%
# -|x| has no proximal subgradient at 0: the prox step always jumps away.
neg = gc.make_function("neg_abs")
print(gc.proximal_subgradient(neg, 0.0, lam=0.01))

# %%
# Fenchel membership on a grid, and the shift check for f + <v, .>.
print(bool(gc.fenchel_membership(absf, 0.0, 0.5)),
      bool(gc.fenchel_membership(absf, 0.0, 1.5)))
print(gc.check_stability(absf, 0.3, resolution=101))
