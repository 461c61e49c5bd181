"""
Certifying convexity
====================

A function whose sampled subdifferential is monotone and which agrees with
the max of its sampled affine minorants is reported as convex.  A
non-monotone pair is a concrete witness of nonconvexity.
"""

# %%
import gaugecert as gc

for name in ("quadratic", "abs", "max_affine", "neg_abs", "cube", "step"):
    rep = gc.certify_convexity(gc.make_function(name), resolution=201)
    print(f"{name:11s} {rep.verdict:20s} pairs={rep.graph_size:5d} "
          f"worst={rep.monotonicity.worst_value:+.3f}")

# %%
# The witness for -|x|: two points on either side of the kink whose
# slopes point the wrong way.
rep = gc.certify_convexity(gc.make_function("neg_abs"), resolution=201)
(x1, s1), (x2, s2) = rep.monotonicity.worst_pair
print(x1, s1, x2, s2)

# %%
# The Minty test asks whether one extra pair is monotonically related to
# the sampled graph; a yes predicts Fenchel membership.
absf = gc.make_function("abs")
graph = gc.sample_graph(absf, 201)
for slope in (0.5, 1.0, 1.5):
    print(slope, bool(gc.minty_test(graph, 0.0, slope)),
          bool(gc.fenchel_membership(absf, 0.0, slope)))

# %%
# Custom functions come in through a tiny expression language.
f = gc.parse_expression("max(abs(x) - 0.5, x^2)")
print(gc.certify_convexity(f, resolution=201).verdict)
