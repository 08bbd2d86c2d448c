"""
Projections onto p-norm spheres and balls
=========================================

Every response in the training loop is pushed onto a small norm set.
Here we look at what each of the six projections does to one vector.
"""

import numpy as np

from incoherent_subspaces.prox import project

h = np.array([0.9, -0.3, 0.05, 0.0])
radius = 1.0

# h sits outside the l1 ball but inside the l2 and linf balls,
# so only the spheres move it in those two cases
for p in (1.0, 2.0, np.inf):
    for mode in ("inequality", "equality"):
        g = project(h, p, mode, radius)
        print(f"p={p:<4} {mode:<10} -> {np.round(g, 4)}  norm={np.linalg.norm(g, p):.4f}")

# a point already inside the ball is left alone
small = 0.1 * h
print("inside the l2 ball, unchanged:", np.allclose(project(small, 2, "inequality", radius), small))

# zero input has no direction, so the spheres fall back to a fixed point
print("l2 sphere of zero:", project(np.zeros(3), 2, "equality", 1.0))
print("l1 sphere of zero:", project(np.zeros(3), 1, "equality", 1.0))
