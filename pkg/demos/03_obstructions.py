# coding: utf-8

# # Why nothing similar happens for n >= 5
#
# Compare how the curvature operator acts on the two kinds of vertical vectors.
# An eta-Einstein metric would force the squared norms to agree.

import numpy as np

from twistor_eta import eta_einstein as ee
from twistor_eta import linalg

for n in (5, 7):
    print("n=%d  ratio |R(Q1)|^2/|R(Q2)|^2 = %.6f" % (n, ee.ratio_witness(1.0, n)))

# The fit residual stays bounded away from zero for every t in the grid.

for n in (5, 7):
    scan = ee.scan_t(1.0, n, np.linspace(0.05, 1.5, 30), seed=0, points=4, per_point=48)
    print("n=%d  min residual over t = %.3e at t = %.3f" % (n, scan["min_residual"], scan["argmin_t"]))

# The individual identities for the unit 5-sphere, read in an orthonormal frame.

n = 5
op = np.eye(linalg.bivector_dim(n))
rep = ee.obstruction_residuals(op, np.eye(n), np.ones(n), 0.5)
print(rep)
