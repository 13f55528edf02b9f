# coding: utf-8

# # Fibers and the curvature engine

import numpy as np

from twistor_eta import contact_structures as cs
from twistor_eta import geometry_engine as ge

# Dimension of the fiber tangent space against the structure rank.

for n in (3, 5, 7):
    sigma = cs.random_structure(n, seed=n)
    k = sigma.k
    print("n=%d k=%d  tangent dim %d  expected %d  scalar curvature %g"
          % (n, k, cs.tangent_dimension(sigma.phi), cs.fk_dimension(n, k), cs.fiber_scalar_curvature(n, k)))

# Numerical scalar curvature of the fiber at its base point.

chart = cs.fiber_chart(3)
data = ge.curvature(chart, np.zeros(chart.dim))
print("fiber n=3, numerical scalar curvature:", data.scalar)

# The unit sphere in a conformal chart: the curvature operator is the identity.

sphere = ge.space_form_chart(1.0, 3)
data = ge.curvature(sphere, np.array([0.1, -0.2, 0.3]))
print("|R - Id| =", np.abs(data.operator - np.eye(3)).max())
print("Ricci =\n", np.round(data.ricci, 8))

# A perturbed metric is no longer locally symmetric.

bump = ge.perturbed_space_form_chart(1.0, 3, seed=0)
data = ge.curvature(bump, np.zeros(3), with_nabla=True)
print("max |nabla R| on the perturbed chart:", np.abs(data.nabla).max())
