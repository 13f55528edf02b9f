# coding: utf-8

# # The twistor space of a 3-dimensional space form
#
# Fit the Ricci form of the twistor metric h_t against h_t and eta^2 and see
# where the fit becomes exact.

import numpy as np

from twistor_eta import eta_einstein as ee

nu = 1.0

# At t = 1/(2 nu) the fit is exact with a = 3nu/2, b = -nu/2.

report = ee.verify_theorem(nu, 0.5 / nu, n=3, seed=0)
print("a, b     :", report["fit"]["a"], report["fit"]["b"])
print("residual :", report["fit"]["residual"])
print("verdict  :", report["verdict_ok"])

# Any other t leaves a residual, and the best fit comes back with a witness sample.

off = ee.verify_theorem(nu, 1.0, n=3, seed=0)
print("t = 1 residual:", off["fit"]["residual"])
print("worst sample  :", off["counterexample"]["c_t"], "vs h_t =", off["counterexample"]["h_t"])

# A scan over t picks out the same value.

grid = np.linspace(1 / 50, 1, 50) / nu
scan = ee.scan_t(nu, 3, grid, seed=0)
print("argmin t:", scan["argmin_t"], " floor away from it:", scan["floor_away_from_theorem"])
for row in scan["rows"][::10]:
    print("  t=%.3f  residual=%.3e" % (row["t"], row["residual"]))
