"""Smooth f(t) = |t| on [-1, 1] and look at the result near the kink."""

import numpy as np

from stratsmooth import fixtures
from stratsmooth.maps import PLMap
from stratsmooth.smoothing import eval_smoothed, plateau_check, smooth, verify_smoothing

C = fixtures.load("abs")
f = PLMap(C, np.abs(C.points[:, 0]))

# mu bounds the extra slope, epsilon the pointwise error
g = smooth(f, mu=0.1, epsilon=0.05)
print("profiles:", g.partition.profiles.as_dict())

t = np.linspace(-0.12, 0.12, 9)[:, None]
ev = eval_smoothed(g, t)
for x, fx, gx, dg in zip(t[:, 0], f.value(t)[:, 0], ev["value"][:, 0], ev["norm"]):
    print(f"t={x:+.3f}  f={fx:.4f}  g={gx:.4f}  |dg|={dg:.4f}")

rep = verify_smoothing(g, samples=10_000)
print("max |f - g|:", rep["approx_max_err"])
print("sup |dg|:", rep["max_dg"], " measured C:", rep["C_measured"])

# the apex member is constant on its plateau, so g is flat at t = 0
pc = plateau_check(g, "o")
print("plateau radius/2:", pc["t"], " one-sided differentials:", pc["differentials"])
