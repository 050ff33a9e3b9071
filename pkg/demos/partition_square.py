"""A C^1 partition of unity on the boundary of the unit square."""

import numpy as np

from stratsmooth import fixtures
from stratsmooth.partition import build_partition, eval_all, verify_partition
from stratsmooth.tubes import choose_profiles

C = fixtures.load("square")
mu = 0.25

profiles = choose_profiles(C, mu)
for sid, info in profiles.certificate["strata"].items():
    print(f"{sid}: delta={info['delta']:.4f} halvings={info['halvings']}")

P = build_partition(C, profiles, mu)

# walk along the bottom edge from corner c0 to corner c1
X = np.column_stack([np.linspace(0, 1, 11), np.zeros(11)])
values, grads = eval_all(P, X)
ids = [S.id for S in C.strata]
for x, row in zip(X[:, 0], values):
    live = {i: round(float(v), 4) for i, v in zip(ids, row) if v}
    print(f"x={x:.1f}  sum={row.sum():.12f}  {live}")

rep = verify_partition(P, samples=10_000)
print("sum error:", rep["sum_err"], " r*:", rep["r_star"], " kappa:", rep["kappa"])

# dividing mu by kappa turns the measured bound into |grad phi_S| <= mu / d(x, S)
Pr = build_partition(C, choose_profiles(C, mu / C.kappa), mu, renormalize=True)
rep = verify_partition(Pr, samples=10_000)
print("renormalized: literal ratio", rep["literal_ratio"], "holds:", rep["literal_bound_holds"])
