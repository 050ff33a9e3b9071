"""Inner distances on a V, a 256-gon and two disjoint segments."""

import math

import numpy as np

from stratsmooth import fixtures
from stratsmooth.inner import build_net, check_tubes_inner, inner_distance
from stratsmooth.tubes import choose_profiles

V = fixtures.load("v")
G = build_net(V, 0.01)
d = inner_distance(G, [1, 1], [1, -1])
print("V tips:", d, " euclidean:", 2.0, " exact:", 2 * math.sqrt(2))

C = fixtures.load("polygon")
G = build_net(C, 0.01)
d = inner_distance(G, C.points[0], C.points[128])
print("256-gon opposite vertices:", d, " exact:", fixtures.polygon_geodesic(256))

G = build_net(fixtures.load("two_segments"), 0.05)
print("different components:", inner_distance(G, [0.5, 0.0], [0.5, 1.0]))

# inside tubes the inner distance to the foot is close to the euclidean one
rep = check_tubes_inner(V, choose_profiles(V, 0.2), 0.2, h=0.01, samples=1000)
for r in rep["strata"]:
    print(f"{r['stratum']}: delta={r['delta']:.3f} worst ratio={r['worst_ratio']:.4f} "
          f"samples={r['samples']} {r['status']}")

# a needle-thin wedge: points of the upper arm are close to the lower one in R^2
# but far from it inside the set
H = fixtures.load("hairpin")
G = build_net(H, 0.01)
x = np.array([1.0, 0.05])
print("hairpin tip gap:", np.linalg.norm(x - [1.0, 0.0]), " inner:", inner_distance(G, x, [1.0, 0.0]))
