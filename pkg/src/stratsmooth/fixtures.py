"""Small stratified complexes used by the tests, demos and the CLI.

Each ``*_doc`` function returns a JSON-ready document; ``load(name)`` builds
the complex.
"""

import math

from .stratified import load_complex


def _doc(n, points, simplices, strata):
    return {
        "ambient_dim": n,
        "points": [list(map(float, p)) for p in points],
        "simplices": [{"vertices": list(s)} for s in simplices],
        "strata": [{"id": i, "dim": d, "simplices": list(m)} for i, d, m in strata],
    }


def segment_doc():
    """[-1, 1] on the x-axis of R^2: two endpoints and the open segment."""
    return _doc(2, [[-1, 0], [1, 0]], [[0], [1], [0, 1]],
                [("v-", 0, [0]), ("v+", 0, [1]), ("e", 1, [2])])


def v_doc():
    """Two segments from the origin to (1, 1) and (1, -1)."""
    return _doc(2, [[0, 0], [1, 1], [1, -1]],
                [[0], [1], [2], [0, 1], [0, 2]],
                [("apex", 0, [0]), ("e1", 0, [1]), ("e2", 0, [2]),
                 ("arm1", 1, [3]), ("arm2", 1, [4])])


def square_doc():
    """Boundary of the unit square: four corners and four open edges."""
    pts = [[0, 0], [1, 0], [1, 1], [0, 1]]
    simplices = [[0], [1], [2], [3], [0, 1], [1, 2], [2, 3], [3, 0]]
    strata = [(f"c{i}", 0, [i]) for i in range(4)] + [(f"s{i}", 1, [4 + i]) for i in range(4)]
    return _doc(2, pts, simplices, strata)


def polygon_doc(m=256, radius=1.0):
    """Regular m-gon boundary, one stratum per vertex and per edge."""
    pts = [[radius * math.cos(2 * math.pi * i / m), radius * math.sin(2 * math.pi * i / m)]
           for i in range(m)]
    simplices = [[i] for i in range(m)] + [[i, (i + 1) % m] for i in range(m)]
    strata = [(f"p{i}", 0, [i]) for i in range(m)] + [(f"q{i}", 1, [m + i]) for i in range(m)]
    return _doc(2, pts, simplices, strata)


def polygon_geodesic(m=256, radius=1.0):
    """Inner distance between opposite vertices of the regular m-gon (m even)."""
    return (m // 2) * 2.0 * radius * math.sin(math.pi / m)


def two_segments_doc():
    """Two disjoint segments in R^2 (two components)."""
    return _doc(2, [[0, 0], [1, 0], [0, 1], [1, 1]],
                [[0], [1], [2], [3], [0, 1], [2, 3]],
                [("a0", 0, [0]), ("a1", 0, [1]), ("b0", 0, [2]), ("b1", 0, [3]),
                 ("a", 1, [4]), ("b", 1, [5])])


def abs_doc():
    """[-1, 1] in R^1 with the kink point 0 as its own stratum."""
    return _doc(1, [[-1], [0], [1]], [[0], [1], [2], [0, 1], [1, 2]],
                [("m", 0, [0]), ("o", 0, [1]), ("p", 0, [2]),
                 ("neg", 1, [3]), ("pos", 1, [4])])


def hairpin_doc(gap=0.05):
    """Two segments meeting at the origin at a very acute angle."""
    return _doc(2, [[0, 0], [1, 0], [1, gap]],
                [[0], [1], [2], [0, 1], [0, 2]],
                [("o", 0, [0]), ("a", 0, [1]), ("b", 0, [2]),
                 ("lower", 1, [3]), ("upper", 1, [4])])


def triangle_doc():
    """A closed 2-simplex in R^2 with all its faces as strata."""
    return _doc(2, [[0, 0], [1, 0], [0, 1]],
                [[0], [1], [2], [0, 1], [1, 2], [0, 2], [0, 1, 2]],
                [("v0", 0, [0]), ("v1", 0, [1]), ("v2", 0, [2]),
                 ("e01", 1, [3]), ("e12", 1, [4]), ("e02", 1, [5]), ("t", 2, [6])])


def filled_square_doc():
    """The closed unit square split into two triangles forming one open 2-stratum."""
    pts = [[0, 0], [1, 0], [1, 1], [0, 1]]
    simplices = [[0], [1], [2], [3], [0, 1], [1, 2], [2, 3], [3, 0], [0, 1, 2], [0, 2, 3]]
    strata = ([(f"c{i}", 0, [i]) for i in range(4)]
              + [(f"s{i}", 1, [4 + i]) for i in range(4)] + [("inside", 2, [8, 9])])
    return _doc(2, pts, simplices, strata)


def line_doc():
    """[-2, 2] in R^1 with marked points -1 and 1."""
    return _doc(1, [[-2], [-1], [1], [2]],
                [[0], [1], [2], [3], [0, 1], [1, 2], [2, 3]],
                [("l", 0, [0]), ("a", 0, [1]), ("b", 0, [2]), ("r", 0, [3]),
                 ("s0", 1, [4]), ("s1", 1, [5]), ("s2", 1, [6])])


def overlapping_doc():
    """Collinear segments sharing interior points; the loader must reject it."""
    return _doc(2, [[0, 0], [2, 0], [1, 0], [3, 0]], [[0, 1], [2, 3]],
                [("a", 1, [0]), ("b", 1, [1])])


DOCUMENTS = {
    "segment": segment_doc,
    "v": v_doc,
    "square": square_doc,
    "polygon": polygon_doc,
    "two_segments": two_segments_doc,
    "abs": abs_doc,
    "hairpin": hairpin_doc,
    "triangle": triangle_doc,
    "line": line_doc,
    "filled_square": filled_square_doc,
}

# fixtures on which automatic profile selection succeeds
SMOOTHABLE = ("segment", "v", "square", "polygon", "two_segments", "abs", "line", "filled_square")
# acute corners: constant profiles cannot separate the incident strata on A
UNSMOOTHABLE = ("hairpin", "triangle")


def load(name):
    return load_complex(DOCUMENTS[name]())
