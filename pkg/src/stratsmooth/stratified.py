"""Stratified simplicial complexes in R^n.

A complex is a finite list of affine simplices; strata are unions of open
simplices. The loader validates the invariants a stratification has to satisfy
(disjointness, nondegeneracy, manifold strata, frontier condition) and
computes the frontier relation. Boundary strata may be omitted, which realizes
locally closed sets: faces that belong to no stratum are simply not part of A.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import cKDTree

from . import geometry
from .config import DEFAULT
from .errors import (
    DegenerateSimplexError,
    DisjointnessError,
    FrontierError,
    InputError,
    SchemaError,
    StratumShapeError,
)
from .subspace import Subspace, angle, orthonormalize


@dataclass(frozen=True, eq=False)
class Stratum:
    id: str
    index: int
    dim: int
    members: tuple          # top-dimensional simplex indices
    cells: frozenset        # every simplex index whose open interior lies in the stratum
    closure: frozenset      # simplex indices of the closure
    tangents: tuple         # Subspace per member simplex
    bases: tuple            # base point per member simplex

    @property
    def tangent(self):
        return self.tangents[0]

    def __repr__(self):
        return f"Stratum({self.id!r}, dim={self.dim}, members={len(self.members)})"


@dataclass(eq=False)
class StratifiedComplex:
    ambient_dim: int
    points: np.ndarray
    simplices: list
    strata: list
    frontier: frozenset
    simplex_stratum: np.ndarray = field(repr=False)
    maximal: list = field(repr=False)

    def __post_init__(self):
        self._by_id = {s.id: s for s in self.strata}
        self._simplex_index = {s: i for i, s in enumerate(self.simplices)}
        self._vertex_sets = [frozenset(s) for s in self.simplices]
        self._maximal_tree = None

    # -- lookups -----------------------------------------------------------
    def stratum(self, key):
        if isinstance(key, Stratum):
            return key
        if isinstance(key, (int, np.integer)):
            return self.strata[int(key)]
        try:
            return self._by_id[key]
        except KeyError:
            raise InputError(f"unknown stratum id {key!r}") from None

    def maximal_spheres(self):
        """Cached (ids, centers, radii, cKDTree) of the maximal simplices of A."""
        if self._maximal_tree is None:
            ids = np.array([t for t in self.maximal if self.simplex_stratum[t] >= 0], dtype=int)
            centers = np.array([self.vertices_of(t).mean(axis=0) for t in ids]).reshape(
                -1, self.ambient_dim)
            radii = np.array([np.linalg.norm(self.vertices_of(t) - c, axis=1).max()
                              for t, c in zip(ids, centers)])
            self._maximal_tree = (ids, centers, radii, cKDTree(centers) if ids.size else None)
        return self._maximal_tree

    def maximal_near(self, X, reach):
        """For each maximal simplex, the rows of X within ``reach`` of its sphere."""
        ids, centers, radii, tree = self.maximal_spheres()
        X = np.atleast_2d(X)
        out = {}
        if tree is None or X.shape[0] == 0:
            return out
        rmax = float(radii.max())
        hits = tree.query_ball_point(X, rmax + reach)
        for r, cand in enumerate(hits):
            for j in cand:
                if np.linalg.norm(X[r] - centers[j]) <= radii[j] + reach:
                    out.setdefault(int(ids[j]), []).append(r)
        return {k: np.array(v, dtype=int) for k, v in sorted(out.items())}

    def simplex_index(self, vertices):
        return self._simplex_index.get(tuple(sorted(vertices)))

    def vertices_of(self, simplex):
        return self.points[list(self.simplices[simplex])]

    @property
    def dim(self):
        return max(s.dim for s in self.strata)

    @property
    def kappa(self):
        return len(self.strata)

    def diameter(self):
        used = sorted({v for s in self.simplices for v in s})
        return geometry.diameter(self.points[used])

    def in_closure(self, lower, upper):
        """True when stratum ``lower`` lies in the closure of ``upper``."""
        lower, upper = self.stratum(lower), self.stratum(upper)
        return lower.index != upper.index and lower.members[0] in upper.closure

    def comparable(self, a, b):
        a, b = self.stratum(a), self.stratum(b)
        return a.index == b.index or self.in_closure(a, b) or self.in_closure(b, a)

    def closures_touch(self, a, b):
        a, b = self.stratum(a), self.stratum(b)
        va = {v for i in a.closure for v in self.simplices[i]}
        vb = {v for i in b.closure for v in self.simplices[i]}
        return bool(va & vb)

    def frontier_of(self, S):
        """Strata lying in the closure of S (other than S)."""
        S = self.stratum(S)
        return [Y for Y in self.strata if self.in_closure(Y, S)]

    def closure_distance(self, a, b):
        a, b = self.stratum(a), self.stratum(b)
        best = math.inf
        for i in a.members:
            for j in b.members:
                best = min(best, geometry.simplex_distance(self.vertices_of(i), self.vertices_of(j)))
        return best

    def to_document(self):
        cells_listed = sorted({i for s in self.strata for i in s.members})
        remap = {old: new for new, old in enumerate(cells_listed)}
        return {
            "ambient_dim": self.ambient_dim,
            "points": self.points.tolist(),
            "simplices": [{"vertices": list(self.simplices[i])} for i in cells_listed],
            "strata": [
                {"id": s.id, "dim": s.dim, "simplices": [remap[i] for i in s.members]}
                for s in self.strata
            ],
            "frontier": sorted([list(p) for p in self.frontier]),
        }


# -- loading -----------------------------------------------------------------

def _reject_constant(name):
    raise SchemaError(f"non-finite number {name} is not accepted")


def load_complex_file(path):
    with open(path) as fh:
        doc = json.load(fh, parse_constant=_reject_constant)
    return load_complex(doc)


def _require(doc, key, kind):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"field {key!r} has the wrong type")
    return value


def _parse_points(doc, n):
    raw = _require(doc, "points", list)
    pts = []
    for i, p in enumerate(raw):
        if not isinstance(p, list) or len(p) != n:
            raise SchemaError(f"point {i} must be a list of {n} numbers", location={"point": i})
        for c in p:
            if isinstance(c, bool) or not isinstance(c, (int, float)) or not math.isfinite(c):
                raise SchemaError(f"point {i} has a non-finite or non-numeric coordinate",
                                  location={"point": i})
        pts.append([float(c) for c in p])
    return np.array(pts, dtype=float).reshape(-1, n)


def load_complex(document, tol=DEFAULT):
    """Validate a JSON-style document and build a StratifiedComplex."""
    n = _require(document, "ambient_dim", int)
    if n < 1:
        raise SchemaError("ambient_dim must be positive")
    points = _parse_points(document, n)
    raw_simplices = _require(document, "simplices", list)
    raw_strata = _require(document, "strata", list)

    simplices = []
    seen = {}
    for i, entry in enumerate(raw_simplices):
        verts = _require(entry, "vertices", list)
        if not verts or any(isinstance(v, bool) or not isinstance(v, int) for v in verts):
            raise SchemaError(f"simplex {i} must list integer vertex indices", location={"simplex": i})
        if any(v < 0 or v >= len(points) for v in verts):
            raise SchemaError(f"simplex {i} references a missing point", location={"simplex": i})
        key = tuple(sorted(verts))
        if len(set(key)) != len(key):
            raise DegenerateSimplexError(f"simplex {i} repeats a vertex", location={"simplex": i})
        if len(key) - 1 > n:
            raise DegenerateSimplexError(f"simplex {i} has too many vertices for R^{n}",
                                         location={"simplex": i})
        if key in seen:
            raise DisjointnessError(f"simplices {seen[key]} and {i} coincide",
                                    location={"simplices": [seen[key], i]})
        seen[key] = i
        h = geometry.min_height(points[list(key)])
        if h <= tol.degenerate_height:
            raise DegenerateSimplexError(
                f"simplex {i} is degenerate (minimum height {h:.3e})", location={"simplex": i})
        simplices.append(key)
    n_listed = len(simplices)

    # close the complex under taking faces
    index = {s: i for i, s in enumerate(simplices)}
    for s in list(simplices):
        for f in geometry.faces(s):
            if f not in index:
                index[f] = len(simplices)
                simplices.append(f)

    _check_geometric_disjointness(points, simplices)

    assign = np.full(len(simplices), -1, dtype=int)
    parsed = []
    ids = set()
    for k, entry in enumerate(raw_strata):
        sid = _require(entry, "id", str)
        sdim = _require(entry, "dim", int)
        members = _require(entry, "simplices", list)
        if sid in ids:
            raise SchemaError(f"duplicate stratum id {sid!r}", location={"stratum": sid})
        ids.add(sid)
        if not members:
            raise SchemaError(f"stratum {sid!r} lists no simplices", location={"stratum": sid})
        for m in members:
            if isinstance(m, bool) or not isinstance(m, int) or not 0 <= m < n_listed:
                raise SchemaError(f"stratum {sid!r} references an unknown simplex",
                                  location={"stratum": sid})
            if len(simplices[m]) - 1 != sdim:
                raise StratumShapeError(
                    f"stratum {sid!r} declares dim {sdim} but simplex {m} has dim {len(simplices[m]) - 1}",
                    location={"stratum": sid, "simplex": m})
            if assign[m] >= 0:
                other = raw_strata[assign[m]]["id"]
                raise DisjointnessError(
                    f"simplex {m} is assigned to strata {other!r} and {sid!r}",
                    location={"strata": [other, sid], "simplex": m})
            assign[m] = k
        parsed.append((sid, sdim, tuple(sorted(set(members)))))

    cofaces = [[] for _ in simplices]
    for i, s in enumerate(simplices):
        for f in geometry.faces(s):
            j = index[f]
            if j != i:
                cofaces[j].append(i)

    # absorb unassigned interior faces of multi-simplex strata
    order = sorted(range(len(simplices)), key=lambda i: -len(simplices[i]))
    for i in order:
        if assign[i] >= 0 or not cofaces[i]:
            continue
        owners = {assign[c] for c in cofaces[i]}
        if len(owners) != 1 or -1 in owners:
            continue
        k = owners.pop()
        sdim = parsed[k][1]
        if sdim <= len(simplices[i]) - 1:
            continue
        tops = [c for c in cofaces[i] if len(simplices[c]) - 1 == sdim]
        if len(tops) >= 2:
            assign[i] = k

    strata = []
    for k, (sid, sdim, members) in enumerate(parsed):
        cells = frozenset(int(i) for i in np.flatnonzero(assign == k))
        closure = frozenset(index[f] for m in members for f in geometry.faces(simplices[m]))
        tangents, bases = [], []
        for m in members:
            V = points[list(simplices[m])]
            tangents.append(orthonormalize(list(V[1:] - V[0]), n))
            bases.append(V[0].copy())
        strata.append(Stratum(sid, k, sdim, members, cells, closure, tuple(tangents), tuple(bases)))
        _check_manifold(strata[-1], simplices, cofaces, assign, k, tol)

    _check_frontier_condition(strata)
    frontier = frozenset(
        (Y.id, S.id) for Y in strata for S in strata
        if S.index != Y.index and S.members[0] in Y.closure
    )
    if "frontier" in document:
        declared = document["frontier"]
        if not isinstance(declared, list) or any(
                not isinstance(p, list) or len(p) != 2 or not all(isinstance(q, str) for q in p)
                for p in declared):
            raise SchemaError("frontier must be a list of [Y_id, S_id] pairs")
        declared = {tuple(p) for p in declared}
        unknown = {q for p in declared for q in p} - ids
        if unknown:
            raise SchemaError(f"frontier references unknown strata {sorted(unknown)}")
        if declared != frontier:
            raise FrontierError(
                "declared frontier relation does not match the complex",
                location={"missing": sorted(map(list, frontier - declared)),
                          "extra": sorted(map(list, declared - frontier))})

    maximal = [i for i in range(len(simplices)) if not cofaces[i]]
    return StratifiedComplex(n, points, simplices, strata, frontier, assign, maximal)


def _check_manifold(S, simplices, cofaces, assign, k, tol):
    if len(S.members) == 1:
        return
    members = set(S.members)
    for i in S.cells:
        if len(simplices[i]) - 1 != S.dim - 1:
            continue
        tops = [c for c in cofaces[i] if c in members]
        if len(tops) != 2:
            raise StratumShapeError(
                f"stratum {S.id!r} is not a manifold: ridge {i} lies on {len(tops)} member simplices",
                location={"stratum": S.id, "simplex": i})
        a, b = (S.members.index(t) for t in tops)
        gap = max(angle(S.tangents[a], S.tangents[b]), angle(S.tangents[b], S.tangents[a]))
        if gap > tol.tangent_match:
            raise StratumShapeError(
                f"stratum {S.id!r} bends across ridge {i} (tangent angle {gap:.3e})",
                location={"stratum": S.id, "simplex": i})


def _check_frontier_condition(strata):
    for S in strata:
        for Y in strata:
            if Y.index == S.index:
                continue
            hit = Y.cells & S.closure
            if hit and hit != Y.cells:
                raise FrontierError(
                    f"closure of {S.id!r} meets {Y.id!r} without containing it",
                    location={"strata": [S.id, Y.id]})


def _check_geometric_disjointness(points, simplices):
    """Every pair of closed simplices must meet in a common face (or not at all)."""
    sets = [frozenset(s) for s in simplices]
    maximal = [i for i, s in enumerate(sets) if not any(s < t for t in sets)]
    lo = np.array([points[list(simplices[i])].min(0) for i in maximal])
    hi = np.array([points[list(simplices[i])].max(0) for i in maximal])
    eps = 1e-9
    for a_pos, a in enumerate(maximal):
        overlap = np.all((lo[a_pos + 1:] <= hi[a_pos] + eps) & (hi[a_pos + 1:] >= lo[a_pos] - eps), axis=1)
        for b_off in np.flatnonzero(overlap):
            b = maximal[a_pos + 1 + b_off]
            if _improper(points, simplices[a], simplices[b]):
                raise DisjointnessError(
                    f"simplices {a} and {b} share points outside a common face",
                    location={"simplices": [int(a), int(b)]})


def _improper(points, sa, sb):
    shared = set(sa) & set(sb)
    V, W = points[list(sa)], points[list(sb)]
    if not shared:
        return geometry.simplex_distance(V, W) < 1e-9
    if len(sa) == 2 and len(sb) == 2:
        c = points[shared.pop()]
        a = points[[v for v in sa if v not in (sb)][0]] - c
        b = points[[v for v in sb if v not in (sa)][0]] - c
        cos = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
        return cos > 1 - 1e-12
    ka, kb = len(sa), len(sb)
    A_eq = np.zeros((points.shape[1] + 2, ka + kb))
    A_eq[:points.shape[1], :ka] = V.T
    A_eq[:points.shape[1], ka:] = -W.T
    A_eq[-2, :ka] = 1
    A_eq[-1, ka:] = 1
    b_eq = np.zeros(points.shape[1] + 2)
    b_eq[-2:] = 1
    c = np.zeros(ka + kb)
    c[[i for i, v in enumerate(sa) if v not in shared]] = -1
    c[[ka + i for i, v in enumerate(sb) if v not in shared]] = -1
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return res.status == 0 and -res.fun > 1e-9


# -- closest points ------------------------------------------------------------

@dataclass(frozen=True)
class Projection:
    foot: np.ndarray
    dist: float
    inside: bool


def closest_points(C, S, X, tol=DEFAULT):
    """Vectorized closest-point retraction onto the stratum S.

    Returns ``(feet, dists, inside)``. A point is inside the retraction domain
    when its nearest point on the closure of S lies in S itself. Otherwise the
    returned foot/dist describe the projection onto the affine span of the
    nearest member simplex and must not be used as a retraction.
    """
    S = C.stratum(S)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != C.ambient_dim:
        raise InputError(f"point of dimension {X.shape[1]} in R^{C.ambient_dim}")
    m = X.shape[0]
    best_d = np.full(m, np.inf)
    best_p = np.zeros_like(X)
    best_lam = [None] * m
    best_member = np.zeros(m, dtype=int)
    lams = []
    for j, s in enumerate(S.members):
        P, d, lam = geometry.closest_points_simplex(C.vertices_of(s), X)
        lams.append(lam)
        better = d < best_d
        best_d[better] = d[better]
        best_p[better] = P[better]
        best_member[better] = j
    inside = np.zeros(m, dtype=bool)
    for j, s in enumerate(S.members):
        rows = np.flatnonzero(best_member == j)
        if rows.size == 0:
            continue
        lam = lams[j][rows]
        support = lam > tol.open_simplex
        full = support.all(axis=1)
        inside[rows[full]] = True
        if len(S.cells) > len(S.members):
            verts = C.simplices[s]
            for r, sup in zip(rows[~full], support[~full]):
                face = tuple(v for v, keep in zip(verts, sup) if keep)
                if C.simplex_index(face) in S.cells:
                    inside[r] = True
    if S.dim == 0:
        inside[:] = True
    out = ~inside
    if out.any():
        for j, s in enumerate(S.members):
            rows = np.flatnonzero(out & (best_member == j))
            if rows.size == 0:
                continue
            base, T = S.bases[j], S.tangents[j]
            rel = X[rows] - base
            best_p[rows] = base + (rel @ T.basis.T) @ T.basis
            best_d[rows] = np.linalg.norm(X[rows] - best_p[rows], axis=1)
    return best_p, best_d, inside


def closest_point(C, S, x):
    feet, dists, inside = closest_points(C, S, np.asarray(x, dtype=float)[None, :])
    return Projection(feet[0], float(dists[0]), bool(inside[0]))


def distance_gradient(C, S, x, tol=DEFAULT):
    """Unit gradient (x - foot)/|x - foot| of the distance to S."""
    pr = closest_point(C, S, x)
    if not pr.inside:
        raise InputError("point lies outside the retraction domain of the stratum")
    if pr.dist <= tol.gradient_floor:
        raise InputError("gradient undefined on stratum")
    return (np.asarray(x, dtype=float) - pr.foot) / pr.dist


def distances_to_closure(C, simplex_ids, X):
    """Distance from each row of X to a union of closed simplices, and the nearest points."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    best_d = np.full(X.shape[0], np.inf)
    best_p = np.zeros_like(X)
    for s in simplex_ids:
        P, d, _ = geometry.closest_points_simplex(C.vertices_of(s), X)
        better = d < best_d
        best_d[better] = d[better]
        best_p[better] = P[better]
    return best_d, best_p


# -- point location ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Located:
    """Points of A together with the open simplex and stratum that contain them."""

    X: np.ndarray
    simplex: np.ndarray
    stratum: np.ndarray

    def __len__(self):
        return self.X.shape[0]

    def subset(self, mask):
        return Located(self.X[mask], self.simplex[mask], self.stratum[mask])


def locate(C, X, tol=DEFAULT, strict=True):
    """Find the open simplex (and stratum) of A containing each point.

    Points farther than ``tol.on_complex`` from the complex, or lying on an
    omitted boundary face, raise InputError when ``strict``; otherwise they get
    stratum -1.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != C.ambient_dim:
        raise InputError(f"point of dimension {X.shape[1]} in R^{C.ambient_dim}")
    m = X.shape[0]
    simplex = np.full(m, -1, dtype=int)
    best = np.full(m, np.inf)
    for s, rows in C.maximal_near(X, 10 * tol.on_complex).items():
        V = C.vertices_of(s)
        _, d, lam = geometry.closest_points_simplex(V, X[rows])
        hit = (d < tol.on_complex) & (d < best[rows])
        if not hit.any():
            continue
        verts = C.simplices[s]
        for r, l, dd in zip(rows[hit], lam[hit], d[hit]):
            face = tuple(v for v, w in zip(verts, l) if w > tol.open_simplex)
            simplex[r] = C.simplex_index(face)
            best[r] = dd
    stratum = np.where(simplex >= 0, C.simplex_stratum[np.maximum(simplex, 0)], -1)
    if strict and (stratum < 0).any():
        bad = int(np.flatnonzero(stratum < 0)[0])
        raise InputError("point is not on the complex", location={"point": X[bad].tolist()})
    return Located(X, simplex, stratum)


def check_w_condition(C):
    """Measure angle(T S, T Y) over frontier pairs; affine faces give 0 up to rounding."""
    worst = 0.0
    pairs = 0
    for Y_id, S_id in sorted(C.frontier):
        Y, S = C.stratum(Y_id), C.stratum(S_id)
        for a, s in enumerate(S.members):
            for b, y in enumerate(Y.members):
                if not set(C.simplices[s]) <= set(C.simplices[y]):
                    continue
                worst = max(worst, angle(S.tangents[a], Y.tangents[b]))
                pairs += 1
    return {"pairs": pairs, "max_angle": worst, "affine_exact": worst <= DEFAULT.orthonormal}


def tangent_of_located(C, loc):
    """Tangent basis (rows) of the stratum containing each located point."""
    out = []
    for s, k in zip(loc.simplex, loc.stratum):
        S = C.strata[k]
        out.append(S.tangents[0].basis if len(S.members) == 1 else
                   S.tangents[_member_for_cell(C, S, s)].basis)
    return out


def _member_for_cell(C, S, cell):
    verts = set(C.simplices[cell])
    for j, m in enumerate(S.members):
        if verts <= set(C.simplices[m]):
            return j
    return 0
