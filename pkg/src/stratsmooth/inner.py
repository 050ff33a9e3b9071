"""Inner (geodesic) distance on a complex through a net graph.

Nodes are grid points of every open cell of A; two nodes are joined only when
they lie in a common closed simplex, so every graph path is an arc in A.
Query points are attached to all nodes of the closed maximal simplices that
contain them. The graph length is an upper bound for the inner distance and
converges to it as h decreases.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import minimize
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from . import geometry
from .config import DEFAULT
from .errors import InputError, ResourceError
from .sampling import make_rng, sample_near, sample_stratum
from .stratified import closest_points
from .tubes import TubeProfile, a_points_near, tube_contains

_COMPLETE_LIMIT = 400
_ZERO_WEIGHT = 1e-300      # csgraph drops explicit zeros


class _Infinite:
    """Distance between points in different connected components."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __float__(self):
        return math.inf

    def __repr__(self):
        return "INFINITE"

    def __eq__(self, other):
        return other is self or (isinstance(other, float) and other == math.inf)

    def __hash__(self):
        return hash(math.inf)

    def __gt__(self, other):
        return not self == other

    def __lt__(self, other):
        return False

    def to_json(self):
        return "inf"


INFINITE = _Infinite()


def as_distance(value):
    """Float for finite values, INFINITE otherwise."""
    return INFINITE if not math.isfinite(value) else float(value)


@dataclass(frozen=True, eq=False)
class NetGraph:
    complex: object
    h: float
    nodes: np.ndarray
    graph: sparse.csr_matrix
    simplex_nodes: dict         # maximal simplex index -> node indices of the closed simplex
    nested: bool = False

    def __post_init__(self):
        ids = np.array(sorted(self.simplex_nodes), dtype=int)
        centers = np.array([self.complex.vertices_of(s).mean(axis=0) for s in ids]).reshape(
            -1, self.complex.ambient_dim)
        radii = np.array([np.linalg.norm(self.complex.vertices_of(s) - c, axis=1).max()
                          for s, c in zip(ids, centers)])
        object.__setattr__(self, "_ids", ids)
        object.__setattr__(self, "_radii", radii)
        object.__setattr__(self, "_rmax", float(radii.max()) if radii.size else 0.0)
        object.__setattr__(self, "_tree", cKDTree(centers) if ids.size else None)

    def near(self, x, tol):
        """Maximal simplices whose bounding sphere comes within tol of x."""
        if self._tree is None:
            return []
        rows = np.asarray(self._tree.query_ball_point(x, self._rmax + tol), dtype=int)
        rows = rows[np.linalg.norm(self._tree.data[rows] - x, axis=1) <= self._radii[rows] + tol]
        return [int(s) for s in np.sort(self._ids[rows])]

    @property
    def node_count(self):
        return self.nodes.shape[0]

    @property
    def edge_count(self):
        return self.graph.nnz // 2


def _subdivisions(diam, h, nested):
    if diam <= h:
        return 1
    if nested:
        return 2 ** int(math.ceil(math.log2(diam / h)))
    return int(math.ceil(diam / h))


def build_net(C, h, nested=False):
    """Net graph of resolution h. With ``nested`` the subdivision counts are
    powers of two so that halving h refines the node set."""
    if not (h > 0 and math.isfinite(h)):
        raise InputError(f"h must be positive, got {h}")
    diam = C.diameter()
    if h < 1e-6 * diam:
        raise ResourceError(f"h = {h:g} is below 1e-6 times the diameter {diam:g}")
    cells = [i for i in range(len(C.simplices)) if C.simplex_stratum[i] >= 0]
    cell_nodes = {}
    pts = []
    count = 0
    for i in cells:
        V = C.vertices_of(i)
        k = V.shape[0] - 1
        m = _subdivisions(geometry.diameter(V), h, nested)
        lam = geometry.grid_barycentric(k, m)
        cell_nodes[i] = np.arange(count, count + lam.shape[0])
        count += lam.shape[0]
        pts.append(lam @ V)
    nodes = np.vstack(pts) if pts else np.zeros((0, C.ambient_dim))
    simplex_nodes = {}
    rows, cols = [], []
    for s in C.maximal:
        if C.simplex_stratum[s] < 0:
            continue
        idx = [cell_nodes[C.simplex_index(f)] for f in geometry.faces(C.simplices[s])
               if C.simplex_index(f) in cell_nodes]
        idx = np.unique(np.concatenate(idx)) if idx else np.zeros(0, dtype=int)
        simplex_nodes[s] = idx
        k = len(C.simplices[s]) - 1
        if idx.size < 2:
            continue
        if k == 1:
            V = C.vertices_of(s)
            t = (nodes[idx] - V[0]) @ (V[1] - V[0])
            chain = idx[np.argsort(t)]
            a, b = chain[:-1], chain[1:]
        elif idx.size <= _COMPLETE_LIMIT:
            a, b = np.triu_indices(idx.size, 1)
            a, b = idx[a], idx[b]
        else:
            pairs = cKDTree(nodes[idx]).query_pairs(4.0 * h, output_type="ndarray")
            a, b = idx[pairs[:, 0]], idx[pairs[:, 1]]
        rows.append(a)
        cols.append(b)
    if rows:
        E = np.unique(np.sort(np.column_stack([np.concatenate(rows), np.concatenate(cols)]), axis=1),
                      axis=0)
        w = np.maximum(np.linalg.norm(nodes[E[:, 0]] - nodes[E[:, 1]], axis=1), _ZERO_WEIGHT)
        M = sparse.coo_matrix((np.concatenate([w, w]),
                               (np.concatenate([E[:, 0], E[:, 1]]), np.concatenate([E[:, 1], E[:, 0]]))),
                              shape=(count, count)).tocsr()
    else:
        M = sparse.csr_matrix((count, count))
    return NetGraph(C, float(h), nodes, M, simplex_nodes, nested)


def containing_simplices(G, x, tol=DEFAULT.on_complex):
    """Closed maximal simplices of A that contain x (within tol)."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != G.complex.ambient_dim:
        raise InputError(f"point of dimension {x.shape[1]} in R^{G.complex.ambient_dim}")
    out = []
    for s in G.near(x[0], tol):
        _, d, _ = geometry.closest_points_simplex(G.complex.vertices_of(s), x)
        if d[0] <= tol:
            out.append(s)
    if not out:
        raise InputError("point is not on the complex", location={"point": x[0].tolist()})
    return out


def _containing_many(G, Y, tol=DEFAULT.on_complex):
    C = G.complex
    if Y.shape[1] != C.ambient_dim:
        raise InputError(f"point of dimension {Y.shape[1]} in R^{C.ambient_dim}")
    out = [[] for _ in range(Y.shape[0])]
    for s, rows in C.maximal_near(Y, tol).items():
        if s not in G.simplex_nodes:
            continue
        _, d, _ = geometry.closest_points_simplex(C.vertices_of(s), Y[rows])
        for r in rows[d <= tol]:
            out[r].append(s)
    for r, lst in enumerate(out):
        if not lst:
            raise InputError("point is not on the complex", location={"point": Y[r].tolist()})
    return out


def _attachments(G, simplices, x):
    idx = np.unique(np.concatenate([G.simplex_nodes[s] for s in simplices]))
    w = np.maximum(np.linalg.norm(G.nodes[idx] - x, axis=1), _ZERO_WEIGHT)
    return idx, w


def _through_face(C, face, x, y):
    """Shortest broken line x -> c -> y with c in the closed face."""
    V = C.points[list(face)]
    if V.shape[0] == 1:
        return float(np.linalg.norm(x - V[0]) + np.linalg.norm(V[0] - y))
    if V.shape[0] == 2:
        # unfold about the edge line; the length is convex in the crossing
        # parameter, so clamping the unconstrained crossing is optimal
        e = V[1] - V[0]
        length = float(np.linalg.norm(e))
        e = e / length
        ax, ay = float((x - V[0]) @ e), float((y - V[0]) @ e)
        rx = float(np.linalg.norm(x - V[0] - ax * e))
        ry = float(np.linalg.norm(y - V[0] - ay * e))
        t = ax + (ay - ax) * rx / (rx + ry) if rx + ry > 0 else ax
        t = min(max(t, 0.0), length)
        return math.hypot(ax - t, rx) + math.hypot(ay - t, ry)
    k = V.shape[0]

    def f(lam):
        c = lam @ V
        return np.linalg.norm(x - c) + np.linalg.norm(c - y)

    best = min(f(np.eye(k)[i]) for i in range(k))
    r = minimize(f, np.full(k, 1.0 / k), method="SLSQP", bounds=[(0, 1)] * k,
                 constraints=[{"type": "eq", "fun": lambda lam: lam.sum() - 1.0}])
    if r.success:
        best = min(best, float(f(np.clip(r.x, 0, None) / np.clip(r.x, 0, None).sum())))
    return float(best)


def _direct(G, sx, sy, x, y):
    """Exact length when x, y share a closed simplex or adjacent ones."""
    C = G.complex
    best = math.inf
    for a in sx:
        for b in sy:
            if a == b:
                return float(np.linalg.norm(x - y))
            common = set(C.simplices[a]) & set(C.simplices[b])
            if common:
                best = min(best, _through_face(C, tuple(sorted(common)), x, y))
    return best


def distances_from(G, x, Y, limit=np.inf):
    """Inner distances from x to each row of Y as floats (math.inf if disconnected)."""
    x = np.asarray(x, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    sx = containing_simplices(G, x)
    D = None
    out = np.empty(Y.shape[0])
    for r, (y, sy) in enumerate(zip(Y, _containing_many(G, Y))):
        direct = _direct(G, sx, sy, x, y)
        # no arc is shorter than the chord, so a direct path of chord length is exact
        if direct <= np.linalg.norm(x - y) * (1 + 1e-12):
            out[r] = direct
            continue
        if D is None:
            D = _graph_from(G, sx, x, limit)
        iy, wy = _attachments(G, sy, y)
        best = float(np.min(D[iy] + wy)) if iy.size else math.inf
        out[r] = min(best, direct)
    return out


def _graph_from(G, sx, x, limit):
    ix, wx = _attachments(G, sx, x)
    N = G.node_count
    extra = sparse.coo_matrix((np.concatenate([wx, wx]),
                               (np.concatenate([np.full(ix.size, N), ix]),
                                np.concatenate([ix, np.full(ix.size, N)]))),
                              shape=(N + 1, N + 1))
    A = sparse.bmat([[G.graph, None], [None, sparse.csr_matrix((1, 1))]]).tocsr() + extra.tocsr()
    return dijkstra(A, directed=False, indices=N, limit=limit)


def inner_distance(G, x, y):
    """Graph inner distance, or INFINITE for points in different components."""
    return as_distance(distances_from(G, x, np.asarray(y, dtype=float)[None, :])[0])


def check_local_arc(G, x0, mu, radius, samples=200, seed=0):
    """Sampled check of d_inner(x, x0) <= (1 + mu)|x - x0| + 2h for |x - x0| < radius."""
    rng = make_rng(seed)
    x0 = np.asarray(x0, dtype=float)
    containing_simplices(G, x0)
    loc = sample_near(G.complex, x0, radius, samples, rng)
    X = loc.X
    e = np.linalg.norm(X - x0, axis=1)
    keep = e > 0
    X, e = X[keep], e[keep]
    D = distances_from(G, x0, X) if X.shape[0] else np.zeros(0)
    bound = (1 + mu) * e + 2 * G.h
    bad = np.flatnonzero(D > bound)
    ratio = D / e
    return {
        "worst_ratio": float(ratio.max()) if ratio.size else 0.0,
        "samples": int(X.shape[0]),
        "violations": [{"point": X[i].tolist(), "inner": _json_float(D[i]), "euclid": float(e[i])}
                       for i in bad[:20]],
        "violation_count": int(bad.size),
        "h": G.h,
        "status": "ok" if bad.size == 0 else "violated",
    }


def _json_float(v):
    return float(v) if math.isfinite(v) else "inf"


def _tube_samples(C, S, delta, samples, rng):
    loc = a_points_near(C, S, delta)
    X = loc.X
    extra = []
    if S.dim < C.ambient_dim:
        for c in sample_stratum(C, S, 10, rng):
            extra.append(sample_near(C, c, delta, max(samples // 10, 1), rng).X)
    if extra:
        X = np.vstack([X] + extra)
    if X.shape[0] == 0:
        return X
    X = X[tube_contains(C, S, delta, X)]
    if X.shape[0] > samples:
        X = X[rng.choice(X.shape[0], size=samples, replace=False)]
    return X


def check_tube_inner(C, S, profile, mu, G=None, h=None, samples=200, seed=0):
    """Sampled check of d_inner(x, pi_S(x)) <= (1 + mu) d(x, S) + 2h on the tube of S in A."""
    S = C.stratum(S)
    delta = profile.delta if isinstance(profile, TubeProfile) else float(profile)
    if G is None:
        G = build_net(C, h if h is not None else 0.01 * C.diameter())
    rng = make_rng(seed)
    X = _tube_samples(C, S, delta, samples, rng)
    feet, dist, _ = closest_points(C, S, X) if X.shape[0] else (X, np.zeros(0), None)
    live = dist > DEFAULT.on_stratum
    X, feet, dist = X[live], feet[live], dist[live]
    inner = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        limit = 4.0 * ((1 + mu) * dist[i] + 2 * G.h) + 4.0 * delta
        inner[i] = distances_from(G, feet[i], X[i:i + 1], limit=limit)[0]
    bound = (1 + mu) * dist + 2 * G.h
    bad = np.flatnonzero(inner > bound)
    ratio = inner / dist if dist.size else np.zeros(0)
    worst = float(ratio.max()) if ratio.size else 0.0
    return {
        "stratum": S.id,
        "delta": delta,
        "mu": mu,
        "h": G.h,
        "worst_ratio": worst if math.isfinite(worst) else "inf",
        "samples": int(X.shape[0]),
        "violations": [{"point": X[i].tolist(), "foot": feet[i].tolist(), "dist": float(dist[i]),
                        "inner": _json_float(inner[i])} for i in bad[:20]],
        "violation_count": int(bad.size),
        "status": "ok" if bad.size == 0 else "violated",
    }


def check_tubes_inner(C, profiles, mu, h=None, samples=4000, seed=0):
    """check_tube_inner for every stratum with one shared net; ``samples`` is
    the total budget, spread evenly with at least 10 per stratum."""
    G = build_net(C, h if h is not None else 0.01 * C.diameter())
    each = max(10, samples // C.kappa)
    reports = [check_tube_inner(C, S, profiles[S.id], mu, G=G, samples=each, seed=seed + S.index)
               for S in C.strata]
    return {"h": G.h, "nodes": G.node_count, "strata": reports,
            "violation_count": sum(r["violation_count"] for r in reports),
            "status": "ok" if all(r["status"] == "ok" for r in reports) else "violated"}


def local_modulus(f, x):
    """Local inner Lipschitz modulus of a map at x (exact for PL maps)."""
    return f.local_modulus(x)
