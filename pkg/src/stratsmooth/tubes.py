"""Tubular neighborhoods with constant profiles and automatic profile selection.

A tube of S with profile delta is the set of points x whose nearest point on
the closure of S lies in S and with d(x, S) < delta. ``choose_profiles``
picks one delta per stratum, in order of increasing dimension, and records a
certificate of the checks it ran.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import geometry
from .bump import BumpFamily, b_threshold
from .errors import ConstructionError, InputError
from .sampling import grid_on_simplex, make_rng, sample_tube
from .stratified import closest_points, locate


@dataclass(frozen=True)
class TubeProfile:
    stratum_id: str
    delta: float

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise InputError(f"profile of {self.stratum_id!r} must be positive, got {self.delta}")


@dataclass(frozen=True)
class ProfileSet:
    """Profiles keyed by stratum id plus the certificate that produced them."""

    profiles: tuple
    certificate: dict = field(default_factory=dict, compare=False)

    def __iter__(self):
        return iter(self.profiles)

    def __len__(self):
        return len(self.profiles)

    def __getitem__(self, key):
        if isinstance(key, int):
            return self.profiles[key]
        for p in self.profiles:
            if p.stratum_id == key:
                return p
        raise KeyError(key)

    def delta(self, key):
        return self[key].delta

    def as_dict(self):
        return {p.stratum_id: p.delta for p in self.profiles}


def as_profile_set(C, profiles):
    """Accept a ProfileSet, a list of TubeProfile, or a {id: delta} mapping."""
    if isinstance(profiles, ProfileSet):
        out = profiles
    elif isinstance(profiles, dict):
        out = ProfileSet(tuple(TubeProfile(k, float(v)) for k, v in profiles.items()))
    else:
        out = ProfileSet(tuple(profiles))
    ids = {p.stratum_id for p in out}
    missing = [S.id for S in C.strata if S.id not in ids]
    extra = sorted(ids - {S.id for S in C.strata})
    if missing or extra:
        raise InputError("profiles do not match the strata of the complex",
                         location={"missing": missing, "unknown": extra})
    return out


def tube_contains(C, S, profile, X):
    """Mask of rows of X lying in the tube of S (strict inequality d < delta)."""
    S = C.stratum(S)
    delta = profile.delta if isinstance(profile, TubeProfile) else float(profile)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _, dist, inside = closest_points(C, S, X)
    return inside & (dist < delta)


_DELTA_FLOOR = 1e-10


class _Spheres:
    """Bounding spheres of simplices for cheap proximity prefilters."""

    def __init__(self, C, simplex_ids):
        self.ids = np.asarray(list(simplex_ids), dtype=int)
        centers, radii = [], []
        for s in self.ids:
            V = C.vertices_of(s)
            c = V.mean(axis=0)
            centers.append(c)
            radii.append(float(np.linalg.norm(V - c, axis=1).max()))
        self.centers = np.array(centers).reshape(-1, C.ambient_dim)
        self.radii = np.array(radii)
        self.rmax = float(self.radii.max()) if self.radii.size else 0.0
        self.tree = cKDTree(self.centers) if self.ids.size else None

    def near(self, center, radius, reach):
        """Simplices whose sphere comes within ``reach`` of the sphere (center, radius)."""
        if self.tree is None:
            return np.zeros(0, dtype=int)
        rows = self.tree.query_ball_point(center, radius + reach + self.rmax)
        rows = np.asarray(rows, dtype=int)
        if rows.size == 0:
            return rows
        gap = np.linalg.norm(self.centers[rows] - center, axis=1) - self.radii[rows] - radius
        return rows[gap < reach]


def candidate_rows(C, S, reach, tree):
    """Rows of the points indexed by ``tree`` (a cKDTree) that may lie within
    ``reach`` of the closure of S."""
    S = C.stratum(S)
    rows = set()
    for s in S.members:
        V = C.vertices_of(s)
        c = V.mean(axis=0)
        r = float(np.linalg.norm(V - c, axis=1).max())
        rows.update(tree.query_ball_point(c, r + reach))
    return np.array(sorted(rows), dtype=int)


def a_points_near(C, S, delta, spacing=None, spheres=None, max_points=2000):
    """Grid points of A on maximal simplices that come within delta of S.

    Returns a ``Located`` batch. Used for certificates that only need to hold
    on the set itself.
    """
    S = C.stratum(S)
    if spheres is None:
        spheres = _Spheres(C, C.maximal)
    chosen = set()
    own = _Spheres(C, S.members)
    for c, r in zip(own.centers, own.radii):
        for row in spheres.near(c, r, delta):
            chosen.add(int(spheres.ids[row]))
    pts = []
    for s in sorted(chosen):
        V = C.vertices_of(s)
        diam = geometry.diameter(V)
        step = spacing if spacing is not None else min(delta / 4.0, max(diam, delta) / 16.0)
        G = grid_on_simplex(V, step, max_points=max_points)
        # extra geometric refinement towards the vertices of the simplex
        if V.shape[0] > 1:
            lo = min(1e-6, 1e-3 * delta / max(diam, 1e-300))
            t = np.geomspace(lo, 0.25, 24)
            for i in range(V.shape[0]):
                for j in range(V.shape[0]):
                    if i != j:
                        pts.append(V[i] + t[:, None] * (V[j] - V[i]))
        pts.append(G)
    if not pts:
        return locate(C, np.zeros((0, C.ambient_dim)))
    X = np.unique(np.vstack(pts), axis=0)
    loc = locate(C, X, strict=False)
    return loc.subset(loc.stratum >= 0)


def _plateau_mask(C, B, X, chosen, below_dim):
    """Rows of X inside the plateau of some already chosen stratum of dim < below_dim."""
    out = np.zeros(X.shape[0], dtype=bool)
    for Z, delta in chosen.items():
        Z = C.stratum(Z)
        if Z.dim >= below_dim:
            continue
        _, dist, inside = closest_points(C, Z, X)
        out |= inside & (dist <= b_threshold(B, delta))
    return out


def _single_valued(C, S, X, tol=1e-12):
    """Rows where two member simplices of S give equally near but distinct feet."""
    if len(S.members) < 2:
        return np.zeros(X.shape[0], dtype=bool)
    feet, dists = [], []
    for s in S.members:
        P, d, _ = geometry.closest_points_simplex(C.vertices_of(s), X)
        feet.append(P)
        dists.append(d)
    D = np.array(dists)
    F = np.array(feet)
    order = np.argsort(D, axis=0)
    rows = np.arange(X.shape[0])
    d0, d1 = D[order[0], rows], D[order[1], rows]
    f0, f1 = F[order[0], rows], F[order[1], rows]
    return (d1 - d0 <= tol) & (np.linalg.norm(f1 - f0, axis=1) > 1e-9)


def choose_profiles(C, mu, accept=None, max_halvings=40, samples=200, seed=0, masking=False):
    """Choose a constant tube profile for every stratum.

    Strata are processed by increasing dimension. The starting value is
    ``min(mu, gap/4)`` over strata with disjoint closures that are not in the
    frontier relation with S. Each candidate is then checked on samples and
    halved until every check passes:

    * the retraction onto S is single valued on sampled tube points;
    * d(x, S) <= d(x, Y) on sampled tube points for every Y in the frontier of S;
    * on A, no point of a stratum W lies in the tube of another stratum of
      the same dimension as W, unless it is in the plateau of a
      lower-dimensional stratum (checked for S against the strata whose
      closures touch its closure; disjoint closures are handled by the gap);
    * ``accept(S, delta)``, when given, returns True.

    With ``masking`` the profile of every stratum of positive dimension below
    the ambient one is further capped by half the plateau radius of its
    frontier strata, so tube end caps sit inside lower plateaus. The caps are
    astronomically small for small mu and usually hit the profile floor.

    Raises ConstructionError naming the stratum (and the offending pair when
    there is one) if ``max_halvings`` halvings do not suffice.
    """
    if not (0 < mu < 1):
        raise InputError(f"mu must lie in (0, 1), got {mu}")
    B = BumpFamily(mu)
    rng = make_rng(seed)
    cells = [i for S in C.strata for i in S.members]
    cell_owner = {i: S.index for S in C.strata for i in S.members}
    cell_spheres = _Spheres(C, cells)
    max_spheres = _Spheres(C, C.maximal)
    verts = {S.index: frozenset(v for i in S.closure for v in C.simplices[i]) for S in C.strata}
    by_vertex = {}
    for S in C.strata:
        for v in verts[S.index]:
            by_vertex.setdefault(v, set()).add(S.index)
    floor = _DELTA_FLOOR * C.diameter()
    chosen = {}
    report = {}
    order = sorted(C.strata, key=lambda S: (S.dim, S.index))
    for S in order:
        delta = min(mu, 0.999)
        binding = "mu"
        own = _Spheres(C, S.members)
        near_ids = {i for v in verts[S.index] for i in by_vertex[v]} - {S.index}
        # gap constraint against incomparable strata with disjoint closures,
        # visited by increasing sphere lower bound
        bounds = {}
        for c, r in zip(own.centers, own.radii):
            for row in cell_spheres.near(c, r, 4.0 * delta):
                Y = cell_owner[int(cell_spheres.ids[row])]
                if Y in near_ids or Y == S.index:
                    continue
                lb = float(np.linalg.norm(cell_spheres.centers[row] - c)
                           - cell_spheres.radii[row] - r)
                bounds[Y] = min(bounds.get(Y, math.inf), lb)
        for Y, lb in sorted(bounds.items(), key=lambda kv: (kv[1], kv[0])):
            if lb >= 4.0 * delta:
                break
            Y = C.strata[Y]
            if C.comparable(S, Y):
                continue
            gap = C.closure_distance(S, Y)
            if gap / 4.0 < delta:
                delta = gap / 4.0
                binding = f"gap to {Y.id}"
        if masking and 0 < S.dim < C.ambient_dim:
            for Z in C.frontier_of(S):
                cap = 0.5 * float(b_threshold(B, chosen[Z.id]))
                if cap < delta:
                    delta = cap
                    binding = f"mask of {Z.id}"
        touching = [C.strata[i] for i in sorted(near_ids)
                    if C.strata[i].dim == S.dim and i != S.index]
        failure = None
        for halving in range(max_halvings + 1):
            if delta < floor:
                failure = {"reason": f"profile fell below {floor:.1e}"}
                break
            failure = _certify(C, B, S, delta, chosen, touching, rng, samples, max_spheres, accept)
            if failure is None:
                break
            delta *= 0.5
        if failure is not None:
            raise ConstructionError(
                f"no admissible profile for stratum {S.id!r} after {max_halvings} halvings: {failure['reason']}",
                location={"stratum": S.id, **{k: v for k, v in failure.items() if k != "reason"}})
        chosen[S.id] = delta
        report[S.id] = {"delta": delta, "halvings": halving, "binding": binding}
    profiles = tuple(TubeProfile(S.id, chosen[S.id]) for S in C.strata)
    certificate = {"mu": mu, "samples": samples, "seed": seed, "strata": report}
    return ProfileSet(profiles, certificate)


def _certify(C, B, S, delta, chosen, touching, rng, samples, max_spheres, accept):
    if S.dim < C.ambient_dim:
        T = sample_tube(C, S, delta, samples, rng)
        _, dist, inside = closest_points(C, S, T)
        if _single_valued(C, S, T[inside]).any():
            return {"reason": "retraction is not single valued on the tube"}
        for Y in C.frontier_of(S):
            _, dY, _ = closest_points(C, Y, T[inside])
            if np.any(dist[inside] > dY + 1e-12):
                return {"reason": f"points of the tube are nearer to {Y.id}", "pair": [S.id, Y.id]}
    if touching:
        loc = a_points_near(C, S, delta, spheres=max_spheres)
        if len(loc):
            in_s = tube_contains(C, S, delta, loc.X)
            for W in touching:
                if W.dim != S.dim:
                    continue
                hit = in_s & (loc.stratum == W.index)
                if W.id in chosen:
                    hit |= (loc.stratum == S.index) & tube_contains(C, W, chosen[W.id], loc.X)
                if not hit.any():
                    continue
                ok = _plateau_mask(C, B, loc.X[hit], chosen, S.dim)
                if not ok.all():
                    bad = loc.X[hit][~ok][0]
                    return {"reason": f"tube overlaps {W.id} on A", "pair": [S.id, W.id],
                            "point": bad.tolist()}
    if accept is not None and not accept(S, delta):
        return {"reason": "acceptance callback rejected the profile"}
    return None
