"""C^1 smoothing of Lipschitz maps on a stratified complex.

Given f and a partition {phi_S}, the smoothed map is

    g = sum_S phi_S * g_S,    g_S = f o pi_S,

with profiles small enough that |f - g_S| < epsilon on the tube of S in A.
Also here: McShane extension, sampled Lipschitz estimates and the smooth
separation of two closed subsets.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from . import geometry
from .bump import b_threshold
from .errors import InputError, LipschitzViolation
from .inner import build_net, distances_from
from .maps import CallableMap, DefinableMap
from .partition import Partition, build_partition, eval_all
from .sampling import make_rng, sample_complex, sample_near, sample_stratum
from .stratified import _member_for_cell, closest_points, distances_to_closure, locate
from .tubes import a_points_near, choose_profiles, tube_contains


def _epsilon_fn(epsilon):
    if isinstance(epsilon, DefinableMap):
        return lambda X: epsilon.value(X)[:, 0]
    if callable(epsilon):
        return lambda X: np.asarray(epsilon(X), dtype=float).reshape(-1)
    eps = float(epsilon)
    if not eps > 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    return lambda X: np.full(np.atleast_2d(X).shape[0], eps)


@dataclass(frozen=True, eq=False)
class RetractMap:
    """g_S = f o pi_S on the tube of S."""

    f: DefinableMap
    stratum: object

    def evaluate(self, X, delta=None):
        C = self.f.complex
        X = np.atleast_2d(np.asarray(X, dtype=float))
        feet, dist, inside = closest_points(C, self.stratum, X)
        ok = inside if delta is None else inside & (dist < delta)
        if not ok.all():
            bad = int(np.flatnonzero(~ok)[0])
            raise InputError(f"point outside the tube of {self.stratum.id!r}",
                             location={"point": X[bad].tolist()})
        # d pi_S is the orthogonal projection onto the tangent space, which
        # differential_on already applies
        return self.f.value(feet), self.f.differential_on(self.stratum, feet)

    def value(self, X):
        return self.evaluate(X)[0]


def retract_map(f, S):
    return RetractMap(f, f.complex.stratum(S))


@dataclass(frozen=True, eq=False)
class SmoothedMap:
    f: DefinableMap
    partition: Partition
    epsilon: object
    certificate: dict = field(default_factory=dict)

    @property
    def complex(self):
        return self.f.complex

    @property
    def k(self):
        return self.f.k

    @property
    def mu(self):
        return self.partition.mu

    def value(self, X, loc=None):
        return eval_smoothed(self, X)["value"]

    def local_moduli(self, X):
        """Max over closed simplices containing x of |dg(x) restricted to the simplex|."""
        C = self.complex
        X = np.atleast_2d(np.asarray(X, dtype=float))
        D = eval_smoothed(self, X, located=False)["differential"]
        best = np.zeros(X.shape[0])
        for s, rows in C.maximal_near(X, 1e-9).items():
            _, d, _ = geometry.closest_points_simplex(C.vertices_of(s), X[rows])
            hit = rows[d <= 1e-9]
            Pm = C.stratum(int(C.simplex_stratum[s]))
            proj = Pm.tangents[Pm.members.index(s)].projector() if s in Pm.members else None
            if proj is None or hit.size == 0:
                continue
            norms = np.linalg.norm(D[hit] @ proj, ord=2, axis=(1, 2))
            best[hit] = np.maximum(best[hit], norms)
        return best

    def local_modulus(self, x):
        return float(self.local_moduli(np.asarray(x, dtype=float)[None, :])[0])


def tube_points(C, S, delta, rng, extra=64):
    """Points of A in the tube of S: a grid near S plus random points."""
    S = C.stratum(S)
    X = a_points_near(C, S, delta).X
    more = []
    for c in sample_stratum(C, S, 8, rng):
        more.append(sample_near(C, c, delta, max(extra // 8, 1), rng).X)
    if more:
        X = np.vstack([X] + more)
    if X.shape[0] == 0:
        return X
    return X[tube_contains(C, S, delta, X)]


def smooth(f, mu, epsilon, seed=0, max_halvings=40, renormalize=False):
    """Smooth f with derivative control.

    Profiles are halved until sampled |f(x) - f(pi_S(x))| < epsilon(x) on the
    tube of every stratum in A (besides the checks of ``choose_profiles``).
    """
    C = f.complex
    eps = _epsilon_fn(epsilon)
    rng = make_rng(seed + 1)
    worst = {}

    def accept(S, delta):
        X = tube_points(C, S, delta, rng)
        if X.shape[0] == 0:
            return True
        feet, _, _ = closest_points(C, S, X)
        gap = np.linalg.norm(f.value(X) - f.value(feet), axis=1)
        worst[S.id] = float(gap.max())
        return bool(np.all(gap < eps(X)))

    bump_mu = mu / C.kappa if renormalize else mu
    try:
        profiles = choose_profiles(C, bump_mu, accept=accept, max_halvings=max_halvings, seed=seed)
    except Exception as exc:
        if hasattr(exc, "location") and isinstance(exc.location, dict):
            exc.location.setdefault("epsilon_gap", worst.get(exc.location.get("stratum")))
        raise
    P = build_partition(C, profiles, mu, renormalize=renormalize)
    cert = {"profiles": profiles.certificate, "tube_gap": worst}
    return SmoothedMap(f, P, eps, cert)


def eval_smoothed(g, X, located=True):
    """Value, differential and tangential differential norm of g.

    ``differential`` is the ambient differential (m, k, n) given by the product
    rule; ``tangential`` restricts it to the tangent space of the stratum of
    each point, and ``norm`` is its operator norm.
    """
    C = g.complex
    X = np.atleast_2d(np.asarray(X, dtype=float))
    loc = locate(C, X) if located else None
    values, grads = eval_all(g.partition, X)
    m, n = X.shape
    val = np.zeros((m, g.k))
    D = np.zeros((m, g.k, n))
    for S in C.strata:
        i = S.index
        rows = np.flatnonzero((values[:, i] != 0) | np.any(grads[:, i] != 0, axis=1))
        if rows.size == 0:
            continue
        gS, dgS = RetractMap(g.f, S).evaluate(X[rows])
        phi = values[rows, i]
        val[rows] += phi[:, None] * gS
        D[rows] += gS[:, :, None] * grads[rows, i][:, None, :] + phi[:, None, None] * dgS
    out = {"value": val, "differential": D}
    if loc is not None:
        T = np.zeros((m, g.k, n))
        for key in np.unique(loc.stratum):
            S = C.strata[key]
            rows = np.flatnonzero(loc.stratum == key)
            if len(S.members) == 1:
                T[rows] = D[rows] @ S.tangent.projector()
            else:
                for r in rows:
                    j = _member_for_cell(C, S, loc.simplex[r])
                    T[r] = D[r] @ S.tangents[j].projector()
        out["tangential"] = T
        out["norm"] = np.linalg.norm(T, ord=2, axis=(1, 2)) if n and g.k else np.zeros(m)
        out["located"] = loc
    return out


def verify_smoothing(g, samples=10_000, seed=0, margin=3.0, modulus_samples=None):
    """Sampled certificates: |f - g| < epsilon on A, and
    |dg| <= L_f(x) + C mu with the measured C compared against ``margin``."""
    C = g.complex
    rng = make_rng(seed)
    loc = sample_complex(C, samples, rng)
    ev = eval_smoothed(g, loc.X)
    fx = g.f.value(loc.X, loc) if g.f.kind != "callable" else g.f.value(loc.X)
    err = np.linalg.norm(fx - ev["value"], axis=1)
    eps = g.epsilon(loc.X)
    approx_ok = bool(np.all(err < eps))
    rows = np.arange(len(loc))
    if modulus_samples is not None and modulus_samples < len(loc):
        rows = rows[:modulus_samples]
    L = g.f.local_moduli(loc.X[rows])
    excess = (ev["norm"][rows] - L) / g.mu
    j = int(np.argmax(excess)) if excess.size else 0
    C_measured = float(excess[j]) if excess.size else 0.0
    report = {
        "samples": int(len(loc)),
        "approx_max_err": float(err.max()) if err.size else 0.0,
        "approx_min_slack": float((eps - err).min()) if err.size else 0.0,
        "approx_ok": approx_ok,
        "max_dg": float(ev["norm"].max()) if err.size else 0.0,
        "C_measured": C_measured,
        "C_margin": margin,
        "derivative_ok": C_measured <= margin,
        "worst_point": loc.X[rows][j].tolist() if excess.size else None,
        "mu": g.mu,
        "modulus_kind": "exact" if g.f.kind == "pl" else "estimate",
    }
    report["pass"] = bool(approx_ok and report["derivative_ok"])
    return report


def one_sided_differentials(g, point, directions, t):
    """Ambient differential of g applied to each unit direction u at point + t u."""
    point = np.asarray(point, dtype=float)
    U = np.atleast_2d(np.asarray(directions, dtype=float))
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    X = point + t * U
    D = eval_smoothed(g, X, located=False)["differential"]
    return np.einsum("mkn,mn->mk", D, U), X


def plateau_check(g, stratum):
    """One-sided differentials of g at a point stratum, evaluated at half the
    plateau radius along every incident simplex, where g is constant."""
    C = g.complex
    S = C.stratum(stratum)
    if S.dim != 0:
        raise InputError("plateau_check expects a point stratum")
    p = C.vertices_of(S.members[0])[0]
    delta = g.partition.profiles.delta(S.id)
    t = float(b_threshold(g.partition.bump, delta)) / 2.0
    vertex = C.simplices[S.members[0]][0]
    dirs = []
    for s in C.maximal:
        if C.simplex_stratum[s] < 0 or vertex not in C.simplices[s]:
            continue
        c = C.vertices_of(s).mean(axis=0)
        dirs.append(c - p)
    if not dirs:
        return {"stratum": S.id, "t": t, "differentials": [], "spread": 0.0, "max_abs": 0.0}
    d, X = one_sided_differentials(g, p, dirs, t)
    return {
        "stratum": S.id,
        "t": t,
        "points": X.tolist(),
        "differentials": d.tolist(),
        "spread": float(np.ptp(d, axis=0).max()) if d.size else 0.0,
        "max_abs": float(np.abs(d).max()) if d.size else 0.0,
    }


# -- McShane extension -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class McShane:
    """Coordinatewise inf-convolution x -> min_a f(a) + L |x - a|."""

    anchors: np.ndarray
    values: np.ndarray
    L: float

    @property
    def inflation(self):
        """Lipschitz constant factor of the vector-valued extension."""
        return math.sqrt(self.values.shape[1])

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        D = cdist(X, self.anchors)
        out = np.min(self.values[None, :, :] + self.L * D[:, :, None], axis=1)
        hit = D == 0
        rows = np.flatnonzero(hit.any(axis=1))
        out[rows] = self.values[np.argmax(hit[rows], axis=1)]
        return out

    def report(self):
        return {"L": self.L, "anchors": int(self.anchors.shape[0]),
                "components": int(self.values.shape[1]), "vector_inflation": self.inflation}


def mcshane_extend(anchors, values, L, rtol=1e-12):
    """Extend values given at anchor points to R^n with the same per-coordinate
    Lipschitz constant L. Raises LipschitzViolation with a witness pair when
    the data are not L-Lipschitz."""
    A = np.atleast_2d(np.asarray(anchors, dtype=float))
    V = np.asarray(values, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[0] != A.shape[0]:
        raise InputError("anchors and values differ in length")
    if not (L >= 0 and math.isfinite(L)):
        raise InputError(f"L must be finite and nonnegative, got {L}")
    D = cdist(A, A)
    for c in range(V.shape[1]):
        gap = np.abs(V[:, c, None] - V[None, :, c]) - L * D * (1 + rtol)
        if (gap > 1e-15).any():
            i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
            raise LipschitzViolation(
                f"values are not {L}-Lipschitz on the anchors",
                location={"pair": [int(i), int(j)], "coordinate": c,
                          "ratio": float(abs(V[i, c] - V[j, c]) / D[i, j]) if D[i, j] > 0 else "inf"})
    return McShane(A.copy(), V.copy(), float(L))


def pair_ratios(F, X, Y):
    """|F(x) - F(y)| / |x - y| for paired rows (zero distance pairs skipped)."""
    d = np.linalg.norm(X - Y, axis=1)
    keep = d > 0
    return np.linalg.norm(F(X[keep]) - F(Y[keep]), axis=1) / d[keep]


# -- Lipschitz estimates -----------------------------------------------------

def lipschitz_estimate(f, samples=400, sources=25, h=None, seed=0, G=None, include_vertices=True):
    """Sampled pair bound (inner distance) and local-modulus bound of a map on A."""
    C = f.complex
    rng = make_rng(seed)
    loc = sample_complex(C, samples, rng)
    X = loc.X
    values = f.value(X)
    if G is None:
        G = build_net(C, h if h is not None else 0.01 * C.diameter())
    pair = 0.0
    count = 0
    for i in rng.choice(X.shape[0], size=min(sources, X.shape[0]), replace=False):
        d = distances_from(G, X[i], X)
        ok = np.isfinite(d) & (d > 1e-9)
        if not ok.any():
            continue
        r = np.linalg.norm(values[ok] - values[i], axis=1) / d[ok]
        pair = max(pair, float(r.max()))
        count += int(ok.sum())
    M = X
    if include_vertices:
        used = [C.simplices[i][0] for i in range(len(C.simplices))
                if len(C.simplices[i]) == 1 and C.simplex_stratum[i] >= 0]
        if used:
            M = np.vstack([X, C.points[used]])
    modulus = float(np.max(f.local_moduli(M)))
    return {"pair_bound": pair, "modulus_bound": modulus, "pairs": count,
            "samples": int(X.shape[0]), "h": G.h}


# -- separation ----------------------------------------------------------------

def _closure_simplices(C, ids):
    out = set()
    for key in ids:
        out |= set(C.stratum(key).closure)
    return sorted(out)


def separation_map(C, set_a, set_b):
    """f = d(x, B) - d(x, A) with its analytic gradient, and epsilon = (d_A + d_B)/2."""
    if not set_a or not set_b:
        raise InputError("both sets must be nonempty")
    sa, sb = _closure_simplices(C, set_a), _closure_simplices(C, set_b)
    if set(sa) & set(sb):
        raise InputError("the sets intersect", location={"simplices": sorted(set(sa) & set(sb))})

    def parts(X):
        dA, pA = distances_to_closure(C, sa, X)
        dB, pB = distances_to_closure(C, sb, X)
        return dA, pA, dB, pB

    def fn(X):
        dA, _, dB, _ = parts(X)
        return (dB - dA)[:, None]

    def unit(X, P, d):
        out = np.zeros_like(X)
        pos = d > 0
        out[pos] = (X[pos] - P[pos]) / d[pos][:, None]
        return out

    def jac(X):
        dA, pA, dB, pB = parts(X)
        return (unit(X, pB, dB) - unit(X, pA, dA))[:, None, :]

    def eps(X):
        dA, _, dB, _ = parts(np.atleast_2d(X))
        return 0.5 * (dA + dB)

    return CallableMap(C, fn, jac, k=1), eps, sa, sb


def _set_samples(C, ids, n, rng):
    pts = []
    for key in ids:
        S = C.stratum(key)
        pts.append(sample_stratum(C, S, n, rng))
        for i in S.closure:
            if len(C.simplices[i]) == 1:
                pts.append(C.vertices_of(i))
    return np.vstack(pts)


def separation(C, set_a, set_b, mu, samples=1000, seed=0):
    """Smooth g, positive on the closure of set_a and negative on that of set_b."""
    f, eps, sa, sb = separation_map(C, set_a, set_b)
    g = smooth(f, mu, eps, seed=seed)
    rng = make_rng(seed + 7)
    XA = _set_samples(C, set_a, samples, rng)
    XB = _set_samples(C, set_b, samples, rng)
    gA = g.value(XA)[:, 0]
    gB = g.value(XB)[:, 0]
    dB_on_A, _ = distances_to_closure(C, sb, XA)
    report = {
        "set_a": list(set_a),
        "set_b": list(set_b),
        "samples_a": int(XA.shape[0]),
        "samples_b": int(XB.shape[0]),
        "margin_a": float(gA.min()),
        "margin_b": float(-gB.max()),
        "half_distance_margin": float((gA - dB_on_A / 2).min()),
        "mu": mu,
    }
    report["pass"] = bool(report["margin_a"] > 0 and report["margin_b"] > 0
                          and report["half_distance_margin"] > 0)
    return g, report
