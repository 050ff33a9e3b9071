"""C^1 partition of unity subordinate to stratum tubes.

Members are built by increasing stratum dimension l:

    phi_S = psi_S * (1 - sum of the members of dimension < l)

where psi_S is the stratum bump with S's constant profile. On a point of a
stratum the own bump equals 1, which makes the sum telescope to 1 on A.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .bump import BumpFamily, stratum_bump
from .config import DEFAULT
from .errors import InputError
from .sampling import make_rng, sample_complex, sample_tube
from .stratified import closest_points
from .tubes import ProfileSet, as_profile_set, candidate_rows


@dataclass(frozen=True, eq=False)
class Partition:
    complex: object
    profiles: ProfileSet
    mu: float
    bump: BumpFamily
    order: tuple            # stratum indices sorted by (dim, index)
    renormalized: bool = False

    @property
    def kappa(self):
        return self.complex.kappa

    @property
    def ids(self):
        return [self.complex.strata[i].id for i in self.order]


def build_partition(C, profiles, mu, renormalize=False):
    """Assemble the partition. With ``renormalize`` the bump exponent uses
    mu / kappa so that the measured bound r* <= kappa becomes
    |grad phi_S| <= mu / d(x, S)."""
    if not (0 < mu < 1):
        raise InputError(f"mu must lie in (0, 1), got {mu}")
    profiles = as_profile_set(C, profiles)
    for p in profiles:
        if not p.delta < 1:
            raise InputError(f"profile of {p.stratum_id!r} must be below 1, got {p.delta}")
    bump_mu = mu / C.kappa if renormalize else mu
    order = tuple(S.index for S in sorted(C.strata, key=lambda S: (S.dim, S.index)))
    return Partition(C, profiles, mu, BumpFamily(bump_mu), order, renormalize)


def eval_all(P, X):
    """Values (m, kappa) and ambient gradients (m, kappa, n) of every member.

    Columns follow the stratum order of the complex.
    """
    C = P.complex
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, n = X.shape
    values = np.zeros((m, C.kappa))
    grads = np.zeros((m, C.kappa, n))
    lower = np.zeros(m)
    lower_grad = np.zeros((m, n))
    layer = None
    layer_sum = np.zeros(m)
    layer_grad = np.zeros((m, n))
    tree = cKDTree(X) if C.kappa > 16 and m > 64 else None
    for i in P.order:
        S = C.strata[i]
        if S.dim != layer:
            lower += layer_sum
            lower_grad += layer_grad
            layer_sum = np.zeros(m)
            layer_grad = np.zeros((m, n))
            layer = S.dim
        delta = P.profiles.delta(S.id)
        rows = candidate_rows(C, S, delta, tree) if tree is not None else slice(None)
        psi, dpsi = stratum_bump(P.bump, C, S, delta, X[rows])
        rest = 1.0 - lower[rows]
        values[rows, i] = psi * rest
        grads[rows, i] = dpsi * rest[:, None] - psi[:, None] * lower_grad[rows]
        layer_sum += values[:, i]
        layer_grad += grads[:, i]
    return values, grads


def eval_member(P, key, X):
    """Value and gradient of the member of one stratum at the rows of X."""
    S = P.complex.stratum(key)
    values, grads = eval_all(P, X)
    return values[:, S.index], grads[:, S.index]


def verify_partition(P, samples=10_000, seed=0, tube_samples=200, tol=DEFAULT):
    """Sampled certificate of the partition properties.

    The sum identity is checked on ``samples`` points of A. Support and the
    gradient ratio r* = sup d(x, S) |grad phi_S(x)| / mu are measured on the
    same points plus ``tube_samples`` ambient points in each tube.
    """
    C = P.complex
    rng = make_rng(seed)
    loc = sample_complex(C, samples, rng)
    tubes = [sample_tube(C, S, P.profiles.delta(S.id), tube_samples, rng)
             for S in C.strata if S.dim < C.ambient_dim]
    X = np.vstack([loc.X] + tubes)
    values, grads = eval_all(P, X)
    on_a = slice(0, len(loc))

    total = values[on_a].sum(axis=1)
    sum_err = float(np.abs(total - 1.0).max()) if len(loc) else 0.0

    support_violations = 0
    r_star = 0.0
    literal = 0.0
    worst = None
    tree = cKDTree(X)
    for S in C.strata:
        delta = P.profiles.delta(S.id)
        rows = candidate_rows(C, S, delta, tree)
        far = np.ones(X.shape[0], dtype=bool)
        far[rows] = False
        support_violations += int(np.count_nonzero(values[far, S.index] != 0))
        _, dist, inside = closest_points(C, S, X[rows])
        in_tube = inside & (dist < delta)
        support_violations += int(np.count_nonzero((values[rows, S.index] != 0) & ~in_tube))
        g = np.linalg.norm(grads[rows, S.index], axis=1)
        live = in_tube & (dist > tol.on_stratum)
        if live.any():
            ratio = dist[live] * g[live]
            j = int(np.argmax(ratio))
            if ratio[j] / P.bump.mu > r_star:
                r_star = float(ratio[j] / P.bump.mu)
                worst = {"stratum": S.id, "point": X[rows][live][j].tolist()}
            literal = max(literal, float(ratio.max() / P.mu))
    ok = (sum_err <= tol.partition_sum and support_violations == 0 and r_star <= C.kappa)
    report = {
        "sum_err": sum_err,
        "support_violations": support_violations,
        "r_star": r_star,
        "kappa": C.kappa,
        "samples": int(len(loc)),
        "tube_samples": int(X.shape[0] - len(loc)),
        "worst": worst,
        "mu": P.mu,
        "bump_mu": P.bump.mu,
        "renormalized": P.renormalized,
        "literal_ratio": literal,
    }
    if P.renormalized:
        report["literal_bound_holds"] = literal <= 1.0 + 1e-9
        ok = ok and report["literal_bound_holds"]
    report["pass"] = bool(ok)
    return report
