"""Linear subspaces of R^n: bases, projections and the one-sided angle.

The angle used throughout is

    angle(E, F) = sup { d(u, F) : u in E, |u| <= 1 },

which is *not* symmetric in general. It equals the largest singular value of
``(I - P_F) P_E``. A symmetric gap metric is deliberately not provided.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .config import DEFAULT
from .errors import InputError, PreconditionError


@dataclass(frozen=True, eq=False)
class Subspace:
    """Orthonormal basis of a linear subspace, stored as rows."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float).reshape(-1, self.ambient_dim)
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self):
        return self.basis.shape[0]

    def projector(self):
        return self.basis.T @ self.basis

    def complement(self):
        if self.dim == 0:
            return Subspace(self.ambient_dim, np.eye(self.ambient_dim))
        if self.dim == self.ambient_dim:
            return zero(self.ambient_dim)
        null = linalg.null_space(self.basis)
        return Subspace(self.ambient_dim, null.T)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def zero(ambient_dim):
    return Subspace(ambient_dim, np.zeros((0, ambient_dim)))


def _check_dim(S, v):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != S.ambient_dim:
        raise InputError(
            f"vector of dimension {v.shape[-1]} used with a subspace of R^{S.ambient_dim}"
        )
    return v


def orthonormalize(vectors, ambient_dim=None, tol=DEFAULT.rank_drop):
    """Gram-Schmidt with one re-orthogonalization pass.

    Vectors whose residual norm falls below ``tol`` are dropped, so
    rank-deficient input is accepted.
    """
    vecs = [np.asarray(v, dtype=float).ravel() for v in vectors]
    if not vecs:
        if ambient_dim is None:
            raise InputError("ambient_dim is required for an empty vector list")
        return zero(ambient_dim)
    n = vecs[0].shape[0]
    if any(v.shape[0] != n for v in vecs):
        raise InputError("vectors have mismatched dimensions")
    if ambient_dim is not None and ambient_dim != n:
        raise InputError(f"vectors live in R^{n}, expected R^{ambient_dim}")
    basis = []
    for v in vecs:
        r = v.copy()
        for _ in range(2):
            for q in basis:
                r -= (q @ r) * q
        norm = np.linalg.norm(r)
        if norm < tol:
            continue
        basis.append(r / norm)
    return Subspace(n, np.array(basis).reshape(-1, n))


def span(vectors, ambient_dim=None):
    return orthonormalize(vectors, ambient_dim)


def project(S, v):
    v = _check_dim(S, v)
    return (v @ S.basis.T) @ S.basis


def angle(E, F):
    """One-sided angle sup_{u in E, |u|<=1} d(u, F), in [0, 1].

    The zero subspace has angle 0 to anything (supremum over the empty set of
    unit vectors is taken as 0).
    """
    if E.ambient_dim != F.ambient_dim:
        raise InputError("subspaces live in different ambient spaces")
    if E.dim == 0:
        return 0.0
    residual = E.basis - (E.basis @ F.basis.T) @ F.basis
    s = np.linalg.norm(residual, 2)
    return float(min(max(s, 0.0), 1.0))


def intersection(E, F, tol=DEFAULT.rank_drop):
    """E intersected with F, via the null space of the stacked complement test."""
    if E.ambient_dim != F.ambient_dim:
        raise InputError("subspaces live in different ambient spaces")
    n = E.ambient_dim
    if E.dim == 0 or F.dim == 0:
        return zero(n)
    # u = E^T a lies in F iff (I - P_F) E^T a = 0
    M = E.basis.T - F.basis.T @ (F.basis @ E.basis.T)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > tol))
    coeffs = vh[rank:]
    if coeffs.shape[0] == 0:
        return zero(n)
    return orthonormalize(list(coeffs @ E.basis), n)


def min_distance_to_complement(T, F):
    """inf over unit v in T of d(v, F^perp), i.e. the smallest |P_F v|.

    For T = {0} the infimum is over an empty set; we return 1.0 (the largest
    value d(v, F^perp) can take) so the angle-cap inequality reduces to
    angle(E, F) <= 2 angle(E, F).
    """
    if T.dim == 0:
        return 1.0
    if F.dim == 0:
        return 0.0
    s = np.linalg.svd(F.basis @ T.basis.T, compute_uv=False)
    if s.shape[0] < T.dim:
        return 0.0
    return float(s.min())


@dataclass(frozen=True)
class AngleCapReport:
    lhs: float
    rhs: float
    holds: bool
    inf_distance: float


def check_angle_cap(E, F, T, tol=DEFAULT):
    """Compare angle(E & T^perp, F & T^perp) with 2 angle(E, F) / inf_{v in T} d(v, F^perp)."""
    if not (E.ambient_dim == F.ambient_dim == T.ambient_dim):
        raise InputError("subspaces live in different ambient spaces")
    inf_d = min_distance_to_complement(T, F)
    if inf_d <= tol.angle_hypothesis:
        raise PreconditionError(
            f"T meets F^perp nontrivially: inf over unit v in T of d(v, F^perp) = {inf_d:.3e}",
            location={"inf_distance": inf_d},
        )
    Tp = T.complement()
    lhs = angle(intersection(E, Tp), intersection(F, Tp))
    rhs = 2.0 * angle(E, F) / inf_d
    return AngleCapReport(lhs, rhs, lhs <= rhs + tol.angle_cap_slack, inf_d)
