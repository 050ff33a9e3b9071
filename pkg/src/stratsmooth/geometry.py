"""Low-level simplex geometry: closest points, barycentric coordinates, heights."""

from itertools import combinations

import numpy as np


def faces(vertices):
    """All nonempty faces of a vertex tuple, as sorted tuples."""
    vs = tuple(sorted(vertices))
    out = []
    for k in range(1, len(vs) + 1):
        out.extend(combinations(vs, k))
    return out


def min_height(V):
    """Smallest distance from a vertex to the affine span of the others."""
    V = np.asarray(V, dtype=float)
    k = V.shape[0]
    if k == 1:
        return np.inf
    best = np.inf
    for i in range(k):
        others = np.delete(V, i, axis=0)
        base = others[0]
        D = (others[1:] - base).T
        r = V[i] - base
        if D.shape[1]:
            coef, *_ = np.linalg.lstsq(D, r, rcond=None)
            r = r - D @ coef
        best = min(best, float(np.linalg.norm(r)))
    return best


def diameter(V):
    V = np.asarray(V, dtype=float)
    if V.shape[0] < 2:
        return 0.0
    diffs = V[:, None, :] - V[None, :, :]
    return float(np.sqrt((diffs ** 2).sum(-1)).max())


def _affine_projection(V, X):
    """Project rows of X onto aff(V); return (points, barycentric weights)."""
    base = V[0]
    D = V[1:] - base
    m = X.shape[0]
    if D.shape[0] == 0:
        return np.repeat(base[None, :], m, axis=0), np.ones((m, 1))
    G = D @ D.T
    coef = np.linalg.solve(G, D @ (X - base).T).T
    lam = np.column_stack([1.0 - coef.sum(axis=1), coef])
    return base + coef @ D, lam


def closest_points_simplex(V, X):
    """Closest points of the closed simplex conv(V) to each row of X.

    Exact: enumerates faces, keeps affine projections whose barycentric
    weights are nonnegative, and takes the nearest. Returns
    ``(points, dists, lam)`` where ``lam`` are barycentric weights w.r.t. V.
    """
    V = np.asarray(V, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    k = V.shape[0]
    m = X.shape[0]
    best_d = np.full(m, np.inf)
    best_p = np.zeros_like(X)
    best_lam = np.zeros((m, k))
    for face in faces(range(k)):
        idx = list(face)
        P, lam = _affine_projection(V[idx], X)
        ok = np.all(lam >= -1e-13, axis=1)
        d = np.linalg.norm(X - P, axis=1)
        better = ok & (d < best_d)
        if not better.any():
            continue
        best_d[better] = d[better]
        best_p[better] = P[better]
        full = np.zeros((better.sum(), k))
        full[:, idx] = np.clip(lam[better], 0.0, None)
        full /= full.sum(axis=1, keepdims=True)
        best_lam[better] = full
    return best_p, best_d, best_lam


def barycentric(V, X):
    """Barycentric coordinates of the affine projection of X onto aff(V)."""
    V = np.asarray(V, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _, lam = _affine_projection(V, X)
    return lam


def simplex_distance(V, W):
    """Euclidean distance between two closed simplices (exact, face enumeration)."""
    V = np.asarray(V, dtype=float)
    W = np.asarray(W, dtype=float)
    best = np.inf
    for fv in faces(range(V.shape[0])):
        A = V[list(fv)]
        for fw in faces(range(W.shape[0])):
            B = W[list(fw)]
            # minimize |a0 + Da s - b0 - Db t| over free s, t
            Da = (A[1:] - A[0]).T
            Db = (B[1:] - B[0]).T
            M = np.hstack([Da, -Db])
            r = B[0] - A[0]
            if M.shape[1]:
                coef, *_ = np.linalg.lstsq(M, r, rcond=None)
                s, t = coef[: Da.shape[1]], coef[Da.shape[1]:]
                if (s < -1e-13).any() or s.sum() > 1 + 1e-13:
                    continue
                if (t < -1e-13).any() or t.sum() > 1 + 1e-13:
                    continue
                gap = A[0] + Da @ s - B[0] - Db @ t
            else:
                gap = A[0] - B[0]
            best = min(best, float(np.linalg.norm(gap)))
    return best


def grid_barycentric(k, m):
    """Integer compositions of m into k+1 positive parts, divided by m.

    These are the grid points of the m-subdivision lying in the relative
    interior of a k-simplex.
    """
    if k == 0:
        return np.ones((1, 1))
    if m < k + 1:
        return np.zeros((0, k + 1))
    out = []

    def rec(prefix, remaining, parts):
        if parts == 1:
            out.append(prefix + [remaining])
            return
        for a in range(1, remaining - parts + 2):
            rec(prefix + [a], remaining - a, parts - 1)

    rec([], m, k + 1)
    return np.array(out, dtype=float) / m


def affine_jacobian(V, values):
    """Differential of the affine interpolant of ``values`` on conv(V).

    Returns a (k, n) matrix acting on ambient vectors; it annihilates the
    orthogonal complement of the simplex's tangent space.
    """
    V = np.asarray(V, dtype=float)
    values = np.asarray(values, dtype=float)
    n = V.shape[1]
    kout = values.shape[1]
    if V.shape[0] == 1:
        return np.zeros((kout, n))
    D = V[1:] - V[0]
    dF = values[1:] - values[0]
    return dF.T @ np.linalg.pinv(D).T
