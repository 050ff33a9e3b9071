"""Seeded samplers on a stratified complex and in its tubes.

All randomness goes through ``numpy.random.Generator`` (PCG64) created from an
integer seed, so a fixed seed reproduces every sample.
"""

import numpy as np

from . import geometry
from .stratified import Located, locate


def make_rng(seed):
    return np.random.default_rng(np.random.PCG64(seed))


def _volume(V):
    D = V[1:] - V[0]
    if D.shape[0] == 0:
        return 1.0
    g = np.linalg.det(D @ D.T)
    return float(np.sqrt(max(g, 0.0)))


def sample_complex(C, n, rng, stratum_share=0.2):
    """Points of A: most drawn uniformly from maximal simplices, the rest
    spread over the open cells of every stratum (vertices included)."""
    tops = [s for s in C.maximal if C.simplex_stratum[s] >= 0]
    cells = [i for i in range(len(C.simplices)) if C.simplex_stratum[i] >= 0]
    n_cells = min(int(round(n * stratum_share)), n)
    n_top = n - n_cells if tops else 0
    n_cells = n - n_top
    Xs, simp = [], []
    if n_top:
        by_dim = {}
        for s in tops:
            by_dim.setdefault(len(C.simplices[s]) - 1, []).append(s)
        dims = sorted(by_dim)
        counts = rng.multinomial(n_top, np.full(len(dims), 1.0 / len(dims)))
        for d, cnt in zip(dims, counts):
            group = by_dim[d]
            w = np.array([_volume(C.vertices_of(s)) for s in group])
            pick = rng.choice(len(group), size=cnt, p=w / w.sum())
            for g in np.unique(pick):
                k = int((pick == g).sum())
                s = group[g]
                lam = rng.dirichlet(np.ones(d + 1), size=k)
                Xs.append(lam @ C.vertices_of(s))
                simp.extend([s] * k)
    if n_cells:
        pick = rng.choice(len(cells), size=n_cells)
        for g in np.unique(pick):
            k = int((pick == g).sum())
            s = cells[g]
            d = len(C.simplices[s]) - 1
            lam = rng.dirichlet(np.ones(d + 1), size=k)
            Xs.append(lam @ C.vertices_of(s))
            simp.extend([s] * k)
    X = np.vstack(Xs) if Xs else np.zeros((0, C.ambient_dim))
    simp = np.array(simp, dtype=int)
    return Located(X, simp, C.simplex_stratum[simp])


def sample_stratum(C, S, n, rng):
    """Random points of the stratum S (on its member simplices' interiors)."""
    S = C.stratum(S)
    pick = rng.choice(len(S.members), size=n)
    X = np.zeros((n, C.ambient_dim))
    for j, s in enumerate(S.members):
        rows = np.flatnonzero(pick == j)
        lam = rng.dirichlet(np.ones(S.dim + 1), size=rows.size)
        X[rows] = lam @ C.vertices_of(s)
    return X


def sample_tube(C, S, delta, n, rng, max_fraction=1.0):
    """Ambient points p + t u with p on S, u a unit normal, 0 < t < delta.

    Distances are drawn log-uniformly over (delta 1e-6, delta max_fraction)
    so the transition layer of the bump is covered at every scale.
    """
    S = C.stratum(S)
    P = sample_stratum(C, S, n, rng)
    if S.dim == C.ambient_dim:
        return P
    t = delta * max_fraction * np.exp(rng.uniform(np.log(1e-6), 0.0, size=n))
    U = rng.normal(size=(n, C.ambient_dim))
    B = S.tangent.basis
    U -= (U @ B.T) @ B
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return P + t[:, None] * U


def sample_near(C, center, radius, n, rng):
    """Points of A within ``radius`` of ``center`` (not uniform)."""
    center = np.asarray(center, dtype=float)
    cands = []
    for s in C.maximal_near(center[None, :], radius):
        V = C.vertices_of(s)
        c, d, _ = geometry.closest_points_simplex(V, center[None, :])
        if d[0] < radius:
            cands.append((s, c[0], radius - d[0]))
    if not cands:
        return locate(C, np.zeros((0, C.ambient_dim)))
    pick = rng.choice(len(cands), size=n)
    X = np.zeros((n, C.ambient_dim))
    for j, (s, c, rho) in enumerate(cands):
        rows = np.flatnonzero(pick == j)
        if rows.size == 0:
            continue
        V = C.vertices_of(s)
        lam = rng.dirichlet(np.ones(V.shape[0]), size=rows.size)
        P = lam @ V
        span = np.linalg.norm(P - c, axis=1)
        scale = rho * rng.uniform(0.0, 1.0, size=rows.size) * 0.999
        with np.errstate(invalid="ignore", divide="ignore"):
            f = np.where(span > 0, np.minimum(1.0, scale / span), 0.0)
        X[rows] = c + f[:, None] * (P - c)
    loc = locate(C, X, strict=False)
    return loc.subset(loc.stratum >= 0)


def grid_on_simplex(V, spacing, max_points=20000):
    """Barycentric grid on the closed simplex with roughly the given spacing."""
    V = np.asarray(V, dtype=float)
    k = V.shape[0] - 1
    if k == 0:
        return V.copy()
    diam = geometry.diameter(V)
    m = max(1, int(np.ceil(diam / spacing)))
    while k >= 2 and (m + 1) ** k > max_points and m > 1:
        m = max(1, m // 2)
    if k == 1:
        m = min(m, max_points)
        t = np.linspace(0.0, 1.0, m + 1)
        return (1 - t)[:, None] * V[0] + t[:, None] * V[1]
    pts = []
    for face in geometry.faces(range(k + 1)):
        lam = geometry.grid_barycentric(len(face) - 1, m)
        if lam.shape[0] == 0:
            continue
        pts.append(lam @ V[list(face)])
    return np.vstack(pts)
