"""C^1 bump functions with logarithmic-scale transition.

For an exponent ``a > 0`` define on 0 < y <= z < 1

    phi(y, z) = (1 + z) * (1 - (y / z) ** a)
    b(z)      = z ** (1/a + 1) / (1 + z) ** (1/a)
    psi(y, z) = 1                           for y <= b(z)
              = 1 - (1 - phi(y, z)**2)**2    for b(z) < y < z
              = 0                           for y >= z

so that phi(b(z), z) = 1 and phi(z, z) = 0. With ``a = mu / 8`` one gets
``y |d psi/dy| <= mu`` and ``|d psi/dz| <= 4 + mu / z``.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .config import DEFAULT
from .errors import InputError

_TINY_RATIO = 1e-300


@dataclass(frozen=True)
class BumpFamily:
    mu: float

    def __post_init__(self):
        if not (self.mu > 0 and np.isfinite(self.mu)):
            raise InputError(f"mu must be positive, got {self.mu}")

    @property
    def mu_internal(self):
        return self.mu / 8.0

    @classmethod
    def from_exponent(cls, exponent):
        return cls(8.0 * exponent)

    def definability_note(self):
        frac = Fraction(self.mu).limit_denominator(10 ** 6)
        return (f"mu={self.mu!r} is used as the rational {frac}; the bump is definable "
                "in an o-minimal structure only for rational exponents")


def _check_z(z):
    z = np.asarray(z, dtype=float)
    if np.any(~((z > 0) & (z < 1))):
        raise InputError("z must lie in (0, 1)")
    return z


def _pow_ratio(y, z, a):
    """(y/z)**a computed through exp/log, exact 0 for y = 0."""
    r = y / z
    with np.errstate(divide="ignore"):
        return np.where(r > _TINY_RATIO, np.exp(a * np.log(np.maximum(r, _TINY_RATIO))), 0.0)


def phi(B, y, z):
    """Return phi and its partials (value, d/dy, d/dz) on 0 < y <= z < 1."""
    y = np.asarray(y, dtype=float)
    z = _check_z(z)
    if np.any(~((y > 0) & (y <= z))):
        raise InputError("phi requires 0 < y <= z")
    return _phi(B.mu_internal, y, z)


def _phi(a, y, z):
    p = _pow_ratio(y, z, a)
    value = (1 + z) * (1 - p)
    with np.errstate(divide="ignore", invalid="ignore"):
        dy = np.where(y > 0, -(1 + z) * a * p / np.where(y > 0, y, 1.0), 0.0)
    dz = 1 - p + (1 + z) * a * p / z
    return value, dy, dz


def b_threshold(B, z):
    """Plateau radius b(z) = z (z/(1+z))**(1/a); lies in (0, z)."""
    z = _check_z(z)
    a = B.mu_internal
    return z * np.exp(np.log(z / (1 + z)) / a)


def psi(B, y, z):
    """Bump value and analytic partials, vectorized.

    Returns ``(value, dy, dz)``. Both plateaus are exact branches: ``1.0`` for
    ``y <= b(z)`` and ``0.0`` for ``y >= z``, with zero partials there.
    """
    y = np.asarray(y, dtype=float)
    z = _check_z(z)
    if np.any(y < 0):
        raise InputError("psi requires y >= 0")
    y, z = np.broadcast_arrays(y, z)
    a = B.mu_internal
    bz = z * np.exp(np.log(z / (1 + z)) / a)
    value = np.zeros(y.shape)
    dy = np.zeros(y.shape)
    dz = np.zeros(y.shape)
    top = (y <= bz) | (y / z <= _TINY_RATIO)
    mid = ~top & (y < z)
    value[top] = 1.0
    if mid.any():
        ph, ph_y, ph_z = _phi(a, y[mid], z[mid])
        value[mid] = 1.0 - (1.0 - ph ** 2) ** 2
        factor = 4.0 * ph * (1.0 - ph ** 2)
        dy[mid] = factor * ph_y
        dz[mid] = factor * ph_z
    if value.ndim == 0:
        return float(value), float(dy), float(dz)
    return value, dy, dz


def stratum_bump(B, C, S, delta, X, snap=DEFAULT.on_stratum):
    """Composite bump x -> psi(d(x, S), delta) with a constant profile delta.

    Returns ``(values, gradients)`` for the rows of X. The gradient is
    ``dpsi/dy * (x - foot)/|x - foot|``; the chain-rule term through delta
    vanishes because delta is constant. Outside the retraction domain the
    bump is extended by zero.

    Distances up to ``snap`` count as zero: the plateau radius b(delta) is far
    below float resolution for small mu, and points of S carry rounding noise.
    """
    from .stratified import closest_points

    X = np.atleast_2d(np.asarray(X, dtype=float))
    feet, dist, inside = closest_points(C, S, X)
    dist = np.where(dist <= snap, 0.0, dist)
    values = np.zeros(X.shape[0])
    grads = np.zeros_like(X)
    rows = np.flatnonzero(inside & (dist < delta))
    if rows.size:
        v, dy, _ = psi(B, dist[rows], np.full(rows.size, float(delta)))
        values[rows] = v
        moving = dy != 0.0
        if moving.any():
            r = rows[moving]
            unit = (X[r] - feet[r]) / dist[r][:, None]
            grads[r] = dy[moving][:, None] * unit
    return values, grads


def certify_grid(mu, ny=200, zs=None, rtol=1e-4, slack=1e-9, floor=1e-8):
    """Check the derivative bounds and the analytic partials on a (y, z) grid.

    y runs over ``ny`` points in (0, z), half log-spaced in y/z and half
    linear, so both the long logarithmic transition and the outer junction are
    covered. Partials are compared with central differences of relative step
    1e-6.
    """
    B = BumpFamily(float(mu))
    zs = np.linspace(0.1, 0.9, 9) if zs is None else np.asarray(zs, dtype=float)
    k = ny // 2
    ratios = np.unique(np.concatenate([np.geomspace(1e-12, 0.5, k, endpoint=False),
                                       np.linspace(0.5, 1.0, ny - k + 1)[:-1]]))
    Y = (ratios[:, None] * zs[None, :]).ravel()
    Z = np.broadcast_to(zs, (ratios.size, zs.size)).ravel()
    v, dy, dz = psi(B, Y, Z)
    y_ratio = float((Y * np.abs(dy)).max() / B.mu)
    dz_excess = float((np.abs(dz) - (4 + B.mu / Z)).max())
    hy = 1e-6 * Y
    hz = 1e-6 * np.minimum(Z, 1 - Z)
    fd_y = (psi(B, Y + hy, Z)[0] - psi(B, Y - hy, Z)[0]) / (2 * hy)
    fd_z = (psi(B, Y, Z + hz)[0] - psi(B, Y, Z - hz)[0]) / (2 * hz)
    err_y = np.abs(fd_y - dy) / np.maximum(np.abs(dy), floor)
    err_z = np.abs(fd_z - dz) / np.maximum(np.abs(dz), floor)
    report = {
        "mu": B.mu,
        "points": int(Y.size),
        "max_y_dy_over_mu": y_ratio,
        "max_dz_excess": dz_excess,
        "max_rel_err_dy": float(err_y.max()),
        "max_rel_err_dz": float(err_z.max()),
        "monotone": bool(np.all(np.diff(v.reshape(ratios.size, zs.size), axis=0) <= 0)),
        "definability_note": B.definability_note(),
    }
    report["pass"] = bool(y_ratio <= 1 + slack and dz_excess <= slack
                          and report["max_rel_err_dy"] <= rtol
                          and report["max_rel_err_dz"] <= rtol and report["monotone"])
    return report
