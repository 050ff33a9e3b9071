import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from stratsmooth import fixtures
from stratsmooth.bump import BumpFamily, b_threshold, certify_grid, phi, psi, stratum_bump
from stratsmooth.errors import InputError
from stratsmooth.sampling import make_rng, sample_tube
from stratsmooth.stratified import closest_points

UNIT = BumpFamily.from_exponent(1.0)


def test_internal_exponent():
    assert BumpFamily(0.4).mu_internal == pytest.approx(0.05)
    assert UNIT.mu_internal == 1.0


def test_phi_vanishes_on_diagonal():
    assert phi(BumpFamily(0.3), 0.4, 0.4)[0] == pytest.approx(0, abs=1e-12)


def test_b_threshold_unit_exponent():
    b = b_threshold(UNIT, 0.5)
    assert b == pytest.approx(1 / 6, abs=1e-15)
    # cross-check: the root of phi = 1 in (0, z), found independently
    root = brentq(lambda y: (1 + 0.5) * (1 - y / 0.5) - 1, 1e-12, 0.5, xtol=1e-15)
    assert b == pytest.approx(root, abs=1e-12)
    assert phi(UNIT, b, 0.5)[0] == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("B", [UNIT, BumpFamily(0.4)])
def test_phi_partials_match_differences(B):
    z = np.linspace(0.05, 0.9, 50)
    frac = np.linspace(0.05, 0.95, 50)
    Y = (frac[:, None] * z[None, :]).ravel()
    Z = np.broadcast_to(z, (50, 50)).ravel()
    _, dy, dz = phi(B, Y, Z)
    h = 1e-7
    fd_y = (phi(B, Y + h, Z)[0] - phi(B, Y - h, Z)[0]) / (2 * h)
    fd_z = (phi(B, Y, Z + h)[0] - phi(B, Y, Z - h)[0]) / (2 * h)
    np.testing.assert_allclose(fd_y, dy, rtol=1e-5)
    np.testing.assert_allclose(fd_z, dz, rtol=1e-5)


def test_b_below_z_and_ratio_shrinks():
    B = BumpFamily(0.8)
    z = np.geomspace(1e-3, 0.99, 200)
    b = b_threshold(B, z)
    assert np.all((b > 0) & (b < z))
    assert np.all(np.diff(b / z) > 0)


def test_out_of_domain():
    B = BumpFamily(0.5)
    with pytest.raises(InputError):
        b_threshold(B, 1.0)
    with pytest.raises(InputError):
        phi(B, 0.6, 0.5)
    with pytest.raises(InputError):
        psi(B, -0.1, 0.5)
    with pytest.raises(InputError):
        BumpFamily(0.0)


def test_psi_examples():
    B = BumpFamily(0.5)
    assert psi(B, 0.0, 0.5) == (1.0, 0.0, 0.0)
    assert psi(B, 0.7, 0.5) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("mu", [0.8, 0.4, 0.1])
def test_grid_certificate(mu):
    rep = certify_grid(mu)
    assert rep["pass"], rep
    assert rep["max_y_dy_over_mu"] <= 1


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.05, 0.9), st.floats(0.05, 0.9))
def test_psi_monotone_and_bounded(mu, z, frac):
    B = BumpFamily(mu)
    y = np.sort(np.concatenate([[0.0], z * np.geomspace(1e-6, 1.5, 64), [frac * z]]))
    v, dy, dz = psi(B, y, np.full(y.size, z))
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(np.diff(v) <= 0)
    assert np.all(y * np.abs(dy) <= mu * (1 + 1e-9))
    assert np.all(np.abs(dz) <= 4 + mu / z + 1e-9)


def test_plateau_continuity():
    B = BumpFamily(0.8)
    z = 0.5
    b = b_threshold(B, z)
    assert abs(psi(B, b + 1e-9 * b, z)[0] - 1) <= 1e-12


def test_definability_note_mentions_fraction():
    assert "2/5" in BumpFamily(0.4).definability_note()


def test_stratum_bump_on_and_off_stratum():
    C = fixtures.load("square")
    B = BumpFamily(0.2)
    v, g = stratum_bump(B, C, "s0", 0.1, [[0.5, 0.0], [0.5, 0.3], [0.5, 0.1]])
    np.testing.assert_array_equal(v, [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(g, 0.0)


def test_stratum_bump_gradient_and_bound():
    C = fixtures.load("v")
    B = BumpFamily(0.3)
    rng = make_rng(5)
    for key, delta in (("apex", 0.2), ("arm1", 0.15)):
        X = sample_tube(C, key, delta, 400, rng, max_fraction=0.9)
        _, dist, inside = closest_points(C, key, X)
        X, dist = X[inside], dist[inside]
        v, g = stratum_bump(B, C, key, delta, X)
        assert np.all(dist * np.linalg.norm(g, axis=1) <= B.mu * (1 + 1e-9))
        moving = np.linalg.norm(g, axis=1) > 1e-3
        for x, grad in zip(X[moving][:100], g[moving][:100]):
            h = 1e-4 * np.linalg.norm(x - closest_points(C, key, [x])[0][0])
            fd = [(stratum_bump(B, C, key, delta, [x + h * e])[0][0]
                   - stratum_bump(B, C, key, delta, [x - h * e])[0][0]) / (2 * h) for e in np.eye(2)]
            np.testing.assert_allclose(fd, grad, rtol=1e-4, atol=1e-6 * np.linalg.norm(grad))
