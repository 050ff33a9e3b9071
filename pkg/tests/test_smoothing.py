import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratsmooth import fixtures
from stratsmooth.errors import InputError, LipschitzViolation
from stratsmooth.maps import PLMap
from stratsmooth.partition import eval_all
from stratsmooth.smoothing import (eval_smoothed, lipschitz_estimate, mcshane_extend,
                                   pair_ratios, retract_map, separation, separation_map,
                                   smooth, verify_smoothing)
from stratsmooth.stratified import load_complex


@pytest.fixture(scope="module")
def abs_smoothed():
    C = fixtures.load("abs")
    f = PLMap(C, np.abs(C.points[:, 0]))
    return f, smooth(f, 0.1, 0.05)


def test_retract_map_examples():
    C = fixtures.load("filled_square")
    f = PLMap(C, C.points[:, 0])
    r = retract_map(f, "s0")
    np.testing.assert_allclose(r.value([[0.3, 0.2]]), [[0.3]])
    np.testing.assert_allclose(r.value([[0.3, 0.0]]), [[0.3]])
    with pytest.raises(InputError):
        r.value([[1.3, 0.2]])


def test_apex_plateau(abs_smoothed):
    f, g = abs_smoothed
    ev = eval_smoothed(g, [[0.0]])
    assert ev["value"][0, 0] == 0.0 and ev["norm"][0] == 0.0
    t = 0.5 * g.partition.profiles.delta("o")
    # outside the apex tube the smoothing reproduces the linear pieces
    np.testing.assert_allclose(eval_smoothed(g, [[0.5]])["value"], [[0.5]])
    assert np.all(np.abs(g.value([[-t], [t]])[:, 0] - t) < 0.05)


def test_certificates_on_abs(abs_smoothed):
    _, g = abs_smoothed
    rep = verify_smoothing(g, samples=4000)
    assert rep["pass"] and rep["modulus_kind"] == "exact"
    assert rep["approx_max_err"] < 0.05 and rep["C_measured"] <= 3


def test_linear_map_is_reproduced():
    C = fixtures.load("filled_square")
    f = PLMap(C, C.points @ [1.0, -2.0])
    g = smooth(f, 0.2, 0.01)
    X = np.random.default_rng(0).uniform(0, 1, size=(300, 2))
    values, _ = eval_all(g.partition, X)
    deep = values[:, C.stratum("inside").index] == 1.0
    assert deep.sum() > 200
    np.testing.assert_allclose(g.value(X[deep]), f.value(X[deep]), atol=1e-12)
    assert np.abs(g.value(X) - f.value(X)).max() < 0.01


def test_v_slopes_derivative_margin():
    C = fixtures.load("v")
    f = PLMap(C, [0.0, math.sqrt(2), 3 * math.sqrt(2)])
    g = smooth(f, 0.1, 0.05)
    rep = verify_smoothing(g, samples=3000)
    assert rep["pass"], rep


def test_smoothed_pair_bound_on_abs(abs_smoothed):
    _, g = abs_smoothed
    est = lipschitz_estimate(g, samples=300, sources=15)
    assert est["pair_bound"] <= 1.1 + 1e-3


def test_lipschitz_estimates():
    C = load_complex({"ambient_dim": 2, "points": [[0, 0], [1, 0], [0, 1]],
                      "simplices": [{"vertices": [0, 1, 2]}],
                      "strata": [{"id": "t", "dim": 2, "simplices": [0]}]})
    f = PLMap(C, C.points @ [3.0, 4.0])
    est = lipschitz_estimate(f, samples=200, sources=10, include_vertices=False)
    assert est["modulus_bound"] == pytest.approx(5.0)
    assert est["pair_bound"] == pytest.approx(5.0, rel=0.01)
    C = fixtures.load("abs")
    est = lipschitz_estimate(PLMap(C, np.abs(C.points[:, 0])), samples=200, sources=10)
    assert est["modulus_bound"] == pytest.approx(1.0)
    assert est["pair_bound"] == pytest.approx(1.0, rel=1e-9)


def test_mcshane_two_points():
    F = mcshane_extend([[0.0], [2.0]], [0.0, 2.0], 1.0)
    assert F([[1.0]])[0, 0] == 1.0
    np.testing.assert_array_equal(F([[0.0], [2.0]])[:, 0], [0.0, 2.0])


def test_mcshane_rejects_steep_data():
    with pytest.raises(LipschitzViolation) as err:
        mcshane_extend([[0.0], [1.0]], [0.0, 2.0], 1.0)
    assert err.value.location["pair"] in ([0, 1], [1, 0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_mcshane_pair_ratios(seed):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1, 1, size=(50, 2))
    vals = np.sin(3 * A[:, 0]) + A[:, 1] ** 2
    d = np.linalg.norm(A[:, None] - A[None], axis=2)
    off = d > 0
    L = float((np.abs(vals[:, None] - vals[None])[off] / d[off]).max())
    F = mcshane_extend(A, vals, L)
    X, Y = rng.uniform(-2, 2, size=(500, 2)), rng.uniform(-2, 2, size=(500, 2))
    assert pair_ratios(F, X, Y).max() <= L * (1 + 1e-9)


def test_mcshane_vector_inflation():
    F = mcshane_extend([[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [1.0, 1.0]], 1.0)
    assert F.inflation == pytest.approx(math.sqrt(2))
    assert F.report()["components"] == 2


def test_separation_on_line():
    C = fixtures.load("line")
    f, eps, _, _ = separation_map(C, ["a"], ["b"])
    np.testing.assert_allclose(f.value([[-1.0], [1.0]])[:, 0], [2.0, -2.0])
    g, rep = separation(C, ["a"], ["b"], 0.2, samples=200)
    assert g.value([[-1.0]])[0, 0] > 1.0
    assert rep["pass"]


def test_separation_rejects_touching_sets():
    C = fixtures.load("v")
    with pytest.raises(InputError):
        separation_map(C, ["arm1"], ["arm2"])
