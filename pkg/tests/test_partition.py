import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratsmooth import fixtures
from stratsmooth.errors import InputError
from stratsmooth.partition import build_partition, eval_all, eval_member, verify_partition
from stratsmooth.sampling import make_rng, sample_complex, sample_tube
from stratsmooth.stratified import closest_points
from stratsmooth.tubes import choose_profiles


def _segment(delta=0.25, mu=0.25):
    C = fixtures.load("segment")
    return build_partition(C, {"v-": delta, "v+": delta, "e": delta}, mu)


def test_vertex_member_is_one_at_vertex():
    P = _segment()
    values, _ = eval_all(P, [[-1.0, 0.0]])
    by_id = dict(zip([S.id for S in P.complex.strata], values[0]))
    assert by_id == {"v-": 1.0, "v+": 0.0, "e": 0.0}


def test_edge_member_is_one_at_midpoint():
    P = _segment()
    v, g = eval_member(P, "e", [[0.0, 0.0]])
    assert v[0] == 1.0
    np.testing.assert_array_equal(g, 0)


def test_member_vanishes_far_away():
    P = _segment()
    v, g = eval_member(P, "v+", [[-0.5, 0.1]])
    assert v[0] == 0.0 and not g.any()


def test_plateau_gradient_is_minus_lower_sum():
    C = fixtures.load("v")
    P = build_partition(C, choose_profiles(C, 0.3), 0.3)
    delta = P.profiles.delta("apex")
    t = 0.5 * delta / np.sqrt(2)
    X = np.array([[t, t]])
    values, grads = eval_all(P, X)
    arm = C.stratum("arm1").index
    lower = [S.index for S in C.strata if S.dim == 0]
    assert values[0, arm] > 0
    np.testing.assert_allclose(grads[0, arm], -grads[0, lower].sum(axis=0), atol=1e-12)


def test_gradients_match_differences():
    C = fixtures.load("square")
    P = build_partition(C, choose_profiles(C, 0.3), 0.3)
    rng = make_rng(2)
    X = np.vstack([sample_tube(C, S, P.profiles.delta(S.id), 125, rng, max_fraction=0.95)
                   for S in C.strata])
    _, G = eval_all(P, X)
    # step well below the distance to the nearest stratum not containing x
    dists = np.column_stack([closest_points(C, S, X)[1] for S in C.strata])
    h = 1e-4 * np.where(dists > 1e-12, dists, np.inf).min(axis=1)
    fd = np.stack([(eval_all(P, X + h[:, None] * e)[0] - eval_all(P, X - h[:, None] * e)[0])
                   / (2 * h[:, None]) for e in np.eye(2)], axis=2)
    scale = np.maximum(np.abs(G).max(axis=(1, 2)), 1.0)
    assert np.all(np.abs(fd - G).max(axis=(1, 2)) <= 1e-4 * scale)


@pytest.mark.parametrize("name,mu", [("segment", 0.25), ("v", 0.1), ("two_segments", 0.25),
                                     ("abs", 0.1), ("line", 0.2), ("filled_square", 0.25)])
def test_verify_passes(name, mu):
    C = fixtures.load(name)
    rep = verify_partition(build_partition(C, choose_profiles(C, mu), mu), samples=3000)
    assert rep["pass"], rep
    assert rep["r_star"] <= C.kappa


def test_sum_exact_on_strata():
    C = fixtures.load("v")
    P = build_partition(C, choose_profiles(C, 0.2), 0.2)
    loc = sample_complex(C, 2000, make_rng(9), stratum_share=1.0)
    values, _ = eval_all(P, loc.X)
    assert np.abs(values.sum(axis=1) - 1).max() <= 1e-12


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.9), st.integers(0, 1000))
def test_partition_properties(mu, seed):
    C = fixtures.load("square")
    P = build_partition(C, choose_profiles(C, mu), mu)
    loc = sample_complex(C, 500, make_rng(seed))
    values, _ = eval_all(P, loc.X)
    assert np.all(values >= -1e-15) and np.all(values <= 1 + 1e-15)
    assert np.abs(values.sum(axis=1) - 1).max() <= 1e-9


def test_renormalized_literal_bound():
    C = fixtures.load("v")
    P = build_partition(C, choose_profiles(C, 0.25 / C.kappa), 0.25, renormalize=True)
    rep = verify_partition(P, samples=2000)
    assert rep["literal_bound_holds"] and P.bump.mu == pytest.approx(0.05)


def test_invalid_mu_and_profiles():
    C = fixtures.load("segment")
    with pytest.raises(InputError):
        build_partition(C, {"v-": 0.1, "v+": 0.1, "e": 0.1}, 1.5)
    with pytest.raises(InputError):
        build_partition(C, {"v-": 0.1, "v+": 0.1}, 0.2)
