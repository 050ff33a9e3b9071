import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import subspace_angles

from stratsmooth.errors import InputError, PreconditionError
from stratsmooth.subspace import (angle, check_angle_cap, intersection, min_distance_to_complement,
                                  orthonormalize, project, span, zero)

E1, E2, E3 = np.eye(3)


def vectors(n, max_k):
    return st.lists(st.lists(st.floats(-10, 10, allow_nan=False), min_size=n, max_size=n),
                    min_size=1, max_size=max_k)


def test_orthonormal_input_is_kept():
    S = orthonormalize([E1, E2])
    assert S.dim == 2
    np.testing.assert_allclose(S.basis, [E1, E2])


def test_dependent_vector_dropped():
    S = orthonormalize([E1, 2 * E1])
    assert S.dim == 1
    np.testing.assert_allclose(S.basis, [E1])


def test_empty_needs_dimension():
    with pytest.raises(InputError):
        orthonormalize([])
    assert orthonormalize([], 3).dim == 0


def test_mismatched_dimensions_rejected():
    with pytest.raises(InputError):
        orthonormalize([[1.0, 0.0], [1.0, 0.0, 0.0]])


@settings(max_examples=60, deadline=None)
@given(vectors(3, 3))
def test_projector_idempotent(vs):
    S = span(vs, 3)
    P = S.projector()
    np.testing.assert_allclose(P @ P, P, atol=1e-10)
    np.testing.assert_allclose(S.basis @ S.basis.T, np.eye(S.dim), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(vectors(4, 3), st.lists(st.floats(-10, 10, allow_nan=False), min_size=4, max_size=4))
def test_projection_pythagoras(vs, v):
    S = span(vs, 4)
    v = np.array(v)
    p = project(S, v)
    assert abs(np.sum((v - p) ** 2) + np.sum(p ** 2) - np.sum(v ** 2)) <= 1e-9 * max(1, v @ v)


def test_project_examples():
    np.testing.assert_allclose(project(span([E1]), E1 + E2), E1)
    np.testing.assert_allclose(project(zero(3), E1 + E2), 0)


def test_angle_examples():
    E = span([E1, E2])
    assert angle(E, E) == pytest.approx(0, abs=1e-12)
    assert angle(span([E1]), span([E2])) == pytest.approx(1)
    assert angle(zero(3), span([E1])) == 0.0


def test_angle_of_rotated_line():
    theta = 0.3
    u = math.cos(theta) * E1 + math.sin(theta) * E2
    # oracle: maximize d(w, F) over densely sampled unit vectors w of E
    ts = np.linspace(-1, 1, 20001)
    W = ts[:, None] * E1
    F = u / np.linalg.norm(u)
    oracle = np.max(np.linalg.norm(W - (W @ F)[:, None] * F, axis=1))
    assert angle(span([E1]), span([u])) == pytest.approx(oracle, abs=1e-12)
    assert angle(span([E1]), span([u])) == pytest.approx(0.29552020666133955, abs=1e-14)


def test_angle_is_one_sided():
    # a line inside a plane has angle 0 to it, not the other way round
    assert angle(span([E1]), span([E1, E2])) == pytest.approx(0)
    assert angle(span([E1, E2]), span([E1])) == pytest.approx(1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_angle_matches_principal_angles(seed, k):
    rng = np.random.default_rng(seed)
    A, B = rng.normal(size=(k, 4)), rng.normal(size=(k, 4))
    expected = math.sin(float(np.max(subspace_angles(A.T, B.T))))
    assert angle(span(list(A)), span(list(B))) == pytest.approx(expected, abs=1e-9)


def test_intersection_of_planes():
    I = intersection(span([E1, E2]), span([E1, E3]))
    assert I.dim == 1
    assert abs(abs(I.basis[0] @ E1) - 1) < 1e-12


def test_angle_cap_equal_subspaces():
    E = span([E1, E2])
    rep = check_angle_cap(E, E, span([E1]))
    assert rep.lhs == pytest.approx(0, abs=1e-12) and rep.holds


def test_angle_cap_rotated_plane():
    c, s = math.cos(0.1), math.sin(0.1)
    E = span([E1, E2])
    F = span([E1, c * E2 + s * E3])
    rep = check_angle_cap(E, F, span([E1]))
    assert rep.holds
    # both sides by hand: the planes meet T^perp in lines at angle 0.1
    assert rep.lhs == pytest.approx(math.sin(0.1), abs=1e-12)
    assert rep.rhs == pytest.approx(2 * math.sin(0.1), abs=1e-12)


def test_angle_cap_precondition():
    F = span([E1])
    with pytest.raises(PreconditionError):
        check_angle_cap(span([E1, E2]), F, span([E2]))


def test_angle_cap_empty_t():
    assert min_distance_to_complement(zero(3), span([E1])) == 1.0
    rep = check_angle_cap(span([E1]), span([E2]), zero(3))
    assert rep.holds and rep.rhs == pytest.approx(2.0)


def test_ambient_mismatch():
    with pytest.raises(InputError):
        angle(span([E1]), span([[1.0, 0.0]]))
