import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratsmooth import fixtures
from stratsmooth.errors import (DegenerateSimplexError, DisjointnessError, FrontierError,
                                InputError, SchemaError, StratumShapeError)
from stratsmooth.stratified import (check_w_condition, closest_point, closest_points,
                                    distance_gradient, load_complex, load_complex_file, locate)


def _edge_doc():
    return {"ambient_dim": 2, "points": [[0, 0], [1, 0]], "simplices": [{"vertices": [0, 1]}],
            "strata": [{"id": "e", "dim": 1, "simplices": [0]}]}


def test_segment_loads():
    C = fixtures.load("segment")
    assert C.kappa == 3
    assert C.frontier == {("e", "v-"), ("e", "v+")}


def test_v_complex_frontier():
    C = fixtures.load("v")
    assert C.kappa == 5
    assert C.frontier == {("arm1", "apex"), ("arm2", "apex"), ("arm1", "e1"), ("arm2", "e2")}


def test_overlapping_segments_rejected():
    with pytest.raises(DisjointnessError):
        load_complex(fixtures.overlapping_doc())


def test_degenerate_simplex_rejected():
    doc = {"ambient_dim": 2, "points": [[0, 0], [1, 0], [2, 0]],
           "simplices": [{"vertices": [0, 1, 2]}],
           "strata": [{"id": "t", "dim": 2, "simplices": [0]}]}
    with pytest.raises(DegenerateSimplexError):
        load_complex(doc)


def test_shape_mismatch_rejected():
    doc = _edge_doc()
    doc["strata"][0]["dim"] = 0
    with pytest.raises(StratumShapeError):
        load_complex(doc)


def test_bent_stratum_rejected():
    doc = {"ambient_dim": 2, "points": [[0, 0], [1, 0], [1, 1]],
           "simplices": [{"vertices": [0, 1]}, {"vertices": [1, 2]}],
           "strata": [{"id": "bent", "dim": 1, "simplices": [0, 1]}]}
    with pytest.raises(StratumShapeError):
        load_complex(doc)


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("points"),
    lambda d: d.__setitem__("ambient_dim", "2"),
    lambda d: d["points"].__setitem__(0, [0, float("nan")]),
    lambda d: d["simplices"].__setitem__(0, {"vertices": [0, 5]}),
    lambda d: d["strata"].append({"id": "e", "dim": 1, "simplices": [0]}),
])
def test_schema_errors(mutate):
    doc = _edge_doc()
    mutate(doc)
    with pytest.raises(SchemaError):
        load_complex(doc)


def test_nan_token_in_file_rejected(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(_edge_doc()).replace("[1, 0]", "[NaN, 0]"))
    with pytest.raises(SchemaError):
        load_complex_file(p)


def test_declared_frontier_checked():
    doc = fixtures.segment_doc()
    doc["frontier"] = [["e", "v-"]]
    with pytest.raises(FrontierError):
        load_complex(doc)
    doc["frontier"] = [["e", "v-"], ["e", "v+"]]
    assert load_complex(doc).kappa == 3


def test_document_round_trip():
    C = fixtures.load("filled_square")
    D = load_complex(C.to_document())
    assert D.frontier == C.frontier
    assert [S.id for S in D.strata] == [S.id for S in C.strata]


def test_omitted_boundary_is_not_in_a():
    C = load_complex(_edge_doc())
    loc = locate(C, [[0.0, 0.0], [0.5, 0.0]], strict=False)
    assert list(loc.stratum) == [-1, 0]
    with pytest.raises(InputError):
        locate(C, [[0.0, 0.0]])


def test_closest_point_examples():
    C = load_complex(_edge_doc())
    pr = closest_point(C, "e", [0.5, 0.3])
    np.testing.assert_allclose(pr.foot, [0.5, 0.0])
    assert pr.dist == pytest.approx(0.3) and pr.inside
    pr = closest_point(C, "e", [0.25, 0.0])
    assert pr.dist == 0 and pr.inside


def test_closest_point_outside_shadow():
    C = load_complex(_edge_doc())
    x = np.array([1.4, 0.3])
    assert not closest_point(C, "e", x).inside
    # oracle: the nearest point of a fine net of S is its endpoint
    net = np.column_stack([np.linspace(0, 1, 10_001), np.zeros(10_001)])
    j = np.argmin(np.linalg.norm(net - x, axis=1))
    assert j == 10_000


def test_distance_gradient_examples():
    C = load_complex(_edge_doc())
    np.testing.assert_allclose(distance_gradient(C, "e", [0.5, 0.3]), [0, 1])
    P = load_complex({"ambient_dim": 2, "points": [[0, 0]], "simplices": [{"vertices": [0]}],
                      "strata": [{"id": "o", "dim": 0, "simplices": [0]}]})
    np.testing.assert_allclose(distance_gradient(P, "o", np.array([3, 4]) / 5 * 0.7), [0.6, 0.8])
    with pytest.raises(InputError):
        distance_gradient(C, "e", [0.5, 0.0])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.01, 0.5), st.floats(0, 2 * np.pi))
def test_distance_gradient_finite_differences(t, r, a):
    C = fixtures.load("filled_square")
    x = np.array([t, 0.0]) + r * np.array([np.cos(a), -abs(np.sin(a)) - 0.1])
    pr = closest_point(C, "s0", x)
    if not pr.inside:
        return
    g = distance_gradient(C, "s0", x)
    h = 1e-6
    fd = [(closest_points(C, "s0", [x + h * e])[1][0] - closest_points(C, "s0", [x - h * e])[1][0])
          / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(fd, g, rtol=1e-4, atol=1e-8)


def test_w_condition_is_exact_for_affine_faces():
    rep = check_w_condition(fixtures.load("filled_square"))
    assert rep["affine_exact"] and rep["pairs"] > 0
