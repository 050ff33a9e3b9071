import itertools

import numpy as np
import pytest

from stratsmooth import fixtures
from stratsmooth.errors import ConstructionError, InputError
from stratsmooth.stratified import load_complex
from stratsmooth.tubes import TubeProfile, as_profile_set, choose_profiles, tube_contains


def test_segment_profiles():
    C = fixtures.load("segment")
    P = choose_profiles(C, 0.5)
    for key in ("v-", "v+"):
        assert P.delta(key) <= 0.5
    # the two vertex tubes are disjoint
    assert P.delta("v-") + P.delta("v+") < 2.0
    assert set(P.certificate["strata"]) == {"v-", "v+", "e"}


def test_lone_point_gets_mu():
    C = load_complex({"ambient_dim": 2, "points": [[0.3, 0.4]], "simplices": [{"vertices": [0]}],
                      "strata": [{"id": "p", "dim": 0, "simplices": [0]}]})
    assert choose_profiles(C, 0.35).delta("p") == 0.35


def test_v_point_tubes_separated():
    C = fixtures.load("v")
    P = choose_profiles(C, 0.2)
    points = [S for S in C.strata if S.dim == 0]
    for S, T in itertools.combinations(points, 2):
        gap = np.linalg.norm(C.vertices_of(S.members[0])[0] - C.vertices_of(T.members[0])[0])
        assert gap >= 4 * max(P.delta(S.id), P.delta(T.id))


@pytest.mark.parametrize("name", fixtures.UNSMOOTHABLE)
def test_acute_corners_fail_loudly(name):
    with pytest.raises(ConstructionError) as err:
        choose_profiles(fixtures.load(name), 0.2)
    assert "stratum" in err.value.location


def test_polygon_profiles_shrink_with_edge_length():
    C = fixtures.load("polygon")
    P = choose_profiles(C, 0.2)
    edge = 2 * np.sin(np.pi / 256)
    assert P.delta("p0") <= edge / 4 + 1e-15


def test_tube_contains_examples():
    C = fixtures.load("segment")
    assert tube_contains(C, "e", 0.1, [[0.0, 0.0]])[0]
    assert not tube_contains(C, "e", 0.1, [[0.0, 0.1]])[0]
    assert tube_contains(C, "e", 0.1, [[0.0, 0.0999]])[0]
    # beyond the open segment the affine distance is small but x is not in the tube
    assert not tube_contains(C, "e", 0.1, [[1.05, 0.01]])[0]
    assert tube_contains(C, "v+", TubeProfile("v+", 0.1), [[1.05, 0.01]])[0]


def test_profile_set_validation():
    C = fixtures.load("segment")
    with pytest.raises(InputError):
        as_profile_set(C, {"e": 0.1})
    with pytest.raises(InputError):
        TubeProfile("e", 0.0)
    P = as_profile_set(C, {"e": 0.1, "v-": 0.2, "v+": 0.2})
    assert P["e"].delta == 0.1 and P.as_dict()["v-"] == 0.2
