import json

import numpy as np
import pytest

from stratsmooth import fixtures
from stratsmooth.errors import InputError, SchemaError
from stratsmooth.maps import (CallableMap, ExpressionMap, PLMap, compile_expression, load_map,
                              load_map_file, pl_from_function)


def test_pl_values_interpolate():
    C = fixtures.load("filled_square")
    f = pl_from_function(C, lambda P: P[:, 0] + 2 * P[:, 1])
    X = np.array([[0.25, 0.5], [0.9, 0.1], [0.0, 0.0]])
    np.testing.assert_allclose(f.value(X)[:, 0], X[:, 0] + 2 * X[:, 1])
    np.testing.assert_allclose(f.local_moduli(X), np.sqrt(5))


def test_pl_tangential_differential():
    C = fixtures.load("v")
    f = PLMap(C, [[0.0], [1.0], [0.0]])
    D = f.tangential([[0.5, 0.5]])
    # arm1 direction (1, 1)/sqrt 2, length sqrt 2: gradient (1/2, 1/2)
    np.testing.assert_allclose(D[0, 0], [0.5, 0.5])


def test_pl_rejects_bad_values():
    C = fixtures.load("segment")
    with pytest.raises(InputError):
        PLMap(C, [0.0, 1.0, 2.0])
    with pytest.raises(InputError):
        PLMap(C, [0.0, np.nan])


def test_expression_grammar():
    ev = compile_expression(["abs(x0) - 2*y", "max(x, y, 0.5)", "sqrt(x*x)"], 2)
    np.testing.assert_allclose(ev([[-3.0, 1.0]]), [[1.0, 1.0, 3.0]])
    assert ev.k == 3
    for bad in ["__import__('os')", "x.real", "x ** 2", "[x]", "lambda: 1", "q + 1", "abs(x, y)"]:
        with pytest.raises(SchemaError):
            compile_expression(bad, 2)


def test_expression_map_differentials():
    C = fixtures.load("abs")
    f = ExpressionMap(C, {"m": "1", "o": "0", "p": "1", "neg": "-x", "pos": "x*x"})
    np.testing.assert_allclose(f.tangential([[-0.5], [0.5]])[:, 0, 0], [-1.0, 1.0], atol=1e-8)
    assert f.local_modulus([0.0]) == pytest.approx(1.0, abs=1e-3)


def test_expression_continuity_enforced():
    C = fixtures.load("abs")
    doc = {"representation": "expr",
           "per_stratum": {"m": "1", "o": "0.5", "p": "1", "neg": "-x", "pos": "x"}}
    with pytest.raises(InputError):
        load_map(C, doc)


def test_load_map_documents(tmp_path):
    C = fixtures.load("abs")
    f = load_map(C, {"representation": "pl", "values": [[1], [0], [1]]})
    assert isinstance(f, PLMap)
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"representation": "expr",
                             "per_stratum": {"m": "1", "o": "0", "p": "1", "neg": "-x", "pos": "x"}}))
    assert isinstance(load_map_file(C, p), ExpressionMap)
    for bad in [{}, {"representation": "spline"}, {"representation": "pl", "values": [1, 2, 3]},
                {"representation": "pl", "values": [[1], [0, 1], [1]]},
                {"representation": "pl", "values": [[1], [True], [1]]},
                {"representation": "expr", "per_stratum": {"m": "1"}}]:
        with pytest.raises(SchemaError):
            load_map(C, bad)


def test_callable_map():
    C = fixtures.load("segment")
    f = CallableMap(C, lambda X: X[:, :1] ** 2, lambda X: np.stack([2 * X], axis=1) * [1, 0])
    np.testing.assert_allclose(f.value([[0.5, 0.0]]), [[0.25]])
    np.testing.assert_allclose(f.tangential([[0.5, 0.0]])[0, 0], [1.0, 0.0])
