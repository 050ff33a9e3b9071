"""Maps on a stratified complex: piecewise linear, per-stratum expressions, callables.

Every map exposes

* ``value(X)``: values (m, k) at points of A;
* ``tangential(X)``: the differential along the tangent space of the stratum
  of each point, as (m, k, n) matrices that annihilate normal directions;
* ``differential_on(S, X)``: the same for points of a given stratum S;
* ``local_modulus(x)``: the local Lipschitz modulus at x.
"""

import ast
import json
import math

import numpy as np

from . import geometry
from .errors import InputError, SchemaError
from .sampling import make_rng, sample_near, sample_stratum
from .stratified import _member_for_cell, locate


class DefinableMap:
    kind = "abstract"

    def __init__(self, C, k):
        self.complex = C
        self.k = int(k)

    def value(self, X):
        raise NotImplementedError

    def differential_on(self, S, X):
        raise NotImplementedError

    def tangential(self, X, loc=None):
        C = self.complex
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if loc is None:
            loc = locate(C, X)
        out = np.zeros((X.shape[0], self.k, C.ambient_dim))
        for key in np.unique(loc.stratum):
            rows = np.flatnonzero(loc.stratum == key)
            out[rows] = self.differential_on(C.strata[key], X[rows], cells=loc.simplex[rows])
        return out

    def local_modulus(self, x):
        raise NotImplementedError

    def local_moduli(self, X):
        return np.array([self.local_modulus(x) for x in np.atleast_2d(X)])

    def __call__(self, X):
        return self.value(X)


# -- piecewise linear ----------------------------------------------------------

class PLMap(DefinableMap):
    """Affine on every simplex, given by values at the vertices."""

    kind = "pl"

    def __init__(self, C, values):
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != C.points.shape[0]:
            raise InputError(f"expected {C.points.shape[0]} vertex values, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise InputError("vertex values must be finite")
        super().__init__(C, values.shape[1])
        self.values = values
        self._jac = {}

    def jacobian(self, simplex):
        """Differential of the affine piece on a simplex, a (k, n) matrix."""
        if simplex not in self._jac:
            verts = list(self.complex.simplices[simplex])
            self._jac[simplex] = geometry.affine_jacobian(self.complex.points[verts],
                                                          self.values[verts])
        return self._jac[simplex]

    def value(self, X, loc=None):
        C = self.complex
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if loc is None:
            loc = locate(C, X)
        out = np.zeros((X.shape[0], self.k))
        for s in np.unique(loc.simplex):
            rows = np.flatnonzero(loc.simplex == s)
            verts = list(C.simplices[s])
            lam = geometry.barycentric(C.points[verts], X[rows])
            out[rows] = lam @ self.values[verts]
        return out

    def differential_on(self, S, X, cells=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros((X.shape[0], self.k, self.complex.ambient_dim))
        if len(S.members) == 1:
            out[:] = self.jacobian(S.members[0]) @ S.tangent.projector()
            return out
        if cells is None:
            cells = locate(self.complex, X).simplex
        for j, s in enumerate(S.members):
            member_rows = np.array([_member_for_cell(self.complex, S, c) == j for c in cells])
            if member_rows.any():
                out[member_rows] = self.jacobian(s) @ S.tangents[j].projector()
        return out

    def local_moduli(self, X):
        """Max over closed simplices of A containing each row of X of the
        operator norm of the affine differential. Exact for PL maps."""
        C = self.complex
        X = np.atleast_2d(np.asarray(X, dtype=float))
        best = np.full(X.shape[0], -np.inf)
        for s, rows in C.maximal_near(X, 1e-9).items():
            for face in geometry.faces(C.simplices[s]):
                f = C.simplex_index(face)
                if f is None or C.simplex_stratum[f] < 0:
                    continue
                _, d, _ = geometry.closest_points_simplex(C.vertices_of(f), X[rows])
                hit = rows[d <= 1e-9]
                if hit.size:
                    best[hit] = np.maximum(best[hit], np.linalg.norm(self.jacobian(f), 2))
        if np.isneginf(best).any():
            bad = int(np.flatnonzero(np.isneginf(best))[0])
            raise InputError("point is not on the complex", location={"point": X[bad].tolist()})
        return best

    def local_modulus(self, x):
        return float(self.local_moduli(np.asarray(x, dtype=float)[None, :])[0])


# -- expressions -----------------------------------------------------------------

_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide}
_UNARY = {ast.USub: np.negative, ast.UAdd: np.positive}
_FUNCS = {"abs": 1, "sqrt": 1, "min": None, "max": None}


def _compile_node(node, names):
    if isinstance(node, ast.Expression):
        return _compile_node(node.body, names)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        v = float(node.value)
        return lambda X: np.full(X.shape[0], v)
    if isinstance(node, ast.Name):
        if node.id not in names:
            raise SchemaError(f"unknown name {node.id!r} in expression")
        i = names[node.id]
        return lambda X: X[:, i]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        a, b = _compile_node(node.left, names), _compile_node(node.right, names)
        return lambda X: op(a(X), b(X))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        op = _UNARY[type(node.op)]
        a = _compile_node(node.operand, names)
        return lambda X: op(a(X))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS \
            and not node.keywords:
        name = node.func.id
        args = [_compile_node(a, names) for a in node.args]
        if _FUNCS[name] == 1 and len(args) != 1:
            raise SchemaError(f"{name} takes one argument")
        if not args:
            raise SchemaError(f"{name} needs arguments")
        if name == "abs":
            return lambda X: np.abs(args[0](X))
        if name == "sqrt":
            return lambda X: np.sqrt(args[0](X))
        red = np.minimum if name == "min" else np.maximum
        return lambda X: red.reduce([a(X) for a in args])
    raise SchemaError(f"unsupported expression element {type(node).__name__}")


def compile_expression(text, ambient_dim):
    """Vectorized evaluator X -> (m, k) for an expression or a list of expressions.

    Grammar: numbers, coordinates x0..x{n-1} (x, y, z as aliases when n <= 3),
    + - * /, unary minus, abs, sqrt, min, max.
    """
    names = {f"x{i}": i for i in range(ambient_dim)}
    for alias, i in zip("xyz", range(min(ambient_dim, 3))):
        names[alias] = i
    items = text if isinstance(text, list) else [text]
    fns = []
    for item in items:
        if not isinstance(item, str):
            raise SchemaError("expressions must be strings")
        try:
            tree = ast.parse(item, mode="eval")
        except SyntaxError as exc:
            raise SchemaError(f"cannot parse expression {item!r}: {exc.msg}") from None
        fns.append(_compile_node(tree, names))

    def evaluate(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        with np.errstate(all="ignore"):
            return np.column_stack([f(X) for f in fns])

    evaluate.k = len(fns)
    return evaluate


class ExpressionMap(DefinableMap):
    """One closed-form expression per stratum; differentials by central
    differences along the stratum's tangent space."""

    kind = "expr"
    step = 1e-6

    def __init__(self, C, per_stratum):
        missing = [S.id for S in C.strata if S.id not in per_stratum]
        if missing:
            raise SchemaError("expression missing for strata", location={"strata": missing})
        self.sources = {S.id: per_stratum[S.id] for S in C.strata}
        self.fns = {key: compile_expression(v, C.ambient_dim) for key, v in self.sources.items()}
        ks = {f.k for f in self.fns.values()}
        if len(ks) != 1:
            raise SchemaError("expressions disagree on the number of components")
        super().__init__(C, ks.pop())

    def value(self, X, loc=None):
        C = self.complex
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if loc is None:
            loc = locate(C, X)
        out = np.zeros((X.shape[0], self.k))
        for key in np.unique(loc.stratum):
            rows = np.flatnonzero(loc.stratum == key)
            out[rows] = self.fns[C.strata[key].id](X[rows])
        if not np.all(np.isfinite(out)):
            raise InputError("map is undefined at some points")
        return out

    def differential_on(self, S, X, cells=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        f = self.fns[S.id]
        out = np.zeros((X.shape[0], self.k, self.complex.ambient_dim))
        j = 0
        if cells is not None and len(S.members) > 1:
            j = _member_for_cell(self.complex, S, cells[0])
        for u in S.tangents[j].basis:
            d = (f(X + self.step * u) - f(X - self.step * u)) / (2 * self.step)
            out += d[:, :, None] * u[None, None, :]
        return out

    def local_modulus(self, x, radii=(1e-2, 1e-3, 1e-4), samples=64, seed=0):
        """Estimate: sup of sampled tangential differential norms on shrinking
        balls; the value at the smallest radius is returned."""
        rng = make_rng(seed)
        x = np.asarray(x, dtype=float)
        est = float(np.linalg.norm(self.tangential(x[None, :])[0], 2))
        last = est
        for r in radii:
            loc = sample_near(self.complex, x, r, samples, rng)
            if len(loc) == 0:
                continue
            D = self.tangential(loc.X, loc)
            last = max(est, float(max(np.linalg.norm(d, 2) for d in D)))
        return last

    def check_continuity(self, samples=32, seed=0, tol=1e-9):
        """Largest mismatch between the expressions of frontier pairs on the lower stratum."""
        C = self.complex
        rng = make_rng(seed)
        worst = 0.0
        for upper, lower in sorted(C.frontier):
            X = sample_stratum(C, C.stratum(lower), samples, rng)
            gap = np.abs(self.fns[upper](X) - self.fns[lower](X)).max()
            worst = max(worst, float(gap))
            if gap > tol:
                raise InputError(f"expressions of {upper!r} and {lower!r} disagree on {lower!r}",
                                 location={"pair": [upper, lower], "gap": float(gap)})
        return worst


# -- callables -------------------------------------------------------------------

class CallableMap(DefinableMap):
    """A map given by Python callables ``fn(X) -> (m, k)`` and ``jac(X) -> (m, k, n)``."""

    kind = "callable"

    def __init__(self, C, fn, jac, k=1):
        super().__init__(C, k)
        self.fn = fn
        self.jac = jac

    def value(self, X, loc=None):
        return np.asarray(self.fn(np.atleast_2d(np.asarray(X, dtype=float))), dtype=float).reshape(-1, self.k)

    def differential_on(self, S, X, cells=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        j = 0
        if cells is not None and len(S.members) > 1:
            j = _member_for_cell(self.complex, S, cells[0])
        return self.jac(X) @ S.tangents[j].projector()

    def local_modulus(self, x, radii=(1e-2, 1e-3, 1e-4), samples=64, seed=0):
        return ExpressionMap.local_modulus(self, x, radii, samples, seed)


# -- loading -------------------------------------------------------------------

def load_map(C, document):
    """Build a map from ``{"representation": "pl", "values": ...}`` or
    ``{"representation": "expr", "per_stratum": {...}}``."""
    if not isinstance(document, dict) or "representation" not in document:
        raise SchemaError("map document needs a 'representation' field")
    rep = document["representation"]
    if rep == "pl":
        values = document.get("values")
        if not isinstance(values, list) or not all(isinstance(v, list) for v in values):
            raise SchemaError("'values' must be a list of lists")
        for v in values:
            for c in v:
                if isinstance(c, bool) or not isinstance(c, (int, float)) or not math.isfinite(c):
                    raise SchemaError("map values must be finite numbers")
        if len({len(v) for v in values}) > 1:
            raise SchemaError("all vertex values must have the same length")
        return PLMap(C, np.array(values, dtype=float))
    if rep == "expr":
        per = document.get("per_stratum")
        if not isinstance(per, dict):
            raise SchemaError("'per_stratum' must map stratum ids to expressions")
        f = ExpressionMap(C, per)
        f.check_continuity()
        return f
    raise SchemaError(f"unknown representation {rep!r}")


def load_map_file(C, path):
    with open(path) as fh:
        return load_map(C, json.load(fh))


def pl_from_function(C, fn):
    """PL interpolant of ``fn`` (applied to the vertex coordinates)."""
    return PLMap(C, np.asarray(fn(C.points), dtype=float))
