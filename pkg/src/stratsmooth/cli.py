"""Command line interface.

    stratsmooth <command> --input COMPLEX [options]

COMPLEX is a JSON complex document or the name of a built-in fixture. Every
command prints one JSON report (sorted keys, config and version embedded).
Exit status: 0 pass, 2 verification failure, 1 input error.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__, fixtures
from .bump import certify_grid
from .errors import ConstructionError, InputError, PreconditionError, ResourceError, StratError
from .inner import INFINITE, build_net, check_tubes_inner, distances_from
from .maps import load_map_file
from .partition import build_partition, eval_all, verify_partition
from .sampling import make_rng, sample_complex
from .smoothing import (eval_smoothed, plateau_check, separation, smooth,
                        verify_smoothing)
from .stratified import check_w_condition, load_complex, load_complex_file
from .tubes import choose_profiles

EXIT_PASS, EXIT_INPUT, EXIT_FAIL = 0, 1, 2
COMMANDS = ("validate", "profiles", "partition", "smooth", "inner", "separate", "bump-certify")


def _jsonable(obj):
    if obj is INFINITE:
        return "inf"
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(report):
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def _load_input(spec):
    if spec is None:
        raise InputError("--input is required")
    if os.path.exists(spec):
        return load_complex_file(spec)
    if spec in fixtures.DOCUMENTS:
        return fixtures.load(spec)
    raise InputError(f"no such file or fixture: {spec!r}")


def _ids(text):
    return [t for t in (s.strip() for s in (text or "").split(",")) if t]


def _epsilon(text):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise InputError(f"--epsilon must be a positive number, got {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise InputError(f"--epsilon must be a positive number, got {text!r}")
    return value


def _mu(args, default):
    mu = default if args.mu is None else args.mu
    if not (0 < mu < 1):
        raise InputError(f"--mu must lie in (0, 1), got {mu}")
    return mu


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])


def _coords(n):
    return [f"x{i}" for i in range(n)]


# -- commands ------------------------------------------------------------------

def cmd_validate(args):
    C = _load_input(args.input)
    w = check_w_condition(C)
    report = {
        "ambient_dim": C.ambient_dim,
        "dim": C.dim,
        "kappa": C.kappa,
        "simplices": len(C.simplices),
        "strata": [{"id": S.id, "dim": S.dim, "members": len(S.members)} for S in C.strata],
        "frontier_pairs": len(C.frontier),
        "diameter": C.diameter(),
        "w_condition": w,
    }
    report["pass"] = True
    return report


def cmd_profiles(args):
    C = _load_input(args.input)
    mu = _mu(args, 0.2)
    P = choose_profiles(C, mu, seed=args.seed)
    return {"profiles": P.as_dict(), "certificate": P.certificate, "pass": True}


def cmd_partition(args):
    C = _load_input(args.input)
    mu = _mu(args, 0.25)
    profiles = choose_profiles(C, mu / C.kappa if args.renormalize else mu, seed=args.seed)
    P = build_partition(C, profiles, mu, renormalize=args.renormalize)
    report = verify_partition(P, samples=args.samples or 10_000, seed=args.seed)
    report["profiles"] = profiles.as_dict()
    if args.csv:
        loc = sample_complex(C, min(args.samples or 10_000, 2000), make_rng(args.seed))
        values, grads = eval_all(P, loc.X)
        norms = np.linalg.norm(grads, axis=2)
        _write_csv(args.csv, _coords(C.ambient_dim) + ["sum", "max_value", "max_grad"],
                   np.column_stack([loc.X, values.sum(axis=1), values.max(axis=1),
                                    norms.max(axis=1)]))
    return report


def cmd_smooth(args):
    C = _load_input(args.input)
    if not args.map:
        raise InputError("--map is required for smooth")
    f = load_map_file(C, args.map)
    mu = _mu(args, 0.1)
    eps = _epsilon(args.epsilon if args.epsilon is not None else "0.05")
    g = smooth(f, mu, eps, seed=args.seed, renormalize=args.renormalize)
    report = verify_smoothing(g, samples=args.samples or 10_000, seed=args.seed)
    report["epsilon"] = eps
    report["profiles"] = g.partition.profiles.as_dict()
    plateaus = {}
    for S in C.strata:
        if S.dim == 0:
            pc = plateau_check(g, S.id)
            plateaus[S.id] = {"spread": pc["spread"], "max_abs": pc["max_abs"], "t": pc["t"]}
    report["plateaus"] = plateaus
    if args.csv:
        loc = sample_complex(C, min(args.samples or 10_000, 2000), make_rng(args.seed))
        ev = eval_smoothed(g, loc.X)
        fx = f.value(loc.X)
        _write_csv(args.csv,
                   _coords(C.ambient_dim) + [f"f{j}" for j in range(g.k)]
                   + [f"g{j}" for j in range(g.k)] + ["dg_norm"],
                   np.column_stack([loc.X, fx, ev["value"], ev["norm"]]))
    return report


def _queries(text, n):
    if not text:
        return []
    try:
        pairs = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"--query is not valid JSON: {exc.msg}") from None
    ok = isinstance(pairs, list) and all(
        isinstance(p, list) and len(p) == 2 and all(
            isinstance(q, list) and len(q) == n
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in q)
            for q in p)
        for p in pairs)
    if not ok:
        raise InputError(f"--query must be a JSON list of point pairs in R^{n}")
    return [(np.array(a, dtype=float), np.array(b, dtype=float)) for a, b in pairs]


def cmd_inner(args):
    C = _load_input(args.input)
    mu = _mu(args, 0.2)
    h = args.h if args.h is not None else 0.01 * C.diameter()
    if not (h > 0):
        raise InputError(f"--h must be positive, got {h}")
    queries = _queries(args.query, C.ambient_dim)
    G = build_net(C, h)
    distances = []
    for x, y in queries:
        d = distances_from(G, x, y[None, :])[0]
        distances.append({"x": x.tolist(), "y": y.tolist(), "inner": d,
                          "euclidean": float(np.linalg.norm(x - y))})
    profiles = choose_profiles(C, mu, seed=args.seed)
    tubes = check_tubes_inner(C, profiles, mu, h=h, samples=args.samples or 4000, seed=args.seed)
    ratios = [r["worst_ratio"] for r in tubes["strata"]]
    worst = "inf" if "inf" in ratios else max(ratios, default=0.0)
    violations = [dict(v, stratum=r["stratum"]) for r in tubes["strata"] for v in r["violations"]]
    return {
        "distances": distances,
        "h": h,
        "nodes": G.node_count,
        "edges": G.edge_count,
        "worst_ratio": worst,
        "samples": sum(r["samples"] for r in tubes["strata"]),
        "violations": violations,
        "violation_count": tubes["violation_count"],
        "pass": tubes["violation_count"] == 0,
    }


def cmd_separate(args):
    C = _load_input(args.input)
    a, b = _ids(args.set_a), _ids(args.set_b)
    if not a or not b:
        raise InputError("--set-a and --set-b need comma separated stratum ids")
    for key in a + b:
        C.stratum(key)
    mu = _mu(args, 0.2)
    _, report = separation(C, a, b, mu, samples=args.samples or 1000, seed=args.seed)
    return report


def cmd_bump_certify(args):
    mus = [args.mu] if args.mu is not None else [0.8, 0.4, 0.1]
    for mu in mus:
        if not (mu > 0 and math.isfinite(mu)):
            raise InputError(f"--mu must be positive, got {mu}")
    reports = [certify_grid(mu) for mu in mus]
    return {"grids": reports, "pass": all(r["pass"] for r in reports)}


HANDLERS = {
    "validate": cmd_validate,
    "profiles": cmd_profiles,
    "partition": cmd_partition,
    "smooth": cmd_smooth,
    "inner": cmd_inner,
    "separate": cmd_separate,
    "bump-certify": cmd_bump_certify,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="stratsmooth", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"stratsmooth {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name != "bump-certify":
            p.add_argument("--input", help="complex JSON file or fixture name")
        p.add_argument("--mu", type=float)
        p.add_argument("--epsilon")
        p.add_argument("--h", type=float)
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")
        p.add_argument("--renormalize", action="store_true")
        p.add_argument("--map", help="map JSON file (smooth)")
        p.add_argument("--set-a", help="comma separated stratum ids (separate)")
        p.add_argument("--set-b", help="comma separated stratum ids (separate)")
        p.add_argument("--query", help="JSON list of point pairs (inner)")
        p.add_argument("--csv", help="write sampled fields to this CSV file")
    return parser


def _config(args):
    keys = ("command", "input", "mu", "epsilon", "h", "samples", "seed", "renormalize",
            "map", "set_a", "set_b", "query", "csv")
    return {k: getattr(args, k, None) for k in keys}


def run(argv=None):
    """Run one command; returns ``(exit_status, report)``."""
    args = build_parser().parse_args(argv)
    config = _config(args)
    try:
        if args.samples is not None and args.samples <= 0:
            raise InputError(f"--samples must be positive, got {args.samples}")
        report = HANDLERS[args.command](args)
        status = EXIT_PASS if report.get("pass") else EXIT_FAIL
    except (InputError, PreconditionError) as exc:
        report, status = exc.to_dict(), EXIT_INPUT
    except (ConstructionError, ResourceError) as exc:
        report, status = exc.to_dict(), EXIT_FAIL
        report["pass"] = False
    except (OSError, json.JSONDecodeError) as exc:
        report, status = {"error": "input_error", "message": str(exc)}, EXIT_INPUT
    except StratError as exc:
        report, status = exc.to_dict(), EXIT_FAIL
    report["config"] = config
    report["version"] = __version__
    text = dumps(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status, report


def main(argv=None):
    status, _ = run(argv)
    return status


if __name__ == "__main__":
    sys.exit(main())
