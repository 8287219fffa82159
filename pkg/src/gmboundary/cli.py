"""Batch command line front end.

Exit codes: 0 pass, 2 fail, 3 inconclusive, 1 for bad input (a JSON error
object goes to stderr).  Reports are JSON with a versioned ``schema`` field.
CSV tables go next to the report when ``--out`` names a directory.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections import Counter
from pathlib import Path

from . import __version__
from .atlas import GeometryTag, classify
from .errors import DomainError, MalformedWordError, ResourceError, ValidationError
from .fundgroup import GraphGroup
from .graph import default_graph, load_graph, validate_graph
from .measures import moment_report, resolve_measure
from .stabilizers import is_fiber_generator, stab_intersection_check, standard_pair
from .walks import (
    UNDECIDED,
    Histogram,
    cyclic_quotient,
    decay_test,
    entropy_drift_estimate,
    first_return_law,
    first_return_walk,
    harmonic_estimate,
    stationarity_check,
    walk_records,
)

EXIT_PASS, EXIT_ERROR, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3
SCHEMA_VERSION = 1
STOCHASTIC = {"walk", "harmonic", "stationarity", "entropy", "first-return"}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gmboundary", description="Random walks on graph-manifold groups and their Bass-Serre trees.")
    p.add_argument("--version", action="version", version=f"gmboundary {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, graph=True, measure=False, seed=False):
        if graph:
            sp.add_argument("--graph", default="two_block.cfg", help="graph config (JSON); default: shipped two_block.cfg")
        if measure:
            sp.add_argument("--measure", default="preset:uniform", help="measure file or preset:<name>")
        if seed:
            sp.add_argument("--seed", help="required for stochastic runs")
        sp.add_argument("--out", help="output directory for report.json and CSV")
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("validate", help="check a graph config")
    common(sp)

    for name in ("walk", "harmonic"):
        sp = sub.add_parser(name, help="walks and their converged end prefixes")
        common(sp, measure=True, seed=True)
        sp.add_argument("--walks", type=int, default=1000)
        sp.add_argument("--steps", type=int, default=2000)
        sp.add_argument("--depth", type=int, default=5)
        sp.add_argument("--patience", type=int, default=200)
        sp.add_argument("--max-undecided", type=float, default=0.01)

    sp = sub.add_parser("stationarity", help="test nu = mu * nu on cylinders")
    common(sp, measure=True, seed=True)
    sp.add_argument("--walks", type=int, default=1000)
    sp.add_argument("--steps", type=int, default=300)
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--patience", type=int, default=100)
    sp.add_argument("--epsilon", type=float, default=0.01)
    sp.add_argument("--confidence", type=float, default=0.99)

    sp = sub.add_parser("entropy", help="drift and entropy-rate estimates")
    common(sp, measure=True, seed=True)
    sp.add_argument("--walks", type=int, default=10000, help="number of sample walks")
    sp.add_argument("--steps", type=int, default=100)
    sp.add_argument("--decay", action="store_true", help="also test drift(steps) < drift(steps/4)/2")

    sp = sub.add_parser("stab-check", help="Stab(u) & Stab(v) on a finite ball")
    common(sp)
    sp.add_argument("--dist", type=int, default=2)
    sp.add_argument("--radius", type=int, default=4)

    sp = sub.add_parser("first-return", help="induced measure on a finite-index kernel")
    common(sp, measure=True, seed=True)
    sp.add_argument("--quotient", default="parity",
                    help="parity | mod:k | JSON file {modulus, values: {element: int}}")
    sp.add_argument("--walks", type=int, default=10000, help="number of returns")
    sp.add_argument("--exact-depth", type=int, default=6, help="path length for the exact oracle")

    sp = sub.add_parser("atlas", help="boundary descriptor for a geometry")
    sp.add_argument("--tag", required=True, choices=[t.value for t in GeometryTag])
    sp.add_argument("--out")
    return p


# config loading ------------------------------------------------------------------


def _graph(path: str):
    p = Path(path)
    if p.exists():
        return load_graph(p)
    if p.name == "two_block.cfg" and len(p.parts) == 1:
        return default_graph()
    raise ValidationError(f"graph config {path!r} not found")


def _group_and_measure(args):
    source = args.measure
    atlas = source.startswith("preset:") and source[len("preset:"):] not in ("uniform", "tail", "hyperbolic")
    group = None if atlas else GraphGroup(_graph(args.graph))
    return resolve_measure(source, group)


def _quotient(source: str, group, measure):
    elems = list(dict.fromkeys([g for g, _ in measure.core] + list(group.generators())))
    if source == "parity":
        if hasattr(group, "traversals_from"):
            return cyclic_quotient(elems, lambda x: len(x.edges), 2)
        return cyclic_quotient(elems, lambda x: sum(x) if isinstance(x, tuple) else len(x), 2)
    if source.startswith("mod:"):
        k = int(source[4:])
        if hasattr(group, "traversals_from") or not isinstance(group.identity(), tuple):
            raise ValidationError("mod:k needs an abelian atlas group")
        return cyclic_quotient(elems, lambda x: sum(x), k)
    doc = json.loads(Path(source).read_text())
    k = int(doc["modulus"])
    values = {group.parse(s): int(v) for s, v in doc["values"].items()}
    return cyclic_quotient(elems, lambda x: values[x] if x in values else _missing(x), k)


def _missing(x):
    raise ValidationError(f"quotient file has no value for {x}")


# subcommands -------------------------------------------------------------------


def _report(command, **body):
    return {"schema": f"gmboundary.{command}/{SCHEMA_VERSION}", **body}


def cmd_validate(args):
    rep = validate_graph(_graph(args.graph))
    return (EXIT_PASS if rep.ok else EXIT_FAIL), _report("validate", **rep.to_dict()), {}


def _histogram_table(h):
    return [("prefix", "count", "mass", "mass_float")] + [tuple(r) for r in h.rows()]


def cmd_harmonic(args):
    group, m = _group_and_measure(args)
    h = harmonic_estimate(m, args.walks, args.steps, args.depth, args.seed, args.patience, args.jobs)
    und = float(h.undecided_fraction)
    ok = und < args.max_undecided
    body = dict(h.to_dict(), measure=args.measure, seed=args.seed, patience=args.patience,
                max_undecided=args.max_undecided, passed=ok)
    return (EXIT_PASS if ok else EXIT_FAIL), _report("harmonic", **body), {"histogram.csv": _histogram_table(h)}


def cmd_walk(args):
    group, m = _group_and_measure(args)
    recs = walk_records(m, args.walks, args.steps, args.depth, args.seed, args.patience, args.jobs)
    rows = [("walk", "prefix", "final_distance", "decided")]
    rows += [(i, lab, dist, int(lab != UNDECIDED)) for i, (lab, dist) in enumerate(recs)]
    h = Histogram(Counter(lab for lab, _ in recs), args.walks, args.depth, args.steps)
    und = float(h.undecided_fraction)
    ok = und < args.max_undecided
    body = dict(h.to_dict(), measure=args.measure, seed=args.seed, patience=args.patience,
                mean_final_distance=sum(d for _, d in recs) / max(1, len(recs)),
                max_undecided=args.max_undecided, passed=ok)
    return (EXIT_PASS if ok else EXIT_FAIL), _report("walk", **body), {"walks.csv": rows, "histogram.csv": _histogram_table(h)}


def cmd_stationarity(args):
    group, m = _group_and_measure(args)
    r = stationarity_check(m, args.depth, args.walks, args.steps, args.seed, args.patience,
                           epsilon=args.epsilon, confidence=args.confidence, jobs=args.jobs)
    code = {"pass": EXIT_PASS, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[r.status]
    rows = [("prefix", "nu", "mixture", "se", "z")] + [
        (x["prefix"], x["nu"], x["mixture"], x["se"], x["z"]) for x in r.rows
    ]
    body = dict(r.to_dict(), measure=args.measure, seed=args.seed, depth=args.depth, walks=args.walks,
                steps=args.steps)
    return code, _report("stationarity", **body), {"cylinders.csv": rows}


def cmd_entropy(args):
    group, m = _group_and_measure(args)
    body = {"measure": args.measure, "seed": args.seed, "moments": moment_report(m).to_dict()}
    code = EXIT_PASS
    if args.decay:
        d = decay_test(m, args.walks, args.seed, max(1, args.steps // 4), args.steps)
        body["decay"] = d
        body.update(d["long"])
        code = EXIT_PASS if d["passed"] else EXIT_FAIL
    else:
        body.update(entropy_drift_estimate(m, args.steps, args.walks, args.seed))
    rows = [("n", "samples", "drift", "drift_lo", "drift_hi", "entropy_rate_bound")]
    for e in ([body["decay"]["short"], body["decay"]["long"]] if args.decay else [body]):
        rows.append((e["n"], e["samples"], e["drift"], *e["drift_ci"], e["entropy_rate_bound"]))
    return code, _report("entropy", **body), {"drift.csv": rows}


def cmd_stab_check(args):
    group = GraphGroup(_graph(args.graph))
    u, v = standard_pair(group, args.dist)
    r = stab_intersection_check(u, v, args.radius)
    if r.distance == 2:
        middle = u.truncate(u.depth - 1)
        ok = r.structure == "cyclic" and is_fiber_generator(r.generator, middle)
        expected = "cyclic, fiber generator"
    else:
        ok = r.structure == "trivial"
        expected = "trivial"
    body = dict(r.to_dict(), expected=expected, passed=ok)
    return (EXIT_PASS if ok else EXIT_FAIL), _report("stab-check", **body), {}


def cmd_first_return(args):
    group, m = _group_and_measure(args)
    quot = _quotient(args.quotient, group, m)
    s = first_return_walk(m, quot, args.walks, args.seed)
    fmt = getattr(group, "format", str)
    law = s.law()
    emp = sorted(((fmt(g), w) for g, w in law.items()), key=lambda kv: (-kv[1], kv[0]))
    body = {
        "measure": args.measure, "quotient": args.quotient, "seed": args.seed, "returns": args.walks,
        "mean_return_time": sum(s.times) / max(1, len(s.times)),
        "empirical": [{"element": k, "mass": float(v)} for k, v in emp],
    }
    rows = [("element", "empirical", "exact")]
    exact = {}
    if m.tail is None:
        ex, left = first_return_law(m, quot, args.exact_depth)
        exact = {fmt(g): w for g, w in ex.items()}
        body["exact"] = [{"element": k, "mass": str(v)} for k, v in sorted(exact.items())]
        body["exact_unreturned_mass"] = str(left)
    for k, v in emp:
        rows.append((k, float(v), str(exact.get(k, "")) if exact else ""))
    return EXIT_PASS, _report("first-return", **body), {"returns.csv": rows}


def cmd_atlas(args):
    return EXIT_PASS, _report("atlas", **classify(args.tag).to_dict()), {}


COMMANDS = {
    "validate": cmd_validate,
    "walk": cmd_walk,
    "harmonic": cmd_harmonic,
    "stationarity": cmd_stationarity,
    "entropy": cmd_entropy,
    "stab-check": cmd_stab_check,
    "first-return": cmd_first_return,
    "atlas": cmd_atlas,
}


# output ------------------------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _emit(report, tables, out):
    if out is None:
        sys.stdout.write(_dumps(report))
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / "report.json").write_text(_dumps(report))
    for name, rows in tables.items():
        (d / name).write_text(_csv(rows))


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command in STOCHASTIC and args.seed is None:
            raise UsageError(f"{args.command}: --seed is required")
        code, report, tables = COMMANDS[args.command](args)
        _emit(report, tables, getattr(args, "out", None))
        return code
    except (UsageError, ValidationError, DomainError, MalformedWordError, ResourceError,
            OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        err = {"schema": f"gmboundary.error/{SCHEMA_VERSION}", "error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return EXIT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
