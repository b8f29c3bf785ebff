"""``gbfpos`` command line: generate, check, query, describe."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone
from importlib import resources

import jsonschema
import numpy as np

from . import library as lib
from .measurement import (MeasurementError, QueryResult, Subspace, WeightedQuestion,
                          ensemble_expectation, observable_expectation, probability)
from .report import TOL_CONE, TOL_EQ
from .suite import SUITES, run_suite, summarize
from .theory import SPEC_VERSION, Theory, TheoryError, dump_theory, load_theory

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _generate(args) -> Theory:
    seed = lib.seed_from_env(args.seed)
    rng = np.random.default_rng(seed)
    if args.d < 1:
        raise InputError(f"dimension must be positive, got {args.d}")
    if args.intervals < 1:
        raise InputError("need at least one interval")
    if args.kind == "interval":
        space = lib.GradedKreinSpace.create(args.fdeg, args.sig, args.d) if (args.fdeg or args.sig) \
            else lib.GradedKreinSpace.create(None, None, args.d)
        Us = [lib.graded_haar_unitary(space.fdeg_array, rng) for _ in range(args.intervals)]
        obs = [(k, lib.random_graded_operator(space, 0, rng), 0) for k in range(1, args.intervals + 1)]
        return lib.build_interval_theory(lib.IntervalTheoryConfig(
            args.d, Us, space.fdeg, space.sig, obs))
    if args.kind == "fermionic-toy":
        fdeg = args.fdeg or tuple([0] * (args.d - 1) + [1])
        sig = args.sig or tuple([0] * args.d)
        return lib.build_fermionic_toy(lib.FermionicToyConfig(
            args.d, fdeg, sig, n_intervals=args.intervals, seed=seed))
    # disjoint-union
    if args.inputs:
        t1, t2 = (load_theory(p) for p in args.inputs)
    else:
        cfg = lambda: lib.IntervalTheoryConfig(  # noqa: E731
            args.d, [lib.haar_unitary(args.d, rng) for _ in range(args.intervals)])
        t1, t2 = lib.build_interval_theory(cfg()), lib.build_interval_theory(cfg())
    return lib.disjoint_union(t1, t2)


def cmd_generate(args) -> int:
    theory = _generate(args)
    theory = replace(theory, metadata={**theory.metadata, "seed": lib.seed_from_env(args.seed)})
    if args.out == "-":
        json.dump(theory.to_json(), sys.stdout, indent=1, sort_keys=True)
        sys.stdout.write("\n")
    else:
        dump_theory(theory, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    theory = load_theory(args.spec)
    suites = SUITES if args.suite == "all" else (args.suite,)
    results = run_suite(theory, suites, args.tol_eq, args.tol_cone, workers=args.workers)
    report = {
        "version": SPEC_VERSION,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "spec": args.spec,
        "suites": list(suites),
        "tolerances": {"eq": args.tol_eq, "cone": args.tol_cone},
        "notes": ["monotone extension to [0, inf] is the identity in finite dimension"],
        "summary": summarize(results),
        "checks": [r.to_json() for r in results],
    }
    text = json.dumps(report, indent=1, sort_keys=True)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"FAIL {r.check} {r.target} deviation={r.max_deviation:.3e}", file=sys.stderr)
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def _span(theory: Theory, region: str, rows) -> Subspace:
    amb = theory.hspace(theory.boundary(region))
    vecs = np.array([[complex(a, b) for a, b in v] for v in rows], dtype=complex)
    return Subspace.span(amb, vecs.reshape(len(rows), -1) if rows else np.zeros((0, amb.dim)))


def run_query(theory: Theory, q: dict, tol: float = TOL_EQ) -> dict:
    out = {"id": q["id"]}
    try:
        region = q["region"]
        strict = q.get("strict", True)
        S = _span(theory, region, q["S"])
        if q["kind"] == "probability":
            if "A" not in q:
                raise InputError("probability query needs A")
            res = probability(theory, region, _span(theory, region, q["A"]), S, tol, strict)
        elif q["kind"] == "ensemble":
            comps = tuple((_span(theory, region, c["A"]), c["weight"]) for c in q.get("components", []))
            if not comps:
                raise InputError("ensemble query needs components")
            res = ensemble_expectation(theory, region, WeightedQuestion(comps, q.get("ensemble", False)),
                                       S, tol, strict)
        else:
            if "observable" not in q:
                raise InputError("expectation query needs an observable id")
            obs = theory.observables.get(q["observable"])
            if obs is None:
                raise InputError(f"unknown observable {q['observable']!r}")
            res = observable_expectation(theory, region, obs, S, tol, strict)
    except (InputError, TheoryError, MeasurementError, KeyError, ValueError) as exc:
        res = QueryResult(None, False, 0.0, str(exc))
    out.update(res.to_json())
    out.setdefault("error", None)
    return out


def cmd_query(args) -> int:
    theory = load_theory(args.spec)
    with open(args.query_file, encoding="utf-8") as fh:
        data = json.load(fh)
    schema = json.loads(resources.files("gbfpos").joinpath("schemas/query.schema.json")
                        .read_text("utf-8"))
    jsonschema.validate(data, schema)
    results = [run_query(theory, q, args.tol_eq) for q in data["queries"]]
    text = json.dumps({"version": SPEC_VERSION, "results": results}, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_describe(args) -> int:
    theory = load_theory(args.spec)
    s = theory.system
    print(f"version: {SPEC_VERSION}  metadata: {json.dumps(theory.metadata, sort_keys=True)}")
    print(f"atoms: {len(theory.spaces)}  bosonic: {theory.is_bosonic}")
    for a, sp in sorted(theory.spaces.items()):
        print(f"  {a}: dim={sp.dim} fdeg={list(sp.fdeg)} sig={list(sp.sig)}")
    print(f"hypersurfaces: {len(s.hypersurfaces)}")
    for h in sorted(s.hypersurfaces):
        print(f"  {h}: dim={theory.hspace(h).dim}")
    print(f"regions: {len(s.regions)}")
    for r in sorted(s.regions):
        flag = "amplitude" if r in theory.amplitudes else "no amplitude"
        print(f"  {r}: boundary={s.regions[r].boundary} ({flag})")
    print(f"gluings: {len(s.gluings)}")
    for g in s.gluings:
        print(f"  {g.id}: {g.kind} {list(g.inputs)} -> {g.result}")
    print(f"observables: {', '.join(sorted(theory.observables)) or '-'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gbfpos", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write an example theory")
    g.add_argument("kind", choices=["interval", "fermionic-toy", "disjoint-union"])
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--seed", type=int, default=0, help="overridden by GBF_SEED")
    g.add_argument("--intervals", type=int, default=2)
    g.add_argument("--fdeg", type=_int_list, default=None)
    g.add_argument("--sig", type=_int_list, default=None)
    g.add_argument("--inputs", nargs=2, metavar="SPEC", help="theories to join (disjoint-union)")
    g.add_argument("--out", "-o", default="-")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("check", help="run axiom suites")
    c.add_argument("spec")
    c.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    c.add_argument("--tol-eq", type=float, default=TOL_EQ)
    c.add_argument("--tol-cone", type=float, default=TOL_CONE)
    c.add_argument("--report")
    c.add_argument("--workers", type=int, default=1)
    c.set_defaults(func=cmd_check)

    q = sub.add_parser("query", help="evaluate probability and expectation queries")
    q.add_argument("spec")
    q.add_argument("query_file")
    q.add_argument("--out")
    q.add_argument("--tol-eq", type=float, default=TOL_EQ)
    q.set_defaults(func=cmd_query)

    d = sub.add_parser("describe", help="summarize a theory file")
    d.add_argument("spec")
    d.set_defaults(func=cmd_describe)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, TheoryError, jsonschema.ValidationError, json.JSONDecodeError,
            OSError, ValueError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
