"""Command-line interface: ``periomorph <command> ...``.

Exit codes: 0 success (or a positive answer), 1 a negative answer, 2 usage
or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import classify as cls_mod
from . import eqrel, finstruct, morphisms, periodic, qcsp, selftest, template
from .formula import FormulaError, parse, to_text
from .partition import MAX_SIZE, PartitionError


class UsageError(Exception):
    pass


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _load_template(path: str, arity_cap: int) -> eqrel.EqTemplate:
    t = eqrel.load_template(path)
    for sym, rel in t.relations.items():
        if rel.arity > arity_cap:
            raise UsageError(f"relation {sym} has arity {rel.arity}, above --arity-cap {arity_cap}")
    return t


def cmd_classify(args: argparse.Namespace) -> int:
    t = _load_template(args.template, args.arity_cap)
    verdict = cls_mod.classify(
        t, witness=args.witness, max_aux=args.max_aux, max_size=args.max_size
    )
    if args.json:
        print(_dump(verdict.to_json()))
        return 0
    print(verdict.label)
    for e in verdict.evidence:
        print(f"  {e.symbol} is {e.property}: {', '.join(e.witness)}")
    if args.witness:
        if verdict.witness is not None:
            print(f"  witness: {verdict.witness}")
        else:
            print(f"  witness: {verdict.witness_status}")
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    t = _load_template(args.template, args.arity_cap)
    f = parse(args.sentence)
    trace: list[str] | None = [] if args.trace else None
    result = qcsp.solve(t, f, trace)
    if args.json:
        out = {"schema": 1, "result": result}
        if trace is not None:
            out["trace"] = trace
        print(_dump(out))
    else:
        for line in trace or []:
            print(line)
        print(str(result).lower())
    return 0 if result else 1


def cmd_neq_def(args: argparse.Namespace) -> int:
    t = _load_template(args.template, args.arity_cap)
    if template.has_constant_polymorphism(t):
        print("constant polymorphism exists")
        return 1
    print(to_text(template.define_disequality(t)))
    return 0


def _relation_arg(s: finstruct.FiniteStructure, text: str) -> frozenset[tuple[int, ...]]:
    if text in s.relations:
        return s.relations[text]
    try:
        tuples = finstruct.parse_tuples(text)
    except (finstruct.StructureError, ValueError) as exc:
        raise UsageError(f"relation must be a symbol of the structure or a tuple list: {exc}") from None
    if len({len(t) for t in tuples}) > 1:
        raise UsageError("tuples of different lengths")
    return frozenset(tuples)


def cmd_hull(args: argparse.Namespace) -> int:
    s = finstruct.load_structure(args.structure)
    r = _relation_arg(s, args.relation)
    hull = morphisms.ph_hull(s, r, args.max_arity)
    rows = sorted(hull)
    if args.json:
        print(_dump({"schema": 1, "max_arity": args.max_arity, "relation": [list(t) for t in sorted(r)], "hull": [list(t) for t in rows]}))
    else:
        print(f"pH-hull (surjective polymorphisms of arity <= {args.max_arity}):")
        print("{" + ",".join("(" + ",".join(map(str, t)) + ")" for t in rows) + "}")
    return 0


def cmd_per_eval(args: argparse.Namespace) -> int:
    s = finstruct.load_structure(args.structure)
    f = parse(args.formula)
    elems = [periodic.PeriodicElement.parse(a) for a in args.args]
    variables = args.vars.split(",") if args.vars else None
    result = periodic.eval_ph_on_per(s, f, elems, variables)
    if args.json:
        print(_dump({"schema": 1, "result": result, "horizon": periodic.horizon(elems)}))
    else:
        print(str(result).lower())
    return 0 if result else 1


def cmd_reduce(args: argparse.Namespace) -> int:
    defs = cls_mod.load_definitions(args.definitions)
    f = parse(args.sentence)
    reduced = cls_mod.reduce_instance(f, defs)
    out: dict = {"schema": 1, "reduced": to_text(reduced)}
    if args.check:
        base = _load_template(args.check, args.arity_cap)
        derived = cls_mod.defined_template(base, defs)
        before, after = qcsp.solve(derived, f), qcsp.solve(base, reduced)
        out.update({"source_result": before, "reduced_result": after, "agree": before == after})
    if args.json:
        print(_dump(out))
    else:
        print(out["reduced"])
        if args.check:
            print(f"source: {str(out['source_result']).lower()}, reduced: {str(out['reduced_result']).lower()}")
    return 0 if out.get("agree", True) else 1


def cmd_selftest(args: argparse.Namespace) -> int:
    results = selftest.run_all(args.jobs)
    if args.json:
        print(_dump({"schema": 1, "suites": [r.__dict__ for r in results]}))
    else:
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            extra = f"  {r.detail}" if r.detail else ""
            print(f"{status} {r.name} ({r.checked} checks){extra}")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="periomorph", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--arity-cap", type=int, default=MAX_SIZE, help=f"largest relation arity accepted (default {MAX_SIZE})")

    sp = sub.add_parser("classify", help="complexity class of an equality template")
    sp.add_argument("template")
    sp.add_argument("--witness", action="store_true", help="search for a pH definition of P or I")
    sp.add_argument("--max-aux", type=int, default=4, help="auxiliary variables in the witness search (default 4)")
    sp.add_argument("--max-size", type=int, default=6, help="atoms plus quantifiers in the witness search (default 6)")
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("solve", help="decide a pH sentence over an equality template")
    sp.add_argument("template")
    sp.add_argument("sentence")
    sp.add_argument("--trace", action="store_true", help="print the evaluated game states")
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("neq-def", help="pp-definition of x0 != x1, if there is no constant polymorphism")
    sp.add_argument("template")
    common(sp)
    sp.set_defaults(func=cmd_neq_def)

    sp = sub.add_parser("hull", help="bounded pH-hull of a relation in a finite structure")
    sp.add_argument("structure")
    sp.add_argument("relation", help="relation symbol of the structure or a tuple list like '(0,1),(1,0)'")
    sp.add_argument("--max-arity", type=int, default=3, help="arity of the surjective polymorphisms used (default 3)")
    common(sp)
    sp.set_defaults(func=cmd_hull)

    sp = sub.add_parser("per-eval", help="evaluate a pH formula in the periodic power")
    sp.add_argument("structure")
    sp.add_argument("formula")
    sp.add_argument("args", nargs="*", help="periodic elements such as '<0 1>'")
    sp.add_argument("--vars", help="comma-separated variable order (default: order of first occurrence)")
    common(sp)
    sp.set_defaults(func=cmd_per_eval)

    sp = sub.add_parser("reduce", help="rewrite a pH sentence through pH definitions")
    sp.add_argument("definitions")
    sp.add_argument("sentence")
    sp.add_argument("--check", metavar="TEMPLATE", help="also solve both sides over this base template")
    common(sp)
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("selftest", help="run the small exhaustive self-checks")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        UsageError,
        FormulaError,
        PartitionError,
        OSError,
        eqrel.TemplateFileError,
        eqrel.PreconditionError,
        finstruct.StructureError,
        periodic.PeriodError,
        morphisms.BudgetError,
    ) as exc:
        print(f"periomorph: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
