"""Small exhaustive self-checks, runnable from the command line."""
from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

from . import eqrel, qcsp
from .classify import classify
from .eqrel import EqRelation, EqTemplate
from .finstruct import FiniteStructure, ph_definable_relations
from .morphisms import cone_check, from_polymorphism, ph_hull, polymorphisms
from .partition import all_partitions, coarsens, meet
from .periodic import canonicalize, embed_ek, embed_enm, project_pk
from .sampling import random_ph_sentence
from .template import define_disequality, has_constant_polymorphism


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    checked: int
    detail: str = ""


def _relations(k: int) -> list[EqRelation]:
    parts = all_partitions(k)
    return [
        EqRelation(k, frozenset(p for i, p in enumerate(parts) if mask >> i & 1)) for mask in range(1 << len(parts))
    ]


def suite_partitions() -> SuiteResult:
    checked = 0
    for k in range(1, 5):
        parts = all_partitions(k)
        for p, q in itertools.product(parts, repeat=2):
            m = meet(p, q)
            checked += 1
            if not (coarsens(p, m) and coarsens(q, m)):
                return SuiteResult("partitions", False, checked, f"meet {m} of {p}, {q}")
            if any(coarsens(p, r) and coarsens(q, r) and not coarsens(m, r) for r in parts):
                return SuiteResult("partitions", False, checked, f"meet {m} of {p}, {q} not greatest")
    return SuiteResult("partitions", True, checked)


def suite_definitions() -> SuiteResult:
    checked = 0
    for k in range(1, 4):
        xs = [f"x{i}" for i in range(k)]
        for r in _relations(k):
            checked += 1
            if eqrel.is_positive(r) and eqrel.compile(eqrel.positive_definition(r), xs) != r:
                return SuiteResult("definitions", False, checked, f"positive definition of {r}")
            h = eqrel.negative_hull(r)
            if eqrel.negative_hull(h) != h or not r.patterns <= h.patterns:
                return SuiteResult("definitions", False, checked, f"hull of {r}")
            if eqrel.is_negative(r) and eqrel.compile(eqrel.negative_definition(r), xs) != r:
                return SuiteResult("definitions", False, checked, f"negative definition of {r}")
    return SuiteResult("definitions", True, checked)


def suite_trichotomy() -> SuiteResult:
    checked = 0
    expected = {"neq": "IN_L", "P": "NP_COMPLETE", "I": "CONP_HARD"}
    named = {"neq": eqrel.relation_neq(), "P": eqrel.relation_P(), "I": eqrel.relation_I()}
    for name, rel in named.items():
        checked += 1
        got = classify(EqTemplate(name, {name: rel})).cls
        if got != expected[name]:
            return SuiteResult("trichotomy", False, checked, f"{name}: {got}")
    for r in _relations(3):
        checked += 1
        classify(EqTemplate("R", {"R": r}))
    return SuiteResult("trichotomy", True, checked)


def suite_constant_or_neq() -> SuiteResult:
    checked = 0
    neq = eqrel.relation_neq()
    for k in range(1, 4):
        for r in _relations(k):
            t = EqTemplate("R", {"R": r})
            checked += 1
            if has_constant_polymorphism(t):
                continue
            f = define_disequality(t)
            if eqrel.compile(f, ["x0", "x1"], template=t) != neq:
                return SuiteResult("constant-or-neq", False, checked, f"{r}: {f}")
    return SuiteResult("constant-or-neq", True, checked)


def suite_solver() -> SuiteResult:
    rng = random.Random(7)
    templates = [
        EqTemplate("eq", {"E": eqrel.relation_eq()}),
        EqTemplate("neq", {"N": eqrel.relation_neq()}),
        EqTemplate("P", {"P": eqrel.relation_P()}),
        EqTemplate("I", {"I": eqrel.relation_I()}),
    ]
    checked = 0
    for t in templates:
        for _ in range(60):
            f = random_ph_sentence(rng, t.language())
            checked += 1
            if qcsp.solve(t, f) != qcsp.solve_bruteforce(t, f, qcsp.variable_count(f)):
                return SuiteResult("solver", False, checked, f"{t.name}: {f}")
    return SuiteResult("solver", True, checked)


def suite_periodic() -> SuiteResult:
    checked = 0
    for n in range(1, 4):
        for k in range(1, 6):
            for word in itertools.product(range(n), repeat=k):
                checked += 1
                if project_pk(embed_ek(word), k) != word:
                    return SuiteResult("periodic", False, checked, f"section fails at {word}")
                for m in (2 * k, 3 * k):
                    if canonicalize(embed_enm(word, m)) != embed_ek(word):
                        return SuiteResult("periodic", False, checked, f"e_({k},{m}) moves {word}")
    return SuiteResult("periodic", True, checked)


def _binary_structures() -> list[FiniteStructure]:
    pairs = list(itertools.product(range(2), repeat=2))
    return [
        FiniteStructure(2, {"S": set(c)}, arities={"S": 2})
        for k in range(5)
        for c in itertools.combinations(pairs, k)
    ]


def suite_cones() -> SuiteResult:
    checked = 0
    for s in _binary_structures():
        for arity in (1, 2):
            for h in polymorphisms(s, arity):
                checked += 1
                if not cone_check(from_polymorphism(h, (4, 6), s)):
                    return SuiteResult("cones", False, checked, f"{s}: {h}")
    return SuiteResult("cones", True, checked)


def suite_hull() -> SuiteResult:
    checked = 0
    pairs = list(itertools.product(range(2), repeat=2))
    subsets = [frozenset(c) for k in range(5) for c in itertools.combinations(pairs, k)]
    for s in _binary_structures():
        defs = ph_definable_relations(s, 2, max_size=6)
        for r in subsets:
            checked += 1
            hull = ph_hull(s, r, 2)
            oracle = frozenset(pairs)
            for d in defs:
                if r <= d:
                    oracle &= d
            if not hull <= oracle:
                return SuiteResult("hull", False, checked, f"{s}: hull of {sorted(r)} leaves {sorted(oracle)}")
    return SuiteResult("hull", True, checked)


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "partitions": suite_partitions,
    "definitions": suite_definitions,
    "trichotomy": suite_trichotomy,
    "constant-or-neq": suite_constant_or_neq,
    "solver": suite_solver,
    "periodic": suite_periodic,
    "cones": suite_cones,
    "hull": suite_hull,
}


def _run(name: str) -> SuiteResult:
    try:
        return SUITES[name]()
    except Exception as exc:  # a crash is a failure, reported like one
        return SuiteResult(name, False, 0, f"{type(exc).__name__}: {exc}")


def run_all(jobs: int = 1) -> list[SuiteResult]:
    names = list(SUITES)
    if jobs <= 1:
        return [_run(n) for n in names]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run, names))
