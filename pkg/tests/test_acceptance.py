"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""
from __future__ import annotations

import itertools
import random
from math import lcm

import pytest

from periomorph import eqrel, qcsp
from periomorph.classify import (
    CONP_HARD,
    IN_L,
    NP_COMPLETE,
    Definition,
    classify,
    defined_template,
    reduce_instance,
)
from periomorph.eqrel import EqRelation, EqTemplate
from periomorph.finstruct import (
    FiniteStructure,
    enumerate_ph_sentences,
    evaluate,
    ph_definable_relations,
    power,
    product,
)
from periomorph.formula import (
    App,
    Atom,
    Eq,
    Exists,
    Forall,
    Var,
    conj,
    flatten_atoms,
    free_vars,
    parse,
    rename_free,
    to_text,
)
from periomorph.morphisms import (
    OperationTable,
    PolyCone,
    cone_check,
    cone_violation,
    from_polymorphism,
    ph_hull,
    polymorphisms,
)
from periomorph.partition import Partition, all_partitions
from periomorph.periodic import (
    canonicalize,
    elements,
    eval_ph_on_per,
    iso_per_power,
    iso_prod_per,
)
from periomorph.sampling import random_ph_sentence
from periomorph.template import define_disequality, has_constant_polymorphism

from conftest import ACCEPTANCE


def report(n: int, ok: bool, line: str) -> None:
    ACCEPTANCE[n] = (ok, line)
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {line}")
    assert ok, line


def pats(*texts: str) -> frozenset[Partition]:
    return frozenset(Partition.parse(t) for t in texts)


def all_relations(k: int) -> list[EqRelation]:
    parts = all_partitions(k)
    return [EqRelation(k, frozenset(p for i, p in enumerate(parts) if m >> i & 1)) for m in range(1 << len(parts))]


def structures(size: int, language: dict[str, int]) -> list[FiniteStructure]:
    choices = []
    for sym, k in sorted(language.items()):
        space = list(itertools.product(range(size), repeat=k))
        choices.append([(sym, frozenset(t for i, t in enumerate(space) if m >> i & 1)) for m in range(1 << len(space))])
    return [FiniteStructure(size, dict(combo), arities=language) for combo in itertools.product(*choices)]


# 1 -------------------------------------------------------------------------


def test_criterion_1_trichotomy():
    got = {
        "neq": classify(EqTemplate("neq", {"N": eqrel.relation_neq()})).cls,
        "P": classify(EqTemplate("P", {"P": eqrel.relation_P()})).cls,
        "I": classify(EqTemplate("I", {"I": eqrel.relation_I()})).cls,
    }
    ok = got == {"neq": IN_L, "P": NP_COMPLETE, "I": CONP_HARD}
    first = [classify(EqTemplate("R", {"R": r})).cls for r in all_relations(3)]
    second = [classify(EqTemplate("R", {"R": r})).cls for r in all_relations(3)]
    total = len(first) == 32 and all(c in (IN_L, NP_COMPLETE, CONP_HARD) for c in first)
    counts = {c: first.count(c) for c in (IN_L, NP_COMPLETE, CONP_HARD)}
    report(1, ok and total and first == second, f"{got}; 32 arity-3 templates -> {counts}, deterministic={first == second}")


# 2 -------------------------------------------------------------------------


def test_criterion_2_example_relations():
    xs = ["x0", "x1", "x2"]
    P = eqrel.compile(parse("x0 = x1 | x1 = x2"), xs)
    I = eqrel.compile(parse("x0 = x1 -> x1 = x2"), xs)
    ok = (
        P.patterns == pats("0,0,1", "0,1,1", "0,0,0")
        and I.patterns == pats("0,1,2", "0,1,1", "0,1,0", "0,0,0")
        and eqrel.is_positive(P)
        and not eqrel.is_negative(P)
        and not eqrel.is_positive(I)
        and not eqrel.is_negative(I)
    )
    report(2, ok, f"P={P}; I={I}; P positive/not negative, I neither")


# 3 -------------------------------------------------------------------------


def test_criterion_3_solver_oracle():
    rng = random.Random(20240301)
    templates = [
        EqTemplate("eq", {"E": eqrel.relation_eq()}),
        EqTemplate("neq", {"N": eqrel.relation_neq()}),
        EqTemplate("P", {"P": eqrel.relation_P()}),
        EqTemplate("I", {"I": eqrel.relation_I()}),
    ]
    disagreements, checked, trues = [], 0, 0
    for t in templates:
        for _ in range(500):
            f = random_ph_sentence(rng, t.language(), max_vars=4, max_atoms=4)
            v = qcsp.variable_count(f)
            assert 1 <= v <= 4
            a = qcsp.solve(t, f)
            checked += 1
            trues += a
            if a != qcsp.solve_bruteforce(t, f, v):
                disagreements.append((t.name, to_text(f)))
    report(3, not disagreements, f"{checked} sentences ({trues} true), {len(disagreements)} disagreements {disagreements[:3]}")


# 4 -------------------------------------------------------------------------


def _basic_violations(language: dict[str, int], sizes, max_atoms: int):
    corpus = list(enumerate_ph_sentences(language, max_vars=3, max_depth=6, max_atoms=max_atoms))
    structs = [s for n in sizes for s in structures(n, language)]
    truth = {s: [evaluate(s, f) for f in corpus] for s in structs}
    bad, checked = [], 0
    for s, t in itertools.product(structs, repeat=2):
        st = product([s, t])
        for f, a, b in zip(corpus, truth[s], truth[t]):
            checked += 1
            if evaluate(st, f) != (a and b):
                bad.append((s, t, f))
    return bad, checked, len(corpus), len(structs)


def test_criterion_4_products():
    bad1, n1, c1, s1 = _basic_violations({"R": 1}, (1, 2, 3), max_atoms=3)
    bad2, n2, c2, s2 = _basic_violations({"R": 2}, (1, 2), max_atoms=2)
    bad = bad1 + bad2
    report(
        4,
        not bad,
        f"unary: {s1} structures, {c1} sentences; binary: {s2} structures, {c2} sentences; "
        f"{n1 + n2} checks, {len(bad)} violations",
    )


# 5 -------------------------------------------------------------------------


def test_criterion_5_periodic_evaluation():
    bad, checked = [], 0
    for language, sizes, atoms in (({"R": 1}, (1, 2, 3), 3), ({"R": 2}, (1, 2, 3), 2)):
        corpus = list(enumerate_ph_sentences(language, max_vars=3, max_depth=6, max_atoms=atoms))
        for n in sizes:
            for s in structures(n, language):
                for f in corpus:
                    checked += 1
                    if eval_ph_on_per(s, f, []) != evaluate(s, f):
                        bad.append((s, f))
    rng = random.Random(5)
    unstable, pointwise_vs_power, samples, via_power = [], [], 0, 0
    structs = structures(2, {"R": 2}) + structures(3, {"R": 1})
    while samples < 240:
        s = rng.choice(structs)
        f = _random_ph_formula(rng, s.rel_arity)
        names = list(free_vars(f))
        args = [canonicalize([rng.randrange(s.size) for _ in range(rng.randint(1, 4))]) for _ in names]
        h = lcm(*(a.period for a in args)) if args else 1
        samples += 1
        here = eval_ph_on_per(s, f, args, names)
        if here != eval_ph_on_per(s, f, args, names, horizon_length=2 * h):
            unstable.append((f, args))
        if s.size ** h <= 64:
            # independent route: the h-th finite power, elements read as h-tuples
            via_power += 1
            big = power(s, h)
            code = {}
            for v, a in zip(names, args):
                idx = 0
                for i in range(h):
                    idx = idx * s.size + a[i]
                code[v] = idx
            if evaluate(big, f, code) != here:
                pointwise_vs_power.append((f, args))
    ok = not bad and not unstable and not pointwise_vs_power
    report(
        5,
        ok,
        f"{checked} sentence checks, {len(bad)} mismatches; {samples} random (formula, args): "
        f"{len(unstable)} horizon instabilities, {len(pointwise_vs_power)}/{via_power} disagreements with the finite power",
    )


def _random_ph_formula(rng: random.Random, language: dict[str, int]):
    """A pH formula with 1-2 free variables (x, y) and a few bound ones."""
    free = ["x", "y"][: rng.randint(1, 2)]
    while True:
        f = random_ph_sentence(rng, dict(language), max_vars=2, max_atoms=3)
        # open the sentence up: rename the outermost binders to free variables
        body, opened = f, []
        while isinstance(body, (Exists, Forall)) and len(opened) < len(free):
            opened.append(body.var)
            body = body.body
        body = rename_free(body, dict(zip(opened, free)))
        if free_vars(body):
            return body


# 6 -------------------------------------------------------------------------


def test_criterion_6_isomorphisms():
    lang = {"U": 1, "R": 2}
    structs = structures(2, lang)
    elems = elements(2, 6)
    problems = []
    # A^per -> (A^2)^per: round trip on every element of period <= 6
    iso0 = iso_per_power(structs[0], 2)
    for p in elems:
        if iso0.backward(iso0.forward(p)) != p:
            problems.append(("power round trip", p))
    for q in elements(4, 3):
        if iso0.forward(iso0.backward(q)) != q:
            problems.append(("power inverse", q))
    # atom checks depend only on the interpretation of the atom's own symbol,
    # so each distinct interpretation is checked once and shared across structures
    memo = {}
    power_checked = 0
    for s in structs:
        iso = iso_per_power(s, 2)
        for sym, k in (("=", 2), ("U", 1), ("R", 2)):
            key = (sym, s.relations.get(sym))
            if key not in memo:
                bad = [args for args in itertools.product(elems, repeat=k) if iso.atom_mismatch(sym, args)]
                memo[key] = bad
                power_checked += len(elems) ** k
            if memo[key]:
                problems.append(("power atom", sym, memo[key][0]))
    if iso0.forward(canonicalize([0, 1])) != canonicalize([0 * 2 + 1]):
        problems.append(("<ab> -> <(a,b)>",))

    # A^per x B^per -> (A x B)^per
    pairs = list(itertools.product(elems, repeat=2))
    isoP = iso_prod_per(structs[0], structs[0])
    for pr in pairs:
        if isoP.backward(isoP.forward(pr)) != pr:
            problems.append(("product round trip", pr))
    for q in elements(4, 6):
        if isoP.forward(isoP.backward(q)) != q:
            problems.append(("product inverse", q))
    if isoP.forward((canonicalize([0]), canonicalize([0, 1]))) != canonicalize([0, 1]):
        problems.append(("pairing example",))
    rng = random.Random(6)
    small = [pr for pr in pairs if max(pr[0].period, pr[1].period) <= 2]
    prod_checked = 0
    seen = {}
    for s, t in itertools.product(structs, repeat=2):
        iso = iso_prod_per(s, t)
        key_u = ("U", s.relations["U"], t.relations["U"])
        if key_u not in seen:
            seen[key_u] = [pr for pr in pairs if iso.atom_mismatch("U", [pr])]
            prod_checked += len(pairs)
        key_r = ("R", s.relations["R"], t.relations["R"])
        if key_r not in seen:
            bad = [args for args in itertools.product(small, repeat=2) if iso.atom_mismatch("R", args)]
            bad += [args for args in ((rng.choice(pairs), rng.choice(pairs)) for _ in range(300)) if iso.atom_mismatch("R", args)]
            bad += [args for args in ((pr, rng.choice(pairs)) for pr in rng.sample(pairs, 300)) if iso.atom_mismatch("R", args)]
            seen[key_r] = bad
            prod_checked += len(small) ** 2 + 600
        for key in (key_u, key_r):
            if seen[key]:
                problems.append(("product atom", key[0], seen[key][0]))
    eq_bad = [args for args in itertools.product(small, repeat=2) if isoP.atom_mismatch("=", args)]
    problems += [("product equality", a) for a in eq_bad]
    report(
        6,
        not problems,
        f"{len(elems)} elements of period <= 6, {len(structs)} structures; power: {power_checked} atom checks; "
        f"product: {len(pairs)} round trips, {prod_checked} atom checks; {len(problems)} problems {problems[:2]}",
    )


# 7 -------------------------------------------------------------------------


def test_criterion_7_cones():
    checked = 0
    failures = []
    lang = {"R": 2}
    structs = structures(1, lang) + structures(2, lang)
    for s in structs:
        for arity in (1, 2, 3):
            for h in polymorphisms(s, arity):
                checked += 1
                c = from_polymorphism(h, (1, 2, 3, 4, 6), s)
                if not cone_check(c):
                    failures.append((s, h, cone_violation(c)))
    s = FiniteStructure(2, {"R": {(0, 1), (1, 0)}})
    g1 = OperationTable.projection(2, 1, 0)
    g2 = OperationTable(2, 2, (1, 0, 1, 0))  # g2(a, a) = 1 - a, so g1(a) != g2(a, a)
    bad = PolyCone(s, {1: g1, 2: g2})
    violation = cone_violation(bad)
    rejected = violation is not None and violation.kind == "coherence" and violation.detail[2] == (0,)
    report(7, not failures and rejected, f"{checked} cones from polymorphisms, {len(failures)} rejected; incoherent cone -> {violation}")


# 8 -------------------------------------------------------------------------


def test_criterion_8_hull():
    pairs = list(itertools.product(range(2), repeat=2))
    subsets = [frozenset(c) for k in range(5) for c in itertools.combinations(pairs, k)]
    mismatches, law_failures, checked = [], [], 0
    for s in structures(2, {"S": 2}):
        definable = ph_definable_relations(s, 2, max_size=7)
        hull = {}
        for r in subsets:
            oracle = frozenset(pairs)
            for d in definable:
                if r <= d:
                    oracle &= d
            hull[r] = ph_hull(s, r, 3)
            checked += 1
            if hull[r] != oracle:
                mismatches.append((s, sorted(r), sorted(hull[r]), sorted(oracle)))
        for r in subsets:
            if not r <= hull[r] or ph_hull(s, hull[r], 3) != hull[r]:
                law_failures.append(("extensive/idempotent", s, r))
            for r2 in subsets:
                if r <= r2 and not hull[r] <= hull[r2]:
                    law_failures.append(("monotone", s, r, r2))
    report(8, not mismatches and not law_failures, f"{checked} (structure, R) pairs, {len(mismatches)} mismatches, {len(law_failures)} law failures")


# 9 -------------------------------------------------------------------------


def test_criterion_9_constant_or_neq():
    neq = pats("0,1")
    problems, checked = [], 0
    for k in (1, 2, 3):
        for r in all_relations(k):
            t = EqTemplate("R", {"R": r})
            checked += 1
            const = has_constant_polymorphism(t)
            try:
                f = define_disequality(t)
            except eqrel.PreconditionError:
                f = None
            if const == (f is not None):
                problems.append((r, const, f))
            if f is not None and eqrel.compile(f, ["x0", "x1"], template=t).patterns != neq:
                problems.append((r, "compiles wrong", f))
    report(9, not problems, f"{checked} templates, {len(problems)} problems")


# 10 ------------------------------------------------------------------------


def test_criterion_10_reduction():
    x, c = Var("x"), App("c")
    f = Atom("R", (x, c, App("f", (App("f", (x,)),))))
    y0, y1, y2 = Var("y0"), Var("y1"), Var("y2")
    expected = Exists("y0", Exists("y1", Exists("y2", conj([
        Atom("R", (x, y0, y2)),
        Eq(y0, c),
        Eq(App("f", (y1,)), y2),
        Eq(App("f", (x,)), y1),
    ]))))
    flat = flatten_atoms(f)
    shape_ok = flat == expected and to_text(flat) == "exists y0 y1 y2. R(x, y0, y2) & y0 = c() & f(y1) = y2 & f(x) = y1"

    base = EqTemplate("P", {"P": eqrel.relation_P()})
    defs = {
        "Q": Definition(("x", "y", "z"), parse("P(x, y, z)")),
        "S": Definition(("x", "y"), parse("exists z. P(x, z, y) & P(z, x, y)")),
        "T": Definition(("x", "y"), parse("forall z. P(x, y, z)")),
    }
    derived = defined_template(base, defs)
    rng = random.Random(10)
    disagreements, trues = [], 0
    for _ in range(100):
        g = random_ph_sentence(rng, derived.language(), max_vars=3, max_atoms=3)
        a = qcsp.solve(derived, g)
        trues += a
        if a != qcsp.solve(base, reduce_instance(g, defs)):
            disagreements.append(to_text(g))
    report(10, shape_ok and not disagreements, f"flattening exact={shape_ok}; 100 instances ({trues} true), {len(disagreements)} disagreements")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
