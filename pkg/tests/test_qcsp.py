from __future__ import annotations

import random

import pytest

from periomorph import eqrel
from periomorph.eqrel import EqTemplate
from periomorph.formula import FormulaError, parse
from periomorph.qcsp import materialize, solve, solve_bruteforce, variable_count
from periomorph.sampling import random_ph_sentence

P = EqTemplate("P", {"P": eqrel.relation_P()})
N = EqTemplate("N", {"N": eqrel.relation_neq()})
MIXED = EqTemplate("M", {"P": eqrel.relation_P(), "N": eqrel.relation_neq(), "I": eqrel.relation_I()})


@pytest.mark.parametrize(
    "text,expected",
    [
        ("forall x. exists y. N(x, y)", True),
        ("exists x. N(x, x)", False),
        ("forall x y. N(x, y)", False),
        ("forall x y. exists z. N(x, z) & N(y, z)", True),
        ("forall x. exists y. P(x, y, x)", True),
        ("forall x y z. P(x, y, z)", False),
        ("exists x. forall y. P(x, x, y)", True),
        ("exists x. false", False),
        ("forall x. x = x", True),
    ],
)
def test_known_sentences(text, expected):
    f = parse(text)
    t = N if "N(" in text else P
    assert solve(t, f) is expected
    assert solve_bruteforce(t, f, max(1, variable_count(f))) is expected


def test_trace():
    trace = []
    assert not solve(N, parse("forall x y. N(x, y)"), trace)
    assert trace[-1] == "forall x at [] -> false"
    assert any(line.strip().startswith("matrix") for line in trace)


def test_rejects_bad_input():
    for text in ["N(x, y)", "exists x. N(x, x) | N(x, x)", "exists x. Q(x)", "exists x. N(x)", "exists x. f(x) = x"]:
        with pytest.raises(FormulaError):
            solve(N, parse(text))
    with pytest.raises(ValueError):
        materialize(N, 0)
    with pytest.raises(ValueError):
        materialize(EqTemplate("big", {"B": eqrel.EqRelation.full(6)}), 10)


def test_small_domain_can_mislead_brute_force():
    f = parse("forall x y z. exists w. N(x, w) & N(y, w) & N(z, w)")
    assert solve(N, f)
    assert not solve_bruteforce(N, f, 3)
    assert solve_bruteforce(N, f, variable_count(f))


def test_random_sentences_match_brute_force():
    rng = random.Random(2024)
    lang = MIXED.language()
    seen = {True: 0, False: 0}
    for _ in range(300):
        f = random_ph_sentence(rng, lang, max_vars=4, max_atoms=3)
        n = max(1, variable_count(f))
        got = solve(MIXED, f)
        assert got == solve_bruteforce(MIXED, f, n), str(f)
        seen[got] += 1
    assert seen[True] > 20 and seen[False] > 20
