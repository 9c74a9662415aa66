from __future__ import annotations

import itertools

import pytest

from periomorph import eqrel
from periomorph.classify import (
    CONP_HARD,
    IN_L,
    NOT_FOUND,
    NP_COMPLETE,
    Definition,
    classify,
    defined_template,
    find_ph_witness,
    load_definitions,
    parse_definitions,
    reduce_instance,
)
from periomorph.eqrel import EqRelation, EqTemplate, compile
from periomorph.finstruct import enumerate_ph_formulas
from periomorph.formula import FormulaError, Var, is_positive_horn, parse, size, symbols, to_text
from periomorph.partition import all_partitions
from periomorph.qcsp import solve

P = eqrel.relation_P()
I = eqrel.relation_I()
NEQ = eqrel.relation_neq()
XS = ["x0", "x1", "x2"]


def single(r, name="R"):
    return EqTemplate(name, {name: r})


def test_examples():
    assert classify(single(NEQ)).cls == IN_L
    v = classify(single(P))
    assert v.cls == NP_COMPLETE and v.label == "NP-complete"
    assert [e.property for e in v.evidence] == ["not negative"]
    v = classify(single(I))
    assert v.cls == CONP_HARD and [e.property for e in v.evidence] == ["not negative", "not positive"]
    assert classify(EqTemplate("empty", {})).cls == IN_L


@pytest.mark.parametrize("k", [1, 2, 3])
def test_trichotomy_agrees_with_predicates(k):
    parts = all_partitions(k)
    counts = {IN_L: 0, NP_COMPLETE: 0, CONP_HARD: 0}
    for m in range(1 << len(parts)):
        r = EqRelation(k, frozenset(p for i, p in enumerate(parts) if m >> i & 1))
        cls = classify(single(r)).cls
        counts[cls] += 1
        if eqrel.is_negative(r):
            assert cls == IN_L
        elif eqrel.is_positive(r):
            assert cls == NP_COMPLETE
        else:
            assert cls == CONP_HARD
    if k == 3:
        assert all(counts.values())


def test_invariant_under_renaming_and_permutation():
    for r in (P, I, NEQ, eqrel.relation_eq()):
        base = classify(single(r)).cls
        assert classify(single(r, "Other")).cls == base
        for perm in itertools.permutations(range(r.arity)):
            names = [f"x{i}" for i in range(r.arity)]
            permuted = compile(eqrel.definition(r), [names[p] for p in perm])
            assert classify(single(permuted)).cls == base
        assert classify(EqTemplate("T", {"R": r, "E": eqrel.relation_eq()})).cls == base


def test_json_shape():
    v = classify(single(I), witness=True).to_json()
    assert v["schema"] == 1 and v["class"] == CONP_HARD and v["label"] == "coNP-hard"
    assert v["witness_status"] == "found" and v["witness"] == "R(x0, x1, x2)"
    assert v["note"] and v["evidence"][0]["relation"] == "R"
    v = classify(single(NEQ), witness=True).to_json()
    assert v["witness_status"] == "not applicable" and "witness" not in v


def test_witness_direct_and_composite():
    s = compile(parse("x0 = x1 | x2 = x3"), ["x0", "x1", "x2", "x3"])
    w = find_ph_witness(single(s, "S"), P)
    assert to_text(w) == "S(x0, x1, x1, x2)"
    b = EqRelation.of(3, ["0,0,0", "0,0,1", "0,1,2"])
    t = single(b, "B")
    w = find_ph_witness(t, I)
    assert w is not NOT_FOUND and is_positive_horn(w)
    assert compile(w, XS, template=t) == I
    assert size(w) == 3


def test_witness_is_minimal():
    b = EqRelation.of(3, ["0,0,0", "0,0,1", "0,1,2"])
    t = single(b, "B")
    assert find_ph_witness(t, I, max_size=2) is NOT_FOUND
    # exhaustive oracle: no pH formula with at most two atoms and quantifiers defines I
    for f in enumerate_ph_formulas(t.language(), XS, max_vars=5, max_depth=2, max_atoms=2):
        assert compile(f, XS, template=t) != I, to_text(f)


def test_witness_not_found_for_negative_templates():
    # negative relations only ever define negative relations
    t = EqTemplate("T", {"N": NEQ, "E": eqrel.relation_eq()})
    assert find_ph_witness(t, P, max_aux=2, max_size=4) is NOT_FOUND
    v = classify(single(P), witness=True, max_size=1)
    assert v.witness_status == "found"
    with pytest.raises(ValueError):
        find_ph_witness(t, P, max_aux=20)


DEFS = """
# relations and a function over a template with P/3
rel Q(x, y, z) := P(x, y, z);
rel S(x, y) := exists z. P(x, z, y) & P(z, x, y);
fun f(x) -> y := P(x, x, y);
const c -> y := exists z. P(y, z, y);
"""


def test_parse_definitions(tmp_path):
    defs = parse_definitions(DEFS)
    assert list(defs) == ["Q", "S", "f", "c"]
    assert defs["f"].params == ("x", "y") and defs["c"].params == ("y",)
    path = tmp_path / "d.defs"
    path.write_text(DEFS)
    assert load_definitions(str(path)) == defs
    for bad in [
        "rel S(x) := x = y;",
        "rel S(x) -> y := x = y;",
        "fun f(x) := x = x;",
        "const c(x) -> y := x = y;",
        "rel S(x) := x = x; rel S(x) := x = x;",
        "rel S(x) := x = x | x = x;",
        "table S;",
    ]:
        with pytest.raises(FormulaError):
            parse_definitions(bad)


def test_reduce_instance_text():
    defs = parse_definitions(DEFS)
    f = parse("forall x. exists y. S(x, y) & Q(x, f(y), c())")
    g = reduce_instance(f, defs)
    assert is_positive_horn(g)
    assert set(symbols(g)) == {"P"}
    with pytest.raises(FormulaError):
        reduce_instance(parse("exists x. T(x)"), defs)
    with pytest.raises(FormulaError):
        reduce_instance(parse("exists x. S(x, x) | S(x, x)"), defs)
    d = Definition(("x", "y"), parse("exists z. P(x, z, y)"))
    assert to_text(d.instantiate([Var("a"), Var("b")])) == "exists z. P(a, z, b)"
    with pytest.raises(FormulaError):
        d.instantiate([Var("a")])


def test_reduction_preserves_truth_on_relational_sentences():
    base = single(P, "P")
    defs = {k: v for k, v in parse_definitions(DEFS).items() if k in ("Q", "S")}
    derived = defined_template(base, defs)
    for text in [
        "forall x. exists y. S(x, y)",
        "forall x y. S(x, y)",
        "exists x. forall y. Q(x, x, y)",
        "forall x y z. Q(x, y, z)",
        "forall x y. exists z. Q(x, z, y) & S(z, y)",
    ]:
        f = parse(text)
        assert solve(derived, f) == solve(base, reduce_instance(f, defs)), text
