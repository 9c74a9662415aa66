"""Relations definable by pure equality formulas, represented by their patterns.

Over a countably infinite set, a relation that is first-order definable from
equality alone is a union of equality patterns: whether a tuple belongs to
it depends only on which of its entries coincide.  An :class:`EqRelation`
stores exactly that set of patterns.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .formula import (
    And,
    Atom,
    Bottom,
    Eq,
    Exists,
    Formula,
    FormulaError,
    Implies,
    Not,
    Or,
    Var,
    conj,
    disj,
    eq,
    free_vars,
    neq,
    parse,
)
from .partition import (
    Partition,
    all_partitions,
    coarsens,
    meet,
    pattern_of,
)


class PreconditionError(ValueError):
    """An operation was applied outside its precondition; ``witness`` explains why."""

    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class EqRelation:
    arity: int
    patterns: frozenset[Partition]

    def __post_init__(self) -> None:
        object.__setattr__(self, "patterns", frozenset(self.patterns))
        for p in self.patterns:
            if p.size != self.arity:
                raise ValueError(f"pattern {p} does not have size {self.arity}")

    @classmethod
    def of(cls, arity: int, patterns: Iterable[Partition | str | Sequence[int]]) -> EqRelation:
        out = []
        for p in patterns:
            if isinstance(p, str):
                p = Partition.parse(p)
            elif not isinstance(p, Partition):
                p = Partition(tuple(p))
            out.append(p)
        return cls(arity, frozenset(out))

    @classmethod
    def full(cls, arity: int) -> EqRelation:
        return cls(arity, frozenset(all_partitions(arity)))

    @classmethod
    def empty(cls, arity: int) -> EqRelation:
        return cls(arity, frozenset())

    def sorted_patterns(self) -> list[Partition]:
        return sorted(self.patterns)

    def __contains__(self, item: object) -> bool:
        if isinstance(item, Partition):
            return item in self.patterns
        return pattern_of(item) in self.patterns  # type: ignore[arg-type]

    def __len__(self) -> int:
        return len(self.patterns)

    def is_empty(self) -> bool:
        return not self.patterns

    def materialize(self, n: int) -> frozenset[tuple[int, ...]]:
        """Tuples over ``{0..n-1}`` whose pattern is a member."""
        from itertools import product

        return frozenset(t for t in product(range(n), repeat=self.arity) if pattern_of(t) in self.patterns)

    def __str__(self) -> str:
        return " ".join(f"[{p}]" for p in self.sorted_patterns()) or "{}"


@dataclass(frozen=True)
class EqTemplate:
    """A named family of equality relations over one infinite universe."""

    name: str
    relations: Mapping[str, EqRelation] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "relations", MappingProxyType(dict(sorted(self.relations.items()))))

    def __getitem__(self, symbol: str) -> EqRelation:
        return self.relations[symbol]

    def __contains__(self, symbol: object) -> bool:
        return symbol in self.relations

    def __iter__(self):
        return iter(self.relations)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EqTemplate):
            return NotImplemented
        return self.name == other.name and dict(self.relations) == dict(other.relations)

    def __hash__(self) -> int:
        return hash((self.name, tuple(self.relations.items())))

    def language(self) -> dict[str, int]:
        return {s: r.arity for s, r in self.relations.items()}


# --------------------------------------------------------------------------
# Compilation


def compile(f: Formula, free: Sequence[str], template: EqTemplate | None = None) -> EqRelation:
    """Pattern set of the relation ``f`` defines over an infinite pure set.

    ``f`` may use the full first-order connectives and quantifiers over
    equality; relation atoms are allowed only when ``template`` interprets
    them.  A quantifier step places the new element in one of the existing
    classes or a fresh one, which is exact because the domain is infinite and
    every relation in play is invariant under permutations.
    """
    free = list(free)
    if len(set(free)) != len(free):
        raise ValueError("duplicate free variable")
    extra = set(free_vars(f)) - set(free)
    if extra:
        raise FormulaError(f"free variables {sorted(extra)} not listed")
    found = set()
    for p in all_partitions(len(free)):
        env = dict(zip(free, p.rgs))
        if _holds(f, env, p.n_blocks, template):
            found.add(p)
    return EqRelation(len(free), frozenset(found))


def _holds(f: Formula, env: dict[str, int], n: int, template: EqTemplate | None) -> bool:
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Eq):
        return _class(f.lhs, env) == _class(f.rhs, env)
    if isinstance(f, Atom):
        if template is None or f.symbol not in template:
            raise FormulaError(f"relation symbol {f.symbol!r} is not interpreted")
        rel = template[f.symbol]
        if rel.arity != len(f.args):
            raise FormulaError(f"{f.symbol} has arity {rel.arity}, used with {len(f.args)}")
        return pattern_of([_class(a, env) for a in f.args]) in rel.patterns
    if isinstance(f, Not):
        return not _holds(f.body, env, n, template)
    if isinstance(f, And):
        return _holds(f.left, env, n, template) and _holds(f.right, env, n, template)
    if isinstance(f, Or):
        return _holds(f.left, env, n, template) or _holds(f.right, env, n, template)
    if isinstance(f, Implies):
        return not _holds(f.left, env, n, template) or _holds(f.right, env, n, template)
    test = any if isinstance(f, Exists) else all
    saved = env.get(f.var)
    try:
        return test(
            _holds(f.body, _bind(env, f.var, c), n + (c == n), template) for c in range(n + 1)
        )
    finally:
        if saved is None:
            env.pop(f.var, None)
        else:
            env[f.var] = saved


def _bind(env: dict[str, int], name: str, c: int) -> dict[str, int]:
    env[name] = c
    return env


def _class(t, env: dict[str, int]) -> int:
    if isinstance(t, Var):
        return env[t.name]
    raise FormulaError(f"function symbol {t.symbol!r} not allowed in equality formulas")


# --------------------------------------------------------------------------
# Positivity and negativity


def positivity_violation(r: EqRelation) -> tuple[Partition, Partition] | None:
    """A member pattern and a coarsening of it outside ``r``, if any."""
    for p in r.sorted_patterns():
        for a in range(p.n_blocks):
            for b in range(a + 1, p.n_blocks):
                q = p.merge(a, b)
                if q not in r.patterns:
                    return p, q
    return None


def is_positive(r: EqRelation) -> bool:
    """Upward closure under coarsening; the empty relation counts as positive."""
    return positivity_violation(r) is None


def _common_identifications(r: EqRelation) -> Partition:
    members = r.sorted_patterns()
    e = members[0]
    for p in members[1:]:
        e = meet(e, p)
    return e


def _safe_clauses(r: EqRelation) -> tuple[Partition, list[Partition]]:
    """Common identifications ``E`` and the partitions whose clauses exclude no member."""
    e = _common_identifications(r)
    kept = [
        s
        for s in all_partitions(r.arity)
        if coarsens(s, e) and s not in r.patterns and not any(coarsens(m, s) for m in r.patterns)
    ]
    return e, kept


def negative_hull(r: EqRelation) -> EqRelation:
    """Smallest negative relation containing ``r``.

    With ``E`` the identifications shared by all members, the clause
    ``OR{x_i != x_j : i ~s j}`` excludes exactly the patterns coarsening ``s``;
    it is kept when no member coarsens ``s``.  The hull is every coarsening of
    ``E`` that no kept clause excludes.
    """
    if r.is_empty():
        return r
    e, kept = _safe_clauses(r)
    hull = {
        q
        for q in all_partitions(r.arity)
        if coarsens(q, e) and not any(coarsens(q, s) for s in kept)
    }
    return EqRelation(r.arity, frozenset(hull))


def negativity_violation(r: EqRelation) -> Partition | None:
    """A pattern forced into every negative superset of ``r`` but missing from it."""
    extra = negative_hull(r).patterns - r.patterns
    return min(extra) if extra else None


def is_negative(r: EqRelation) -> bool:
    """``r`` equals its negative hull; the empty relation counts as negative (``x != x``)."""
    return negativity_violation(r) is None


def _vars(k: int, names: Sequence[str] | None) -> list[str]:
    names = list(names) if names is not None else [f"x{i}" for i in range(k)]
    if len(names) != k:
        raise ValueError(f"need {k} variable names")
    return names


def _equalities(p: Partition, xs: Sequence[str]) -> list[Formula]:
    return [eq(xs[i], xs[j]) for i, j in p.spanning_pairs()]


def _tautology(xs: Sequence[str]) -> Formula:
    return eq(xs[0], xs[0]) if xs else Not(Bottom())


def positive_definition(r: EqRelation, variables: Sequence[str] | None = None) -> Formula:
    """Disjunction over the finest members of the conjunction of their equalities."""
    bad = positivity_violation(r)
    if bad is not None:
        raise PreconditionError(f"relation is not positive: [{bad[0]}] in, [{bad[1]}] out", bad)
    xs = _vars(r.arity, variables)
    if r.is_empty():
        return Bottom()
    finest = [p for p in r.sorted_patterns() if not any(q != p and coarsens(p, q) for q in r.patterns)]
    return disj(conj(_equalities(p, xs)) if p.n_blocks < p.size else _tautology(xs) for p in finest)


def negative_definition(r: EqRelation, variables: Sequence[str] | None = None) -> Formula:
    """Equalities shared by all members plus the non-redundant safe clauses."""
    bad = negativity_violation(r)
    if bad is not None:
        raise PreconditionError(f"relation is not negative: [{bad}] lies in its negative hull", bad)
    xs = _vars(r.arity, variables)
    if r.is_empty():
        return neq(xs[0], xs[0]) if xs else Bottom()
    e, kept = _safe_clauses(r)
    # a clause for a coarser partition is implied by one for a finer partition
    minimal = [s for s in kept if not any(t != s and coarsens(s, t) for t in kept)]
    parts = _equalities(e, xs)
    for s in minimal:
        parts.append(disj(neq(xs[i], xs[j]) for i, j in s.spanning_pairs()))
    return conj(parts) if parts else _tautology(xs)


def both_definable_by_equalities(r: EqRelation) -> bool:
    """Whether ``r`` is empty, or exactly the coarsenings of one partition."""
    if r.is_empty():
        return True
    e = _common_identifications(r)
    return all(q in r.patterns for q in all_partitions(r.arity) if coarsens(q, e))


# --------------------------------------------------------------------------
# Template files
#
#   template NAME {
#     rel R/3 := x0 = x1 | x1 = x2;
#   }

_HEADER = re.compile(r"^\s*template\s+([A-Za-z_][A-Za-z0-9_]*)\s*\{(.*)\}\s*$", re.S)
_REL = re.compile(r"^\s*rel\s+([A-Za-z_][A-Za-z0-9_]*)\s*/\s*(\d+)\s*:=(.*)$", re.S)


class TemplateFileError(ValueError):
    pass


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("#", 1)[0] for line in text.splitlines())


def parse_template(text: str) -> EqTemplate:
    """Parse ``template NAME { rel R/k := <formula over x0..x(k-1)>; ... }``."""
    m = _HEADER.match(_strip_comments(text))
    if not m:
        raise TemplateFileError("expected 'template NAME { ... }'")
    name, body = m.group(1), m.group(2)
    rels: dict[str, EqRelation] = {}
    for stmt in body.split(";"):
        if not stmt.strip():
            continue
        sm = _REL.match(stmt)
        if not sm:
            raise TemplateFileError(f"bad statement: {stmt.strip()!r}")
        sym, k, src = sm.group(1), int(sm.group(2)), sm.group(3)
        if sym in rels:
            raise TemplateFileError(f"relation {sym} defined twice")
        try:
            f = parse(src)
            rels[sym] = compile(f, [f"x{i}" for i in range(k)])
        except (FormulaError, ValueError) as exc:
            raise TemplateFileError(f"relation {sym}: {exc}") from exc
    return EqTemplate(name, rels)


def load_template(path: str) -> EqTemplate:
    with open(path, encoding="utf-8") as fh:
        return parse_template(fh.read())


def format_template(t: EqTemplate) -> str:
    lines = [f"template {t.name} {{"]
    for sym, rel in t.relations.items():
        xs = [f"x{i}" for i in range(rel.arity)]
        lines.append(f"  rel {sym}/{rel.arity} := {definition(rel, xs)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def definition(r: EqRelation, variables: Sequence[str] | None = None) -> Formula:
    """Some defining formula: a disjunction of complete pattern descriptions."""
    xs = _vars(r.arity, variables)
    if r.is_empty():
        return Bottom()
    out = []
    for p in r.sorted_patterns():
        parts = _equalities(p, xs)
        blocks = p.blocks()
        for a in range(len(blocks)):
            for b in range(a + 1, len(blocks)):
                parts.append(neq(xs[blocks[a][0]], xs[blocks[b][0]]))
        out.append(conj(parts) if parts else _tautology(xs))
    return disj(out)


# the relations from the classification
P_FORMULA = "x0 = x1 | x1 = x2"
I_FORMULA = "x0 = x1 -> x1 = x2"


def relation_P() -> EqRelation:
    return compile(parse(P_FORMULA), ["x0", "x1", "x2"])


def relation_I() -> EqRelation:
    return compile(parse(I_FORMULA), ["x0", "x1", "x2"])


def relation_neq() -> EqRelation:
    return EqRelation.of(2, ["0,1"])


def relation_eq() -> EqRelation:
    return EqRelation.of(2, ["0,0"])
