"""Complexity classification of equality templates and the QCSP reduction compiler."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .eqrel import (
    EqRelation,
    EqTemplate,
    compile,
    is_negative,
    is_positive,
    negativity_violation,
    positivity_violation,
    relation_I,
    relation_P,
)
from .formula import (
    App,
    Atom,
    Eq,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Var,
    conj,
    flatten_atoms,
    free_vars,
    is_positive_horn,
    parse,
    substitute,
    symbols,
)
from .partition import MAX_SIZE, Partition, all_partitions, extensions

IN_L = "IN_L"
NP_COMPLETE = "NP_COMPLETE"
CONP_HARD = "CONP_HARD"

LABELS = {IN_L: "in L", NP_COMPLETE: "NP-complete", CONP_HARD: "coNP-hard"}
HARDNESS_NOTE = "hardness per cited prior work"


class _NotFound:
    def __repr__(self) -> str:
        return "NOT_FOUND"

    def __bool__(self) -> bool:
        return False


NOT_FOUND = _NotFound()


@dataclass(frozen=True)
class Evidence:
    symbol: str
    property: str  # "not negative" or "not positive"
    patterns: str
    witness: tuple[str, ...]

    def to_json(self) -> dict:
        return {"relation": self.symbol, "fails": self.property, "patterns": self.patterns, "witness": list(self.witness)}


@dataclass(frozen=True)
class ComplexityVerdict:
    cls: str
    evidence: tuple[Evidence, ...] = ()
    witness_status: str = "not searched"
    witness: Formula | None = None
    note: str = ""

    @property
    def label(self) -> str:
        return LABELS[self.cls]

    def to_json(self) -> dict:
        out = {
            "schema": 1,
            "class": self.cls,
            "label": self.label,
            "evidence": [e.to_json() for e in self.evidence],
            "witness_status": self.witness_status,
        }
        if self.witness is not None:
            out["witness"] = str(self.witness)
        if self.note:
            out["note"] = self.note
        return out


def classify(t: EqTemplate, witness: bool = False, **search) -> ComplexityVerdict:
    """Negative templates are in L; positive non-negative ones NP-complete; the rest coNP-hard.

    With ``witness=True`` a bounded search looks for a pH definition of the
    relation P (second case) or I (third case) over ``t``.
    """
    for sym, rel in t.relations.items():
        if rel.arity > MAX_SIZE:
            raise ValueError(f"relation {sym} has arity {rel.arity} above the cap {MAX_SIZE}")
    evidence: list[Evidence] = []
    non_negative = next(((s, r) for s, r in t.relations.items() if not is_negative(r)), None)
    if non_negative is None:
        return ComplexityVerdict(IN_L, witness_status="not applicable")
    sym, rel = non_negative
    evidence.append(Evidence(sym, "not negative", str(rel), (str(negativity_violation(rel)),)))
    non_positive = next(((s, r) for s, r in t.relations.items() if not is_positive(r)), None)
    if non_positive is None:
        cls, target = NP_COMPLETE, relation_P()
    else:
        sym, rel = non_positive
        member, outside = positivity_violation(rel)
        evidence.append(Evidence(sym, "not positive", str(rel), (str(member), str(outside))))
        cls, target = CONP_HARD, relation_I()
    status, found = "not searched", None
    if witness:
        result = find_ph_witness(t, target, **search)
        if result is NOT_FOUND:
            status = "not found within bounds"
        else:
            status, found = "found", result
    return ComplexityVerdict(cls, tuple(evidence), status, found, HARDNESS_NOTE)


# --------------------------------------------------------------------------
# Bounded witness search


@dataclass
class _Node:
    cost: int
    alternations: int
    outer: type | None
    how: tuple  # ("matrix", atoms) or ("quant", kind, child_mask)


class _Level:
    """Partitions of a fixed size with bitmask helpers for projection."""

    def __init__(self, v: int):
        self.v = v
        self.parts = all_partitions(v)
        self.index = {p: i for i, p in enumerate(self.parts)}
        self.full = (1 << len(self.parts)) - 1

    def mask(self, pred) -> int:
        return sum(1 << i for i, p in enumerate(self.parts) if pred(p))

    def project_masks(self, upper: _Level) -> list[int]:
        """For each partition here, the mask of its one-point extensions above."""
        return [sum(1 << upper.index[q] for q in extensions(p)) for p in self.parts]


def find_ph_witness(
    t: EqTemplate,
    target: EqRelation,
    max_aux: int = 4,
    max_alternations: int = 3,
    max_size: int = 6,
    budget: int = 200_000,
) -> Formula | _NotFound:
    """Smallest prenex pH formula over ``t`` found defining ``target``, or NOT_FOUND.

    Iterative deepening over size (atoms plus quantifiers); within a size the
    first formula in a fixed order wins.  The search is bounded, so
    NOT_FOUND only means nothing turned up within the bounds.  Every
    returned formula has been recompiled and checked against ``target``.
    """
    k = target.arity
    if k + max_aux > MAX_SIZE:
        raise ValueError("search width exceeds the partition cap")
    levels = {v: _Level(v) for v in range(k, k + max_aux + 1)}
    goal = levels[k].mask(lambda p: p in target.patterns)
    names = [f"x{i}" for i in range(k)] + [f"y{j}" for j in range(max_aux)]
    spent = 0
    atom_cache: dict[int, list[tuple[int, Formula]]] = {}
    for size in range(1, max_size + 1):
        carried: dict[int, _Node] = {}
        found_at: dict[int, dict[int, _Node]] = {}
        width = min(k + max_aux, k + size - 1)
        for v in range(width, k - 1, -1):
            level = levels[v]
            table = carried
            budget_atoms = size - (v - k)
            if budget_atoms >= 1:
                if v not in atom_cache:
                    atom_cache[v] = _atom_masks(t, level, names[:v])
                atoms = atom_cache[v]
                cost: dict[int, tuple] = {}
                frontier = []
                for m, a in atoms:
                    if m not in cost:
                        cost[m] = (a,)
                        frontier.append(m)
                for c in range(2, budget_atoms + 1):
                    nxt = []
                    for m in frontier:
                        for am, a in atoms:
                            x = m & am
                            if x not in cost:
                                cost[x] = cost[m] + (a,)
                                nxt.append(x)
                                spent += 1
                    frontier = nxt
                    if spent > budget:
                        return NOT_FOUND
                for m, combo in cost.items():
                    node = _Node(len(combo), 0, None, ("matrix", combo))
                    if m not in table or table[m].cost > node.cost:
                        table[m] = node
            found_at[v] = table
            if v == k:
                break
            lower = levels[v - 1]
            ext = lower.project_masks(level)
            carried = {}
            for m, node in table.items():
                if node.cost + 1 > size:
                    continue
                for kind in (Exists, Forall):
                    alt = node.alternations + (node.outer is not None and node.outer is not kind)
                    if alt > max_alternations:
                        continue
                    if kind is Exists:
                        x = sum(1 << i for i, e in enumerate(ext) if m & e)
                    else:
                        x = sum(1 << i for i, e in enumerate(ext) if m & e == e)
                    spent += 1
                    new = _Node(node.cost + 1, alt, kind, ("quant", kind, m))
                    old = carried.get(x)
                    if old is None or (old.cost, old.alternations) > (new.cost, new.alternations):
                        carried[x] = new
            if spent > budget:
                return NOT_FOUND
        top_level = found_at.get(k, {})
        if goal in top_level and top_level[goal].cost <= size:
            f = _rebuild(found_at, k, goal, names)
            if compile(f, names[:k], template=t) != target:
                raise AssertionError(f"witness {f} does not compile to the target")
            return f
    return NOT_FOUND


def _atom_masks(t: EqTemplate, level: _Level, xs: Sequence[str]) -> list[tuple[int, Formula]]:
    from itertools import combinations, product

    out: list[tuple[int, Formula]] = []
    v = level.v
    for sym, rel in t.relations.items():
        for pos in product(range(v), repeat=rel.arity):
            f = Atom(sym, tuple(Var(xs[i]) for i in pos))
            out.append((level.mask(lambda p, pos=pos: Partition.from_labels([p.rgs[i] for i in pos]) in rel.patterns), f))
    for i, j in combinations(range(v), 2):
        out.append((level.mask(lambda p, i=i, j=j: p.rgs[i] == p.rgs[j]), Eq(Var(xs[i]), Var(xs[j]))))
    return out


def _rebuild(found_at: dict[int, dict[int, _Node]], v: int, mask: int, names: Sequence[str]) -> Formula:
    node = found_at[v][mask]
    if node.how[0] == "matrix":
        return conj(node.how[1])
    _, kind, child = node.how
    return kind(names[v], _rebuild(found_at, v + 1, child, names))


# --------------------------------------------------------------------------
# Reduction compiler


@dataclass(frozen=True)
class Definition:
    """A pH formula defining a symbol: ``params`` are the relation arguments,
    or the function arguments followed by the result variable."""

    params: tuple[str, ...]
    body: Formula

    def __post_init__(self) -> None:
        if not is_positive_horn(self.body):
            raise FormulaError(f"definition body is not positive Horn: {self.body}")
        extra = set(free_vars(self.body)) - set(self.params)
        if extra:
            raise FormulaError(f"definition body has stray free variables {sorted(extra)}")

    def instantiate(self, args: Sequence[Var]) -> Formula:
        if len(args) != len(self.params):
            raise FormulaError(f"definition expects {len(self.params)} arguments")
        return substitute(self.body, dict(zip(self.params, args)))


def reduce_instance(f: Formula, defs: Mapping[str, Definition]) -> Formula:
    """Rewrite a pH sentence over one language into one over the defining language.

    Atoms are first flattened so each mentions at most one non-logical symbol;
    then each flat atom ``R(x..)``, ``g(x..) = y`` or ``y = c`` is replaced by
    the corresponding definition with those variables plugged in.
    """
    if not is_positive_horn(f):
        raise FormulaError("reduce_instance needs a positive Horn formula")
    missing = sorted(s for s in symbols(f) if s not in defs)
    if missing:
        raise FormulaError(f"no definition for {', '.join(missing)}")
    return _replace(flatten_atoms(f), defs)


def _replace(f: Formula, defs: Mapping[str, Definition]) -> Formula:
    if isinstance(f, Atom):
        return defs[f.symbol].instantiate(list(f.args))
    if isinstance(f, Eq):
        lhs, rhs = f.lhs, f.rhs
        if isinstance(lhs, App):
            return defs[lhs.symbol].instantiate(list(lhs.args) + [rhs])
        if isinstance(rhs, App):
            return defs[rhs.symbol].instantiate(list(rhs.args) + [lhs])
        return f
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, _replace(f.body, defs))
    if hasattr(f, "left"):
        return type(f)(_replace(f.left, defs), _replace(f.right, defs))
    return f


# definitions file:
#   rel S(x, y) := exists z. P(x, z, y);
#   fun f(x) -> y := R(x, y);
#   const c -> y := U(y);
_DEF = re.compile(
    r"^\s*(rel|fun|const)\s+([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(([^)]*)\))?\s*(?:->\s*([A-Za-z_][A-Za-z0-9_]*))?\s*:=(.*)$",
    re.S,
)


def parse_definitions(text: str) -> dict[str, Definition]:
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    out: dict[str, Definition] = {}
    for stmt in text.split(";"):
        if not stmt.strip():
            continue
        m = _DEF.match(stmt)
        if not m:
            raise FormulaError(f"bad definition: {stmt.strip()!r}")
        kind, sym, params, result, body = m.groups()
        args = [p.strip() for p in (params or "").split(",") if p.strip()]
        if kind == "rel":
            if result:
                raise FormulaError(f"relation {sym} cannot have a result variable")
        else:
            if not result:
                raise FormulaError(f"{kind} {sym} needs '-> result'")
            if kind == "const" and args:
                raise FormulaError(f"constant {sym} takes no arguments")
            args.append(result)
        if sym in out:
            raise FormulaError(f"{sym} defined twice")
        out[sym] = Definition(tuple(args), parse(body))
    return out


def load_definitions(path: str) -> dict[str, Definition]:
    with open(path, encoding="utf-8") as fh:
        return parse_definitions(fh.read())


def defined_template(base: EqTemplate, defs: Mapping[str, Definition], name: str = "defined") -> EqTemplate:
    """The template whose relations are those ``defs`` define over ``base``."""
    rels = {}
    for sym, d in defs.items():
        rels[sym] = compile(d.body, list(d.params), template=base)
    return EqTemplate(name, rels)

