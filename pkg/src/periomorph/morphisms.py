"""Polymorphisms, periomorphisms as coherent cones of finite stages, and pH-hulls.

A periomorphism of a finite structure is represented by finitely many of its
stages ``g_k`` (the k-ary polymorphism obtained by restricting to k-periodic
sequences).  Stages must agree along the repetition maps:
``g_l(a) = g_k(a a ... a)`` whenever ``l`` divides ``k``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .finstruct import FiniteStructure


class BudgetError(ValueError):
    pass


class ConeError(ValueError):
    pass


Relation = frozenset  # of tuples of ints


@dataclass(frozen=True)
class OperationTable:
    """Total ``arity``-ary operation on ``{0..size-1}``, stored row-major."""

    size: int
    arity: int
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.table) != self.size**self.arity:
            raise ValueError(f"table needs {self.size ** self.arity} entries, got {len(self.table)}")
        if any(not 0 <= v < self.size for v in self.table):
            raise ValueError("table value out of range")

    def index(self, args: Sequence[int]) -> int:
        idx = 0
        for a in args:
            idx = idx * self.size + a
        return idx

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise TypeError(f"expected {self.arity} arguments")
        return self.table[self.index(args)]

    def is_surjective(self) -> bool:
        return len(set(self.table)) == self.size

    def rows(self) -> Iterator[tuple[tuple[int, ...], int]]:
        for args, value in zip(itertools.product(range(self.size), repeat=self.arity), self.table):
            yield args, value

    @classmethod
    def from_function(cls, size: int, arity: int, fn: Callable[..., int]) -> OperationTable:
        return cls(size, arity, tuple(fn(*args) for args in itertools.product(range(size), repeat=arity)))

    @classmethod
    def projection(cls, size: int, arity: int, i: int) -> OperationTable:
        return cls.from_function(size, arity, lambda *a: a[i])

    @classmethod
    def constant(cls, size: int, arity: int, c: int) -> OperationTable:
        return cls(size, arity, (c,) * size**arity)


def all_operations(size: int, arity: int) -> Iterator[OperationTable]:
    for table in itertools.product(range(size), repeat=size**arity):
        yield OperationTable(size, arity, table)


def _image(op: OperationTable, rows: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Apply ``op`` to the columns of the matrix whose rows are ``rows``."""
    return tuple(op.table[op.index(col)] for col in zip(*rows))


def relation_violation(op: OperationTable, rel: Iterable[Sequence[int]]) -> tuple[tuple[int, ...], ...] | None:
    """Rows from ``rel`` whose column-wise image leaves ``rel``, or None."""
    rel = frozenset(tuple(t) for t in rel)
    for rows in itertools.product(sorted(rel), repeat=op.arity):
        if _image(op, rows) not in rel:
            return rows
    return None


def polymorphism_violation(op: OperationTable, s: FiniteStructure) -> tuple[str, tuple] | None:
    if op.size != s.size:
        raise ValueError("operation and structure have different universes")
    for sym, rel in s.atomic_relations().items():
        rows = relation_violation(op, rel)
        if rows is not None:
            return sym, rows
    return None


def is_polymorphism(op: OperationTable, s: FiniteStructure) -> bool:
    """``op`` preserves every relation, function graph and constant of ``s``."""
    return polymorphism_violation(op, s) is None


def polymorphisms(s: FiniteStructure, arity: int, surjective: bool = False, budget: int = 1 << 21) -> list[OperationTable]:
    """All polymorphisms of the given arity, by backtracking over table entries.

    ``budget`` bounds both the number of constraints and of search nodes.
    """
    n = s.size
    cells = n**arity
    rels = list(s.atomic_relations().values())
    # constraints: for each relation and row choice, the image tuple must be in the relation;
    # attach each constraint to the largest cell index it reads
    constraints: list[list[tuple[tuple[int, ...], frozenset]]] = [[] for _ in range(cells)]
    checked = 0
    for rel in rels:
        ordered = sorted(rel)
        for rows in itertools.product(ordered, repeat=arity):
            checked += 1
            if checked > budget:
                raise BudgetError("too many row combinations for the polymorphism search")
            cols = tuple(_index(n, col) for col in zip(*rows))
            if cols:
                constraints[max(cols)].append((cols, rel))
    table = [0] * cells
    out: list[OperationTable] = []
    nodes = 0

    def search(i: int) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetError("polymorphism search exceeded its node budget")
        if i == cells:
            op = OperationTable(n, arity, tuple(table))
            if not surjective or op.is_surjective():
                out.append(op)
            return
        for v in range(n):
            table[i] = v
            if all(tuple(table[c] for c in cols) in rel for cols, rel in constraints[i]):
                search(i + 1)

    search(0)
    return out


def _index(n: int, args: Sequence[int]) -> int:
    idx = 0
    for a in args:
        idx = idx * n + a
    return idx


# --------------------------------------------------------------------------
# Cones


def _divisor_closure(support: Iterable[int]) -> tuple[int, ...]:
    out = set()
    for k in support:
        if k < 1:
            raise ConeError("stage indices must be positive")
        out.update(d for d in range(1, k + 1) if k % d == 0)
    return tuple(sorted(out))


@dataclass(frozen=True)
class PolyCone:
    structure: FiniteStructure
    stages: Mapping[int, OperationTable] = field(default_factory=dict)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.stages))

    def to_json(self) -> dict[str, list[int]]:
        return {str(k): list(self.stages[k].table) for k in self.support}


def stage(c: PolyCone, k: int) -> OperationTable:
    """``g_k``, the k-ary polymorphism ``h o e_k`` of the represented periomorphism."""
    try:
        return c.stages[k]
    except KeyError:
        raise ConeError(f"stage {k} not in support {c.support}") from None


@dataclass(frozen=True)
class ConeViolation:
    kind: str  # "support", "arity", "polymorphism" or "coherence"
    detail: tuple

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def cone_violation(c: PolyCone) -> ConeViolation | None:
    """First reason ``c`` is not a coherent cone of polymorphisms, or None."""
    support = c.support
    if _divisor_closure(support) != support:
        missing = sorted(set(_divisor_closure(support)) - set(support))
        return ConeViolation("support", (tuple(missing),))
    n = c.structure.size
    for k in support:
        g = c.stages[k]
        if g.arity != k or g.size != n:
            return ConeViolation("arity", (k, g.arity, g.size))
    for k in support:
        bad = polymorphism_violation(c.stages[k], c.structure)
        if bad is not None:
            return ConeViolation("polymorphism", (k,) + bad)
    for k in support:
        gk = c.stages[k]
        for l in support:
            if l >= k or k % l:
                continue
            gl = c.stages[l]
            for args, value in gl.rows():
                repeated = args * (k // l)
                if gk.table[gk.index(repeated)] != value:
                    return ConeViolation("coherence", (l, k, args, value, gk.table[gk.index(repeated)]))
    return None


def cone_check(c: PolyCone) -> bool:
    return cone_violation(c) is None


def from_polymorphism(h: OperationTable, support: Iterable[int], structure: FiniteStructure) -> PolyCone:
    """Stages of ``h^per = h o pi_<k``: ``g_m(a_0..a_{m-1}) = h(a_{0 mod m}, ..., a_{k-1 mod m})``.

    The support is closed under divisors.
    """
    k = h.arity
    stages = {}
    for m in _divisor_closure(support):
        stages[m] = OperationTable.from_function(h.size, m, lambda *a, m=m: h(*(a[i % m] for i in range(k))))
    return PolyCone(structure, stages)


@dataclass(frozen=True)
class Preservation:
    holds: bool
    stage: int | None = None
    rows: tuple[tuple[int, ...], ...] | None = None

    def __bool__(self) -> bool:
        return self.holds


def preservation_violation(c: PolyCone, r: Iterable[Sequence[int]]) -> Preservation:
    """Check every stage on every choice of rows from ``r``; report a witness matrix."""
    rel = frozenset(tuple(t) for t in r)
    for k in c.support:
        rows = relation_violation(c.stages[k], rel)
        if rows is not None:
            return Preservation(False, k, rows)
    return Preservation(True)


def preserves(c: PolyCone, r: Iterable[Sequence[int]]) -> bool:
    return preservation_violation(c, r).holds


# --------------------------------------------------------------------------
# pH-hull

HULL_BUDGET = {2: 4, 3: 2}


def ph_hull(s: FiniteStructure, r: Iterable[Sequence[int]], max_arity: int = 3, budget: Mapping[int, int] | None = None) -> frozenset[tuple[int, ...]]:
    """Close ``r`` under surjective polymorphisms of arity ``max_arity``.

    Lower arities add nothing: a surjective k-ary polymorphism is a
    surjective ``max_arity``-ary one that ignores its extra arguments.  The
    result is a subset of the true pH-hull and grows with ``max_arity``.
    """
    limits = dict(HULL_BUDGET if budget is None else budget)
    allowed = limits.get(s.size, 1 if s.size > max(limits, default=0) else max_arity)
    if max_arity > allowed:
        raise BudgetError(f"arity {max_arity} exceeds the budget {allowed} for a universe of size {s.size}")
    if max_arity < 1:
        raise BudgetError("arity must be positive")
    current = set(tuple(t) for t in r)
    if not current:
        return frozenset()
    ops = polymorphisms(s, max_arity, surjective=True)
    frontier = set(current)
    while frontier:
        fresh = set()
        ordered = sorted(current)
        for rows in itertools.product(ordered, repeat=max_arity):
            if frontier.isdisjoint(rows):
                continue
            cols = [_index(s.size, col) for col in zip(*rows)]
            for op in ops:
                t = tuple(op.table[c] for c in cols)
                if t not in current:
                    fresh.add(t)
        current |= fresh
        frontier = fresh
    return frozenset(current)
