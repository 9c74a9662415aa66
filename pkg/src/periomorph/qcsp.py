"""Exact evaluation of positive Horn sentences on equality templates.

The sentence is prenexed and played as a game on the equality pattern of the
variables chosen so far.  A new variable either joins one of the existing
classes or opens a fresh one; since template relations only see patterns,
these finitely many moves stand for every value of the infinite domain.
"""
from __future__ import annotations

from typing import Callable

from .eqrel import EqTemplate
from .finstruct import FiniteStructure, evaluate
from .formula import (
    Atom,
    Bottom,
    Eq,
    Exists,
    Formula,
    FormulaError,
    Var,
    conjuncts,
    free_vars,
    is_positive_horn,
    prenex,
    split_prefix,
    symbols,
)
from .partition import Partition, extensions, induced_pattern

MAX_BRUTEFORCE_TUPLES = 200_000


def _check(t: EqTemplate, f: Formula) -> None:
    if free_vars(f):
        raise FormulaError(f"not a sentence: free variables {list(free_vars(f))}")
    if not is_positive_horn(f):
        raise FormulaError("not a positive Horn sentence")
    lang = t.language()
    for sym, (kind, k) in symbols(f).items():
        if kind != "rel":
            raise FormulaError(f"function symbol {sym!r} not allowed over an equality template")
        if sym not in lang:
            raise FormulaError(f"unknown relation symbol {sym!r}")
        if lang[sym] != k:
            raise FormulaError(f"{sym} has arity {lang[sym]}, used with {k}")


def _index_of(term, position: dict[str, int]) -> int:
    if not isinstance(term, Var):
        raise FormulaError("function terms are not allowed over an equality template")
    return position[term.name]


def solve(t: EqTemplate, f: Formula, trace: list[str] | None = None) -> bool:
    """Truth of the pH sentence ``f`` in the template ``t``.

    When ``trace`` is a list, one line per evaluated game state is appended:
    depth, quantifier, variable, pattern and outcome.
    """
    _check(t, f)
    prefix, matrix = split_prefix(prenex(f))
    names = [q.var for q in prefix]
    position = {v: i for i, v in enumerate(names)}
    tests: list[Callable[[Partition], bool]] = []
    for a in conjuncts(matrix):
        if isinstance(a, Bottom):
            tests.append(lambda p: False)
        elif isinstance(a, Eq):
            i, j = _index_of(a.lhs, position), _index_of(a.rhs, position)
            tests.append(lambda p, i=i, j=j: p.rgs[i] == p.rgs[j])
        elif isinstance(a, Atom):
            idx = [_index_of(x, position) for x in a.args]
            pats = t[a.symbol].patterns
            tests.append(lambda p, idx=idx, pats=pats: induced_pattern(p, idx) in pats)
        else:
            raise FormulaError(f"unexpected matrix component {a}")
    exists = [isinstance(q, Exists) for q in prefix]
    memo: dict[Partition, bool] = {}

    def win(p: Partition) -> bool:
        got = memo.get(p)
        if got is not None:
            return got
        depth = p.size
        if depth == len(prefix):
            result = all(test(p) for test in tests)
        elif exists[depth]:
            result = any(win(q) for q in extensions(p))
        else:
            result = all(win(q) for q in extensions(p))
        memo[p] = result
        if trace is not None:
            if depth == len(prefix):
                trace.append(f"{'  ' * depth}matrix [{p}] -> {str(result).lower()}")
            else:
                kind = "exists" if exists[depth] else "forall"
                trace.append(f"{'  ' * depth}{kind} {names[depth]} at [{p}] -> {str(result).lower()}")
        return result

    return win(Partition(()))


def materialize(t: EqTemplate, n: int) -> FiniteStructure:
    """The template restricted to an ``n``-element domain."""
    if n < 1:
        raise ValueError("domain size must be positive")
    rels = {}
    total = 0
    for sym, rel in t.relations.items():
        total += n**rel.arity
        if total > MAX_BRUTEFORCE_TUPLES:
            raise ValueError(f"materializing {t.name} at size {n} exceeds {MAX_BRUTEFORCE_TUPLES} tuples")
        rels[sym] = rel.materialize(n)
    return FiniteStructure(n, rels, arities=t.language(), name=t.name)


def solve_bruteforce(t: EqTemplate, f: Formula, n: int) -> bool:
    """Truth of ``f`` in the template cut down to ``n`` elements.

    Agrees with :func:`solve` once ``n`` is at least the number of variables;
    smaller domains can make universal statements spuriously true.
    """
    _check(t, f)
    return evaluate(materialize(t, n), f)


def variable_count(f: Formula) -> int:
    """Number of quantified variables after prenexing (the game depth)."""
    prefix, _ = split_prefix(prenex(f))
    return len(prefix)

