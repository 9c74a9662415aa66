"""Template-level analyses: constant polymorphisms and a pp-definition of ``!=``."""
from __future__ import annotations

from .eqrel import EqTemplate, PreconditionError
from .formula import Atom, Exists, Formula, Var, conj, eq, quantify
from .partition import Partition, coarsens, top


def has_constant_polymorphism(t: EqTemplate) -> bool:
    """A constant map preserves ``t`` iff every nonempty relation contains a constant tuple."""
    return all(r.is_empty() or top(r.arity) in r.patterns for r in t.relations.values())


def _coarsest_member(patterns: frozenset[Partition]) -> Partition:
    maximal = [p for p in patterns if not any(q != p and coarsens(q, p) for q in patterns)]
    return min(maximal)


def define_disequality(t: EqTemplate) -> Formula:
    """Primitive positive formula over ``t`` defining ``x0 != x1``.

    Take the first relation (by name) that is nonempty and misses the
    all-equal pattern, pin its arguments to a coarsest realized pattern,
    keep the lexicographically least pair of positions in different blocks
    free as ``x0, x1`` and existentially close the rest (named ``z<i>``).
    """
    for sym, rel in t.relations.items():
        if rel.is_empty() or top(rel.arity) in rel.patterns:
            continue
        tau = _coarsest_member(rel.patterns)
        i = 0
        j = next(k for k in range(rel.arity) if not tau.together(i, k))
        names = {i: "x0", j: "x1"}
        xs = [names.get(k, f"z{k}") for k in range(rel.arity)]
        parts: list[Formula] = [Atom(sym, tuple(Var(x) for x in xs))]
        parts += [eq(xs[a], xs[b]) for a, b in tau.spanning_pairs()]
        hidden = [x for k, x in enumerate(xs) if k not in names]
        return quantify(Exists, hidden, conj(parts))
    raise PreconditionError("template has a constant polymorphism", witness=None)
