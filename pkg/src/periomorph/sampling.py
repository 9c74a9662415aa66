"""Seeded random generators for pH sentences and small structures."""
from __future__ import annotations

import random
from typing import Mapping

from .formula import And, Atom, Bottom, Eq, Exists, Forall, Formula, Var


def random_ph_sentence(
    rng: random.Random,
    language: Mapping[str, int],
    max_vars: int = 4,
    max_atoms: int = 3,
    bottom_rate: float = 0.03,
) -> Formula:
    """A random positive Horn sentence with at most ``max_vars`` distinct bound variables.

    Quantifiers and conjunctions are interleaved freely, so the result is
    usually not prenex.  Each bound variable is used at most once as a binder.
    """
    names = [f"v{i}" for i in range(rng.randint(1, max_vars))]
    symbols = sorted(language.items())
    next_var = 0

    def atom(scope: list[str]) -> Formula:
        if rng.random() < bottom_rate:
            return Bottom()
        options = len(symbols) + 1
        pick = rng.randrange(options)
        if pick == len(symbols):
            return Eq(Var(rng.choice(scope)), Var(rng.choice(scope)))
        sym, k = symbols[pick]
        return Atom(sym, tuple(Var(rng.choice(scope)) for _ in range(k)))

    def build(scope: list[str], atoms: int) -> Formula:
        nonlocal next_var
        if next_var < len(names) and (not scope or rng.random() < 0.55):
            v = names[next_var]
            next_var += 1
            kind = Exists if rng.random() < 0.5 else Forall
            return kind(v, build(scope + [v], atoms))
        if atoms > 1 and rng.random() < 0.45:
            left = rng.randint(1, atoms - 1)
            return And(build(scope, left), build(scope, atoms - left))
        return atom(scope)

    return build([], rng.randint(1, max_atoms))


def random_relation(rng: random.Random, size: int, arity: int, density: float = 0.5) -> frozenset[tuple[int, ...]]:
    from itertools import product

    return frozenset(t for t in product(range(size), repeat=arity) if rng.random() < density)
