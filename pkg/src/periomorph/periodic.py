"""Periodic powers of finite structures, handled one canonical element at a time.

A periodic element is a word ``w`` over the universe read as the sequence
``i -> w[i mod len(w)]``.  Words are kept at their minimal period, so two
elements are equal iff their words are.  Atoms and pH formulas are evaluated
pointwise over one common period (the lcm of the argument periods); the
infinite carrier is never built.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import lcm
from typing import Iterator, Sequence

from .finstruct import FiniteStructure, decode, encode, evaluate, power, product
from .formula import Formula, FormulaError, free_vars, is_positive_horn


class PeriodError(ValueError):
    pass


def _minimal_period(word: Sequence[int]) -> int:
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and all(word[i] == word[i % p] for i in range(p, n)):
            return p
    return n


@dataclass(frozen=True, order=True)
class PeriodicElement:
    word: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.word:
            raise PeriodError("periodic element needs a nonempty word")
        if _minimal_period(self.word) != len(self.word):
            raise PeriodError(f"word {self.word} is not at its minimal period; use canonicalize")

    @property
    def period(self) -> int:
        return len(self.word)

    def __getitem__(self, i: int) -> int:
        return self.word[i % len(self.word)]

    def prefix(self, n: int) -> tuple[int, ...]:
        return tuple(self[i] for i in range(n))

    def __str__(self) -> str:
        return "<" + " ".join(map(str, self.word)) + ">"

    @classmethod
    def parse(cls, text: str) -> PeriodicElement:
        text = text.strip()
        if not (text.startswith("<") and text.endswith(">")):
            raise PeriodError(f"expected <a0 a1 ...>, got {text!r}")
        try:
            return canonicalize([int(x) for x in text[1:-1].replace(",", " ").split()])
        except ValueError as exc:
            raise PeriodError(f"bad periodic element {text!r}") from exc


def canonicalize(word: Sequence[int]) -> PeriodicElement:
    """Shortest word whose repetition is ``word``."""
    word = tuple(word)
    if not word:
        raise PeriodError("empty word")
    return PeriodicElement(word[: _minimal_period(word)])


def horizon(args: Sequence[PeriodicElement]) -> int:
    return lcm(*(a.period for a in args)) if args else 1


def _check_range(s: FiniteStructure, args: Sequence[PeriodicElement]) -> None:
    for a in args:
        if any(not 0 <= x < s.size for x in a.word):
            raise PeriodError(f"{a} is not over a universe of size {s.size}")


def apply_function(s: FiniteStructure, symbol: str, args: Sequence[PeriodicElement]) -> PeriodicElement:
    """Pointwise application of a function or constant symbol."""
    if symbol not in s.functions and symbol not in s.constants:
        raise PeriodError(f"unknown function symbol {symbol!r}")
    _check_range(s, args)
    h = horizon(args)
    return canonicalize([s.apply(symbol, [a[i] for a in args]) for i in range(h)])


def holds_relation(s: FiniteStructure, symbol: str, args: Sequence[PeriodicElement]) -> bool:
    """Pointwise truth of an atom; ``"="`` denotes equality."""
    _check_range(s, args)
    if symbol == "=":
        if len(args) != 2:
            raise PeriodError("equality takes two arguments")
        return args[0] == args[1]
    if symbol not in s.relations:
        raise PeriodError(f"unknown relation symbol {symbol!r}")
    if s.rel_arity[symbol] != len(args):
        raise PeriodError(f"relation {symbol} has arity {s.rel_arity[symbol]}")
    rel = s.relations[symbol]
    return all(tuple(a[i] for a in args) in rel for i in range(horizon(args)))


def embed_ek(values: Sequence[int]) -> PeriodicElement:
    """``e_k``: a k-tuple as the k-periodic sequence it spells out."""
    return canonicalize(values)


def project_pk(p: PeriodicElement, k: int) -> tuple[int, ...]:
    """``pi_<k``: the first ``k`` values of the sequence."""
    if k < 1:
        raise PeriodError("k must be positive")
    return p.prefix(k)


def embed_enm(values: Sequence[int], m: int) -> tuple[int, ...]:
    """``e_(n,m)``: repeat an n-tuple ``m / n`` times."""
    n = len(values)
    if not (0 < n < m and m % n == 0):
        raise PeriodError(f"e_(n,m) needs n < m and n | m, got n={n}, m={m}")
    return tuple(values) * (m // n)


def eval_ph_on_per(
    s: FiniteStructure,
    f: Formula,
    args: Sequence[PeriodicElement] = (),
    variables: Sequence[str] | None = None,
    horizon_length: int | None = None,
) -> bool:
    """Truth of a pH formula in the periodic power at ``args``.

    A pH formula holds of periodic arguments iff it holds in ``s`` at every
    coordinate, and by periodicity one common period of the arguments covers
    every coordinate.  ``horizon_length`` overrides the number of coordinates
    checked (it should be a multiple of the lcm to be meaningful).
    """
    if not is_positive_horn(f):
        raise FormulaError("only positive Horn formulas can be evaluated on the periodic power")
    names = list(free_vars(f)) if variables is None else list(variables)
    if len(names) != len(args):
        raise PeriodError(f"expected {len(names)} arguments, got {len(args)}")
    _check_range(s, args)
    h = horizon(args) if horizon_length is None else horizon_length
    if h < 1:
        raise PeriodError("horizon must be positive")
    return all(evaluate(s, f, {v: a[i] for v, a in zip(names, args)}) for i in range(h))


@lru_cache(maxsize=None)
def _elements(n: int, max_period: int) -> tuple[PeriodicElement, ...]:
    out = []
    for p in range(1, max_period + 1):
        for word in itertools.product(range(n), repeat=p):
            if _minimal_period(word) == p:
                out.append(PeriodicElement(word))
    return tuple(out)


def elements(n: int, max_period: int) -> tuple[PeriodicElement, ...]:
    """All elements of period ``<= max_period`` over an ``n``-element universe."""
    return _elements(n, max_period)


# --------------------------------------------------------------------------
# Isomorphisms between periodic powers


@lru_cache(maxsize=1 << 16)
def _fold(n: int, k: int, p: PeriodicElement) -> PeriodicElement:
    sizes = (n,) * k
    return canonicalize([encode(sizes, [p[i * k + j] for j in range(k)]) for i in range(p.period)])


@lru_cache(maxsize=1 << 16)
def _unfold(n: int, k: int, q: PeriodicElement) -> PeriodicElement:
    sizes = (n,) * k
    return canonicalize([x for i in range(q.period) for x in decode(sizes, q[i])])


@lru_cache(maxsize=1 << 17)
def _pair(n: int, m: int, a: PeriodicElement, b: PeriodicElement) -> PeriodicElement:
    return canonicalize([a[i] * m + b[i] for i in range(lcm(a.period, b.period))])


@lru_cache(maxsize=1 << 16)
def _split(n: int, m: int, q: PeriodicElement) -> tuple[PeriodicElement, PeriodicElement]:
    return canonicalize([x // m for x in q.word]), canonicalize([x % m for x in q.word])


@dataclass(frozen=True)
class PowerIso:
    """``A^per -> (A^k)^per``, reading consecutive blocks of length ``k``."""

    source: FiniteStructure
    k: int
    target: FiniteStructure

    def forward(self, p: PeriodicElement) -> PeriodicElement:
        return _fold(self.source.size, self.k, p)

    def backward(self, q: PeriodicElement) -> PeriodicElement:
        return _unfold(self.source.size, self.k, q)

    def atom_mismatch(self, symbol: str, args: Sequence[PeriodicElement]) -> bool:
        """True iff the atom's truth differs on the two sides."""
        image = [self.forward(a) for a in args]
        return holds_relation(self.source, symbol, args) != holds_relation(self.target, symbol, image)

    def function_mismatch(self, symbol: str, args: Sequence[PeriodicElement]) -> bool:
        image = [self.forward(a) for a in args]
        return self.forward(apply_function(self.source, symbol, args)) != apply_function(self.target, symbol, image)


@dataclass(frozen=True)
class ProductIso:
    """``A^per x B^per -> (A x B)^per``, pairing coordinates."""

    left: FiniteStructure
    right: FiniteStructure
    target: FiniteStructure

    def forward(self, pair: tuple[PeriodicElement, PeriodicElement]) -> PeriodicElement:
        return _pair(self.left.size, self.right.size, pair[0], pair[1])

    def backward(self, q: PeriodicElement) -> tuple[PeriodicElement, PeriodicElement]:
        return _split(self.left.size, self.right.size, q)

    def atom_mismatch(self, symbol: str, args: Sequence[tuple[PeriodicElement, PeriodicElement]]) -> bool:
        lefts = [a for a, _ in args]
        rights = [b for _, b in args]
        here = holds_relation(self.left, symbol, lefts) and holds_relation(self.right, symbol, rights)
        return here != holds_relation(self.target, symbol, [self.forward(a) for a in args])

    def function_mismatch(self, symbol: str, args: Sequence[tuple[PeriodicElement, PeriodicElement]]) -> bool:
        lefts = [a for a, _ in args]
        rights = [b for _, b in args]
        here = (apply_function(self.left, symbol, lefts), apply_function(self.right, symbol, rights))
        return self.forward(here) != apply_function(self.target, symbol, [self.forward(a) for a in args])


def iso_per_power(s: FiniteStructure, k: int) -> PowerIso:
    if k < 1:
        raise PeriodError("k must be positive")
    return PowerIso(s, k, power(s, k))


def iso_prod_per(s: FiniteStructure, t: FiniteStructure) -> ProductIso:
    return ProductIso(s, t, product([s, t]))


def atoms_of(s: FiniteStructure) -> Iterator[tuple[str, int]]:
    """Atomic symbols with arities, equality included."""
    yield "=", 2
    yield from s.rel_arity.items()
