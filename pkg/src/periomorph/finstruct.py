"""Finite structures, brute-force first-order evaluation and bounded pH tools.

Elements of a structure of size ``n`` are ``0..n-1``.  Products number their
elements in mixed radix with the leftmost factor most significant, so the
element ``(a0, ..., a_{m-1})`` of ``A0 x ... x A_{m-1}`` is
``((a0 * n1 + a1) * n2 + a2) ...``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .formula import (
    And,
    Atom,
    Bottom,
    Eq,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Implies,
    Not,
    Or,
    Term,
    Var,
    conj,
    free_vars,
)

MAX_PRODUCT_SIZE = 4096


class StructureError(ValueError):
    pass


class FiniteStructure:
    """Finite structure with relations, function tables and constants.

    ``relations`` maps a symbol to an iterable of tuples; give ``arities`` for
    relations that may be empty.  ``functions`` maps a symbol to a dict from
    argument tuples to values (a total table).  Instances are immutable.
    """

    __slots__ = ("size", "relations", "rel_arity", "functions", "fun_arity", "constants", "name", "_key")

    def __init__(
        self,
        size: int,
        relations: Mapping[str, Iterable[Sequence[int]]] | None = None,
        functions: Mapping[str, Mapping[tuple[int, ...], int]] | None = None,
        constants: Mapping[str, int] | None = None,
        arities: Mapping[str, int] | None = None,
        name: str = "",
    ):
        if size < 1:
            raise StructureError("universe must be nonempty")
        arities = dict(arities or {})
        rels: dict[str, frozenset[tuple[int, ...]]] = {}
        rel_arity: dict[str, int] = {}
        for sym, tuples in sorted((relations or {}).items()):
            ts = frozenset(tuple(t) for t in tuples)
            lengths = {len(t) for t in ts}
            if sym in arities:
                lengths.add(arities[sym])
            if len(lengths) != 1:
                raise StructureError(f"relation {sym}: arity unknown or inconsistent")
            for t in ts:
                if any(not 0 <= a < size for a in t):
                    raise StructureError(f"relation {sym}: tuple {t} out of range")
            rels[sym] = ts
            rel_arity[sym] = lengths.pop()
        funs: dict[str, tuple[int, ...]] = {}
        fun_arity: dict[str, int] = {}
        for sym, table in sorted((functions or {}).items()):
            keys = list(table)
            k = len(keys[0]) if keys else arities.get(sym, 0)
            flat = []
            for args in itertools.product(range(size), repeat=k):
                if args not in table:
                    raise StructureError(f"function {sym}: missing value at {args}")
                value = table[args]
                if not 0 <= value < size:
                    raise StructureError(f"function {sym}: value {value} out of range")
                flat.append(value)
            if len(table) != len(flat):
                raise StructureError(f"function {sym}: table has extra entries")
            funs[sym] = tuple(flat)
            fun_arity[sym] = k
        consts = dict(sorted((constants or {}).items()))
        for sym, c in consts.items():
            if not 0 <= c < size:
                raise StructureError(f"constant {sym} out of range")
        clash = (set(rels) & set(funs)) | (set(rels) & set(consts)) | (set(funs) & set(consts))
        if clash:
            raise StructureError(f"symbols used twice: {sorted(clash)}")
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "rel_arity", rel_arity)
        object.__setattr__(self, "functions", funs)
        object.__setattr__(self, "fun_arity", fun_arity)
        object.__setattr__(self, "constants", consts)
        object.__setattr__(self, "name", name)
        key = (
            size,
            tuple((s, rel_arity[s], tuple(sorted(ts))) for s, ts in rels.items()),
            tuple((s, fun_arity[s], tbl) for s, tbl in funs.items()),
            tuple(consts.items()),
        )
        object.__setattr__(self, "_key", key)

    def __setattr__(self, name, value):
        raise AttributeError("FiniteStructure is immutable")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteStructure) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"FiniteStructure({self.name or '?'}, size={self.size}, {format_structure(self, inline=True)})"

    @property
    def universe(self) -> range:
        return range(self.size)

    def language(self) -> dict[str, tuple[str, int]]:
        out = {s: ("rel", k) for s, k in self.rel_arity.items()}
        out.update({s: ("fun", k) for s, k in self.fun_arity.items()})
        out.update({s: ("fun", 0) for s in self.constants})
        return out

    def apply(self, symbol: str, args: Sequence[int]) -> int:
        if symbol in self.constants and not args:
            return self.constants[symbol]
        table = self.functions[symbol]
        idx = 0
        for a in args:
            idx = idx * self.size + a
        return table[idx]

    def holds(self, symbol: str, args: Sequence[int]) -> bool:
        return tuple(args) in self.relations[symbol]

    def graph(self, symbol: str) -> frozenset[tuple[int, ...]]:
        """Graph of a function or constant as a relation ``(args..., value)``."""
        if symbol in self.constants:
            return frozenset({(self.constants[symbol],)})
        k = self.fun_arity[symbol]
        return frozenset(args + (self.apply(symbol, args),) for args in itertools.product(self.universe, repeat=k))

    def atomic_relations(self) -> dict[str, frozenset[tuple[int, ...]]]:
        """Relations plus graphs of functions and constants, keyed by symbol."""
        out = dict(self.relations)
        for sym in list(self.functions) + list(self.constants):
            out[sym] = self.graph(sym)
        return out


def relational(size: int, **relations: Iterable[Sequence[int]]) -> FiniteStructure:
    return FiniteStructure(size, relations)


# --------------------------------------------------------------------------
# Evaluation


def evaluate(s: FiniteStructure, f: Formula, assignment: Mapping[str, int] | None = None) -> bool:
    """Tarskian truth of ``f`` in ``s`` by exhaustive quantifier expansion."""
    env = dict(assignment or {})
    missing = set(free_vars(f)) - set(env)
    if missing:
        raise FormulaError(f"unassigned free variables {sorted(missing)}")
    return _eval(s, f, env)


def _term(s: FiniteStructure, t: Term, env: dict[str, int]) -> int:
    if isinstance(t, Var):
        return env[t.name]
    try:
        return s.apply(t.symbol, [_term(s, a, env) for a in t.args])
    except KeyError:
        raise FormulaError(f"symbol {t.symbol!r} not interpreted") from None


def _eval(s: FiniteStructure, f: Formula, env: dict[str, int]) -> bool:
    if isinstance(f, Atom):
        rel = s.relations.get(f.symbol)
        if rel is None or s.rel_arity[f.symbol] != len(f.args):
            raise FormulaError(f"relation {f.symbol}/{len(f.args)} not interpreted")
        return tuple(_term(s, a, env) for a in f.args) in rel
    if isinstance(f, Eq):
        return _term(s, f.lhs, env) == _term(s, f.rhs, env)
    if isinstance(f, And):
        return _eval(s, f.left, env) and _eval(s, f.right, env)
    if isinstance(f, (Exists, Forall)):
        saved = env.get(f.var, None)
        want = isinstance(f, Exists)
        result = not want
        for a in range(s.size):
            env[f.var] = a
            if _eval(s, f.body, env) == want:
                result = want
                break
        if saved is None:
            del env[f.var]
        else:
            env[f.var] = saved
        return result
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Or):
        return _eval(s, f.left, env) or _eval(s, f.right, env)
    if isinstance(f, Not):
        return not _eval(s, f.body, env)
    if isinstance(f, Implies):
        return not _eval(s, f.left, env) or _eval(s, f.right, env)
    raise TypeError(f"not a formula: {f!r}")


def defined_relation(s: FiniteStructure, f: Formula, variables: Sequence[str]) -> frozenset[tuple[int, ...]]:
    """``{a : s |= f(a)}`` with ``a`` assigned to ``variables`` in order."""
    return frozenset(
        t for t in itertools.product(s.universe, repeat=len(variables)) if evaluate(s, f, dict(zip(variables, t)))
    )


# --------------------------------------------------------------------------
# Products and powers


def encode(sizes: Sequence[int], components: Sequence[int]) -> int:
    idx = 0
    for n, a in zip(sizes, components):
        idx = idx * n + a
    return idx


def decode(sizes: Sequence[int], idx: int) -> tuple[int, ...]:
    out = []
    for n in reversed(sizes):
        idx, a = divmod(idx, n)
        out.append(a)
    return tuple(reversed(out))


def product(structures: Sequence[FiniteStructure], cap: int = MAX_PRODUCT_SIZE) -> FiniteStructure:
    """Direct product; relations and functions act componentwise."""
    if not structures:
        raise StructureError("empty product")
    lang = structures[0].language()
    for s in structures[1:]:
        if s.language() != lang:
            raise StructureError("factors have different languages")
    sizes = [s.size for s in structures]
    total = 1
    for n in sizes:
        total *= n
    if total > cap:
        raise StructureError(f"product size {total} exceeds cap {cap}")
    rels = {}
    for sym, k in structures[0].rel_arity.items():
        tuples = set()
        for choice in itertools.product(*(sorted(s.relations[sym]) for s in structures)):
            tuples.add(tuple(encode(sizes, [c[j] for c in choice]) for j in range(k)))
        rels[sym] = tuples
    funs = {}
    for sym, k in structures[0].fun_arity.items():
        table = {}
        for args in itertools.product(range(total), repeat=k):
            parts = [decode(sizes, a) for a in args]
            table[args] = encode(sizes, [s.apply(sym, [p[i] for p in parts]) for i, s in enumerate(structures)])
        funs[sym] = table
    consts = {sym: encode(sizes, [s.constants[sym] for s in structures]) for sym in structures[0].constants}
    name = " x ".join(s.name or "?" for s in structures)
    return FiniteStructure(total, rels, funs, consts, arities=dict(structures[0].rel_arity) | dict(structures[0].fun_arity), name=name)


def power(s: FiniteStructure, k: int, cap: int = MAX_PRODUCT_SIZE) -> FiniteStructure:
    if k < 1:
        raise StructureError("power exponent must be positive")
    return product([s] * k, cap=cap)


# --------------------------------------------------------------------------
# Morphisms


def _check_map(h: Sequence[int], s: FiniteStructure, t: FiniteStructure) -> None:
    if len(h) != s.size or any(not 0 <= b < t.size for b in h):
        raise StructureError("map is not total from s into t")


def is_homomorphism(h: Sequence[int], s: FiniteStructure, t: FiniteStructure) -> bool:
    _check_map(h, s, t)
    for sym, tuples in s.relations.items():
        target = t.relations.get(sym)
        if target is None:
            return False
        if any(tuple(h[a] for a in tup) not in target for tup in tuples):
            return False
    for sym, k in s.fun_arity.items():
        if sym not in t.functions:
            return False
        for args in itertools.product(s.universe, repeat=k):
            if h[s.apply(sym, args)] != t.apply(sym, [h[a] for a in args]):
                return False
    for sym, c in s.constants.items():
        if t.constants.get(sym) != h[c]:
            return False
    return True


def is_surjective(h: Sequence[int], s: FiniteStructure, t: FiniteStructure) -> bool:
    _check_map(h, s, t)
    return set(h) == set(t.universe)


def is_embedding(h: Sequence[int], s: FiniteStructure, t: FiniteStructure) -> bool:
    if not is_homomorphism(h, s, t) or len(set(h)) != len(h):
        return False
    for sym, k in s.rel_arity.items():
        for tup in itertools.product(s.universe, repeat=k):
            if tuple(h[a] for a in tup) in t.relations[sym] and tup not in s.relations[sym]:
                return False
    return True


def is_isomorphism(h: Sequence[int], s: FiniteStructure, t: FiniteStructure) -> bool:
    return is_embedding(h, s, t) and is_surjective(h, s, t) and s.language() == t.language()


# --------------------------------------------------------------------------
# Bounded positive Horn machinery


def enumerate_ph_formulas(
    language: Mapping[str, int],
    free: Sequence[str] = (),
    max_vars: int = 3,
    max_depth: int = 6,
    max_atoms: int = 2,
    include_bottom: bool = True,
) -> Iterator[Formula]:
    """Deterministic stream of prenex pH formulas with free variables ``free``.

    Bound variables are ``v0, v1, ...`` (at most ``max_vars - len(free)``),
    each of which must occur in the matrix.  The matrix is a conjunction of
    ``1..max_atoms`` distinct atoms over relation symbols and equality; the
    size (atoms plus quantifiers) is at most ``max_depth``.  ``false`` is
    emitted first when ``include_bottom`` is set.  Prenex form loses nothing:
    pH formulas prenex without changing their size.
    """
    free = list(free)
    if include_bottom:
        yield Bottom()
    for b in range(0, max(0, max_vars - len(free)) + 1):
        bound = [f"v{i}" for i in range(b)]
        names = free + bound
        atoms: list[Formula] = []
        for sym, k in sorted(language.items()):
            for args in itertools.product(names, repeat=k):
                atoms.append(Atom(sym, tuple(Var(a) for a in args)))
        for i, j in itertools.combinations(range(len(names)), 2):
            atoms.append(Eq(Var(names[i]), Var(names[j])))
        for a in range(1, max_atoms + 1):
            if a + b > max_depth:
                break
            for combo in itertools.combinations(atoms, a):
                matrix = conj(combo)
                used = set(free_vars(matrix))
                if any(v not in used for v in bound):
                    continue
                for kinds in itertools.product((Forall, Exists), repeat=b):
                    out = matrix
                    for kind, v in zip(reversed(kinds), reversed(bound)):
                        out = kind(v, out)
                    yield out


def enumerate_ph_sentences(
    language: Mapping[str, int], max_vars: int = 3, max_depth: int = 6, max_atoms: int = 2
) -> Iterator[Formula]:
    return enumerate_ph_formulas(language, (), max_vars, max_depth, max_atoms)


@dataclass(frozen=True)
class BoundedEntailment:
    """Outcome of a bounded ``pH`` entailment check.

    Sound for refutation, incomplete for affirmation: a counterexample proves
    non-entailment, while ``holds`` only covers the enumerated sentences.
    """

    holds: bool
    counterexample: Formula | None
    checked: int
    bounds: tuple[int, int, int]

    def __bool__(self) -> bool:
        return self.holds


def ph_entails(
    s: FiniteStructure, t: FiniteStructure, max_vars: int = 3, max_depth: int = 6, max_atoms: int = 2
) -> BoundedEntailment:
    """Every enumerated pH sentence true in ``s`` is true in ``t``."""
    if set(s.rel_arity.items()) != set(t.rel_arity.items()):
        raise StructureError("structures have different relational languages")
    checked = 0
    for phi in enumerate_ph_sentences(s.rel_arity, max_vars, max_depth, max_atoms):
        checked += 1
        if evaluate(s, phi) and not evaluate(t, phi):
            return BoundedEntailment(False, phi, checked, (max_vars, max_depth, max_atoms))
    return BoundedEntailment(True, None, checked, (max_vars, max_depth, max_atoms))


def ph_definable_relations(
    s: FiniteStructure, arity: int, max_size: int = 7
) -> dict[frozenset[tuple[int, ...]], int]:
    """Relations defined by pH formulas of size <= ``max_size``, with minimal size.

    Size counts atoms and quantifiers.  Every pH formula is equivalent to a
    prenex one of the same size, so it suffices to build conjunctions of atoms
    over ``arity + b`` variables and quantify the extra ``b`` away.  Formulas
    are bitmasks over assignments (variable ``j`` is the base-``n`` digit of
    weight ``n**j``): conjunction is ``&``, and quantifying the top variable
    folds the ``n`` slices with ``|`` (exists) or ``&`` (forall).  Only
    relational structures are supported.
    """
    if s.functions or s.constants:
        raise StructureError("relational structures only")
    n = s.size
    # each quantified variable must occur in an atom, else it can be dropped
    r = max([2, *s.rel_arity.values()])
    width = arity + (max_size * r) // (r + 1)

    def atom_masks(v: int) -> list[int]:
        assigns = [a[::-1] for a in itertools.product(range(n), repeat=v)]

        def mask(pred) -> int:
            return sum(1 << idx for idx, a in enumerate(assigns) if pred(a))

        masks = {0}
        if v:
            masks.add((1 << len(assigns)) - 1)
        for sym, k in s.rel_arity.items():
            rel = s.relations[sym]
            for pos in itertools.product(range(v), repeat=k):
                masks.add(mask(lambda a, pos=pos, rel=rel: tuple(a[p] for p in pos) in rel))
        for i, j in itertools.combinations(range(v), 2):
            masks.add(mask(lambda a, i=i, j=j: a[i] == a[j]))
        return sorted(masks)

    # costs stored at level v count atoms plus quantifiers applied so far
    carried: dict[int, int] = {}
    for v in range(width, arity - 1, -1):
        found = carried
        budget = max_size - (v - arity)
        if budget >= 1:
            atoms = atom_masks(v)
            cost = {m: 1 for m in atoms}
            frontier = list(cost)
            for c in range(2, budget + 1):
                nxt = []
                for m in frontier:
                    for a in atoms:
                        x = m & a
                        if x not in cost:
                            cost[x] = c
                            nxt.append(x)
                frontier = nxt
            for m, c in cost.items():
                if c < found.get(m, max_size + 1):
                    found[m] = c
        if v == arity:
            break
        chunk = n ** (v - 1)
        low = (1 << chunk) - 1
        carried = {}
        for m, c in found.items():
            if c + 1 > max_size:
                continue
            ex, fa = 0, low
            for i in range(n):
                part = (m >> (i * chunk)) & low
                ex |= part
                fa &= part
            for x in (ex, fa):
                if c + 1 < carried.get(x, max_size + 1):
                    carried[x] = c + 1
    assigns = [a[::-1] for a in itertools.product(range(n), repeat=arity)]
    out: dict[frozenset[tuple[int, ...]], int] = {}
    for m, c in found.items():
        rel = frozenset(a for idx, a in enumerate(assigns) if m >> idx & 1)
        if c < out.get(rel, max_size + 1):
            out[rel] = c
    return out


# --------------------------------------------------------------------------
# Structure files
#
#   structure NAME { universe 3; rel R = {(0,1),(1,2)}; fun f = [1,2,0]; const c = 0; }

_S_HEADER = re.compile(r"^\s*structure\s+([A-Za-z_][A-Za-z0-9_]*)\s*\{(.*)\}\s*$", re.S)
_S_UNIV = re.compile(r"^universe\s+(\d+)$")
_S_REL = re.compile(r"^rel\s+([A-Za-z_][A-Za-z0-9_]*)\s*(?:/\s*(\d+))?\s*=\s*\{(.*)\}$", re.S)
_S_FUN = re.compile(r"^fun\s+([A-Za-z_][A-Za-z0-9_]*)\s*(?:/\s*(\d+))?\s*=\s*\[(.*)\]$", re.S)
_S_CONST = re.compile(r"^const\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\d+)$")


def parse_tuples(text: str) -> list[tuple[int, ...]]:
    """Parse ``(0,1),(1,2)`` (braces optional) into tuples."""
    text = text.strip()
    if text.startswith("{") and text.endswith("}"):
        text = text[1:-1]
    out = []
    for m in re.finditer(r"\(([^()]*)\)", text):
        inner = m.group(1).strip()
        out.append(tuple(int(x) for x in inner.split(",")) if inner else ())
    rest = re.sub(r"\(([^()]*)\)", "", text).replace(",", "").strip()
    if rest:
        raise StructureError(f"bad tuple list: {text!r}")
    return out


def parse_structure(text: str) -> FiniteStructure:
    body_text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    m = _S_HEADER.match(body_text)
    if not m:
        raise StructureError("expected 'structure NAME { ... }'")
    name, body = m.group(1), m.group(2)
    size = None
    rels, funs, consts, arities = {}, {}, {}, {}
    raw_funs = {}
    for stmt in body.split(";"):
        stmt = " ".join(stmt.split())
        if not stmt:
            continue
        if mu := _S_UNIV.match(stmt):
            size = int(mu.group(1))
        elif mr := _S_REL.match(stmt):
            rels[mr.group(1)] = parse_tuples(mr.group(3))
            if mr.group(2):
                arities[mr.group(1)] = int(mr.group(2))
        elif mf := _S_FUN.match(stmt):
            values = [int(x) for x in mf.group(3).split(",") if x.strip()]
            raw_funs[mf.group(1)] = (int(mf.group(2)) if mf.group(2) else None, values)
        elif mc := _S_CONST.match(stmt):
            consts[mc.group(1)] = int(mc.group(2))
        else:
            raise StructureError(f"bad statement: {stmt!r}")
    if size is None:
        raise StructureError("missing 'universe N'")
    for sym, (k, values) in raw_funs.items():
        if k is None:
            k = next((k for k in range(1, 9) if size**k == len(values)), None)
            if k is None:
                raise StructureError(f"function {sym}: table length {len(values)} is not a power of {size}")
        if len(values) != size**k:
            raise StructureError(f"function {sym}: expected {size**k} values")
        funs[sym] = dict(zip(itertools.product(range(size), repeat=k), values))
        arities[sym] = k
    return FiniteStructure(size, rels, funs, consts, arities=arities, name=name)


def load_structure(path: str) -> FiniteStructure:
    with open(path, encoding="utf-8") as fh:
        return parse_structure(fh.read())


def format_structure(s: FiniteStructure, inline: bool = False) -> str:
    stmts = [f"universe {s.size}"]
    for sym, ts in s.relations.items():
        body = ",".join("(" + ",".join(map(str, t)) + ")" for t in sorted(ts))
        stmts.append(f"rel {sym}/{s.rel_arity[sym]} = {{{body}}}")
    for sym, tbl in s.functions.items():
        stmts.append(f"fun {sym}/{s.fun_arity[sym]} = [{','.join(map(str, tbl))}]")
    for sym, c in s.constants.items():
        stmts.append(f"const {sym} = {c}")
    if inline:
        return "; ".join(stmts)
    inner = "".join(f"  {x};\n" for x in stmts)
    return f"structure {s.name or 'S'} {{\n{inner}}}\n"
