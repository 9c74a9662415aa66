"""First-order formulas with equality, function symbols and a falsity constant.

Concrete syntax::

    R(x, y)    x = y    x != y    false
    !phi    phi & psi    phi | psi    phi -> psi
    forall x. phi    exists x y. phi
    f(x) = y    c() = x          # constants are 0-ary function symbols
    # line comment

``&`` binds tighter than ``|`` which binds tighter than ``->`` (right
associative); a quantifier body extends as far right as possible.

Names ending in ``#<digits>`` are reserved for variables produced by the
renaming helpers below and are rejected by :func:`parse` unless
``allow_reserved=True``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


# --------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple["Term", ...] = ()

    def __str__(self) -> str:
        return f"{self.symbol}({', '.join(map(str, self.args))})"


Term = Union[Var, App]


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from term_vars(a)


def _subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    return App(t.symbol, tuple(_subst_term(a, mapping) for a in t.args))


# --------------------------------------------------------------------------
# Formulas


class Formula:
    """Base class; concrete nodes are frozen dataclasses."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)

    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)


@dataclass(frozen=True, repr=False)
class Bottom(Formula):
    def __repr__(self) -> str:
        return "Bottom()"


@dataclass(frozen=True)
class Eq(Formula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Atom(Formula):
    symbol: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


Quantifier = (Exists, Forall)
Binary = (And, Or, Implies)
AtomicFormula = (Bottom, Eq, Atom)


def var(name: str) -> Var:
    return Var(name)


def eq(a: str | Term, b: str | Term) -> Eq:
    return Eq(_as_term(a), _as_term(b))


def neq(a: str | Term, b: str | Term) -> Not:
    return Not(eq(a, b))


def atom(symbol: str, *args: str | Term) -> Atom:
    return Atom(symbol, tuple(_as_term(a) for a in args))


def _as_term(t: str | Term) -> Term:
    return Var(t) if isinstance(t, str) else t


def conj(parts: Iterable[Formula]) -> Formula:
    """Left-associated conjunction; raises on an empty iterable."""
    it = iter(parts)
    try:
        out = next(it)
    except StopIteration:
        raise FormulaError("empty conjunction") from None
    for p in it:
        out = And(out, p)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    it = iter(parts)
    try:
        out = next(it)
    except StopIteration:
        raise FormulaError("empty disjunction") from None
    for p in it:
        out = Or(out, p)
    return out


def quantify(kind: type, names: Sequence[str], body: Formula) -> Formula:
    """Wrap ``body`` in quantifiers of one kind, first name outermost."""
    for name in reversed(names):
        body = kind(name, body)
    return body


def conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


# --------------------------------------------------------------------------
# Inspection


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.body)
    elif isinstance(f, Binary):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, Quantifier):
        yield from subformulas(f.body)


def atom_terms(f: Formula) -> tuple[Term, ...]:
    if isinstance(f, Eq):
        return (f.lhs, f.rhs)
    if isinstance(f, Atom):
        return f.args
    return ()


def free_vars(f: Formula) -> tuple[str, ...]:
    """Free variables in order of first occurrence."""
    out: dict[str, None] = {}

    def walk(g: Formula, bound: frozenset[str]) -> None:
        if isinstance(g, AtomicFormula):
            for t in atom_terms(g):
                for v in term_vars(t):
                    if v not in bound:
                        out.setdefault(v)
        elif isinstance(g, Not):
            walk(g.body, bound)
        elif isinstance(g, Binary):
            walk(g.left, bound)
            walk(g.right, bound)
        else:
            walk(g.body, bound | {g.var})

    walk(f, frozenset())
    return tuple(out)


def all_vars(f: Formula) -> set[str]:
    names: set[str] = set()
    for g in subformulas(f):
        if isinstance(g, Quantifier):
            names.add(g.var)
        for t in atom_terms(g):
            names.update(term_vars(t))
    return names


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def symbols(f: Formula) -> dict[str, tuple[str, int]]:
    """Map each non-logical symbol to ``("rel" | "fun", arity)``."""
    out: dict[str, tuple[str, int]] = {}

    def note(name: str, kind: str, arity: int) -> None:
        prev = out.setdefault(name, (kind, arity))
        if prev != (kind, arity):
            raise FormulaError(f"symbol {name!r} used as {prev} and {(kind, arity)}")

    def walk_term(t: Term) -> None:
        if isinstance(t, App):
            note(t.symbol, "fun", len(t.args))
            for a in t.args:
                walk_term(a)

    for g in subformulas(f):
        if isinstance(g, Atom):
            note(g.symbol, "rel", len(g.args))
        for t in atom_terms(g):
            walk_term(t)
    return out


def quantifier_count(f: Formula) -> int:
    return sum(isinstance(g, Quantifier) for g in subformulas(f))


def size(f: Formula) -> int:
    """Number of atoms plus number of quantifiers."""
    return sum(isinstance(g, AtomicFormula + Quantifier) for g in subformulas(f))


@dataclass(frozen=True)
class FragmentTag:
    is_positive_horn: bool
    is_primitive_positive: bool
    is_positive: bool
    is_quantifier_free: bool
    is_forall_exists: bool


def classify_fragment(f: Formula) -> FragmentTag:
    nodes = list(subformulas(f))
    kinds = {type(g) for g in nodes}
    atomic = set(AtomicFormula)
    ph = kinds <= atomic | {And, Exists, Forall}
    qf = not kinds & {Exists, Forall}
    prefix, matrix = split_prefix(f)
    seen_exists = False
    ae = not any(isinstance(g, Quantifier) for g in subformulas(matrix))
    for q in prefix:
        if isinstance(q, Exists):
            seen_exists = True
        elif seen_exists:
            ae = False
    return FragmentTag(
        is_positive_horn=ph,
        is_primitive_positive=ph and Forall not in kinds,
        is_positive=kinds <= atomic | {And, Or},
        is_quantifier_free=qf,
        is_forall_exists=ae,
    )


def is_positive_horn(f: Formula) -> bool:
    return classify_fragment(f).is_positive_horn


def split_prefix(f: Formula) -> tuple[list[Formula], Formula]:
    """Outer quantifier nodes (outermost first) and the remaining body."""
    prefix: list[Formula] = []
    while isinstance(f, Quantifier):
        prefix.append(f)
        f = f.body
    return prefix, f


# --------------------------------------------------------------------------
# Renaming and substitution

_RESERVED = re.compile(r"#\d+$")


def _base(name: str) -> str:
    return _RESERVED.sub("", name)


class _Fresh:
    def __init__(self, used: Iterable[str]):
        self.used = set(used)

    def __call__(self, name: str) -> str:
        base = _base(name)
        n = 1
        while f"{base}#{n}" in self.used:
            n += 1
        out = f"{base}#{n}"
        self.used.add(out)
        return out


def _map_atom(f: Formula, fn: Callable[[Term], Term]) -> Formula:
    if isinstance(f, Eq):
        return Eq(fn(f.lhs), fn(f.rhs))
    if isinstance(f, Atom):
        return Atom(f.symbol, tuple(fn(a) for a in f.args))
    return f


def rename_apart(f: Formula) -> Formula:
    """Rename bound variables so that each is bound once and none is also free.

    Variables that already satisfy this keep their names, so a formula with no
    clashes is returned unchanged.
    """
    fresh = _Fresh(all_vars(f))
    free = set(free_vars(f))
    seen: set[str] = set()

    def walk(g: Formula, env: Mapping[str, str]) -> Formula:
        if isinstance(g, AtomicFormula):
            return _map_atom(g, lambda t: _subst_term(t, {k: Var(v) for k, v in env.items()}))
        if isinstance(g, Not):
            return Not(walk(g.body, env))
        if isinstance(g, Binary):
            return type(g)(walk(g.left, env), walk(g.right, env))
        name = g.var
        if name in free or name in seen:
            name = fresh(name)
        seen.add(name)
        return type(g)(name, walk(g.body, {**env, g.var: name}))

    return walk(f, {})


def alpha_normalize(f: Formula) -> Formula:
    """Rename bound variables to ``v#0, v#1, ...`` in binding order."""
    counter = iter(range(10**9))

    def walk(g: Formula, env: Mapping[str, str]) -> Formula:
        if isinstance(g, AtomicFormula):
            return _map_atom(g, lambda t: _subst_term(t, {k: Var(v) for k, v in env.items()}))
        if isinstance(g, Not):
            return Not(walk(g.body, env))
        if isinstance(g, Binary):
            return type(g)(walk(g.left, env), walk(g.right, env))
        name = f"v#{next(counter)}"
        return type(g)(name, walk(g.body, {**env, g.var: name}))

    return walk(f, {})


def substitute(f: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Capture-avoiding substitution of terms for free variables."""
    incoming: set[str] = set()
    for t in mapping.values():
        incoming.update(term_vars(t))
    fresh = _Fresh(all_vars(f) | incoming | set(mapping))

    def walk(g: Formula, env: Mapping[str, Term]) -> Formula:
        if isinstance(g, AtomicFormula):
            return _map_atom(g, lambda t: _subst_term(t, env))
        if isinstance(g, Not):
            return Not(walk(g.body, env))
        if isinstance(g, Binary):
            return type(g)(walk(g.left, env), walk(g.right, env))
        inner = {k: v for k, v in env.items() if k != g.var}
        name = g.var
        if name in incoming:
            name = fresh(name)
            inner[g.var] = Var(name)
        return type(g)(name, walk(g.body, inner))

    return walk(f, dict(mapping))


def rename_free(f: Formula, mapping: Mapping[str, str]) -> Formula:
    return substitute(f, {k: Var(v) for k, v in mapping.items()})


# --------------------------------------------------------------------------
# Prenex form


def prenex(f: Formula) -> Formula:
    """Equivalent prenex formula; negation and implication are rejected.

    Bound variables are first renamed apart, after which quantifiers can be
    pulled through ``&`` and ``|`` in left-to-right order without capture.
    """
    for g in subformulas(f):
        if isinstance(g, (Not, Implies)):
            raise FormulaError("prenex: negation and implication are not supported")
    prefix, matrix = _pull(rename_apart(f))
    for q, name in reversed(prefix):
        matrix = q(name, matrix)
    return matrix


def _pull(f: Formula) -> tuple[list[tuple[type, str]], Formula]:
    if isinstance(f, AtomicFormula):
        return [], f
    if isinstance(f, Quantifier):
        rest, matrix = _pull(f.body)
        return [(type(f), f.var)] + rest, matrix
    left_prefix, left = _pull(f.left)
    right_prefix, right = _pull(f.right)
    return left_prefix + right_prefix, type(f)(left, right)


# --------------------------------------------------------------------------
# Term flattening


def is_flat_atom(f: Formula) -> bool:
    if isinstance(f, Bottom):
        return True
    if isinstance(f, Atom):
        return all(isinstance(a, Var) for a in f.args)
    if isinstance(f, Eq):
        l, r = f.lhs, f.rhs
        if isinstance(l, Var) and isinstance(r, Var):
            return True
        if isinstance(l, App) and isinstance(r, Var):
            return bool(l.args) and all(isinstance(a, Var) for a in l.args)
        if isinstance(l, Var) and isinstance(r, App):
            return not r.args
    return False


def flatten_atoms(f: Formula) -> Formula:
    """Rewrite every atom so it mentions at most one non-logical symbol.

    Allowed shapes afterwards: ``x = y``, ``f(x1..xn) = y``, ``x = c()`` and
    ``R(x1..xn)``.  Nested terms are named by fresh existential variables
    ``y0, y1, ...``; numbering restarts for each atom, is assigned inner terms
    first, and skips names already occurring in ``f``.
    """
    used = all_vars(f)

    def walk(g: Formula) -> Formula:
        if isinstance(g, (Eq, Atom)):
            return _flatten_atom(g, used)
        if isinstance(g, Not):
            return Not(walk(g.body))
        if isinstance(g, Binary):
            return type(g)(walk(g.left), walk(g.right))
        if isinstance(g, Quantifier):
            return type(g)(g.var, walk(g.body))
        return g

    return walk(f)


def _flatten_atom(g: Formula, used: set[str]) -> Formula:
    if is_flat_atom(g):
        return g
    names: list[str] = []

    def gensym() -> str:
        n = len(names)
        while True:
            cand = f"y{n}"
            n += 1
            if cand not in used and cand not in names:
                names.append(cand)
                return cand

    def define(t: App, target: Var) -> Formula:
        if not t.args:
            return Eq(target, t)
        return Eq(t, target)

    def name_term(t: Term) -> tuple[Var, list[Formula]]:
        # children are numbered first; the defining equation of the outer
        # term precedes those of its subterms
        if isinstance(t, Var):
            return t, []
        flat, inner = flat_args(t)
        v = Var(gensym())
        return v, [define(flat, v)] + inner

    def flat_args(t: App) -> tuple[App, list[Formula]]:
        args: list[Term] = []
        defs: list[Formula] = []
        for a in t.args:
            v, d = name_term(a)
            args.append(v)
            defs.extend(d)
        return App(t.symbol, tuple(args)), defs

    if isinstance(g, Atom):
        flat, defs = flat_args(App(g.symbol, g.args))
        core: Formula = Atom(g.symbol, flat.args)
        body = [core] + defs
    else:
        l, r = g.lhs, g.rhs
        if isinstance(l, App) and not l.args and isinstance(r, Var):
            return Eq(r, l)
        if isinstance(l, Var) or isinstance(r, Var):
            v, t = (l, r) if isinstance(l, Var) else (r, l)
            flat, defs = flat_args(t)
            body = [define(flat, v)] + defs
        else:
            lflat, ldefs = flat_args(l)
            rflat, rdefs = flat_args(r)
            shared = Var(gensym())
            body = [define(lflat, shared), define(rflat, shared)] + ldefs + rdefs
    return quantify(Exists, names, conj(body))


# --------------------------------------------------------------------------
# Printing

_IMP, _OR, _AND, _NOT = 1, 2, 3, 4


def to_text(f: Formula) -> str:
    return _show(f, 0)


def _show(f: Formula, ctx: int) -> str:
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Eq):
        return f"{f.lhs} = {f.rhs}"
    if isinstance(f, Atom):
        return f"{f.symbol}({', '.join(map(str, f.args))})"
    if isinstance(f, Not):
        if isinstance(f.body, Eq):
            return f"{f.body.lhs} != {f.body.rhs}"
        return "!" + _show(f.body, _NOT)
    if isinstance(f, Implies):
        text = f"{_show(f.left, _OR)} -> {_show(f.right, _IMP)}"
        return f"({text})" if ctx > _IMP else text
    if isinstance(f, Or):
        text = f"{_show(f.left, _OR)} | {_show(f.right, _AND)}"
        return f"({text})" if ctx > _OR else text
    if isinstance(f, And):
        text = f"{_show(f.left, _AND)} & {_show(f.right, _NOT)}"
        return f"({text})" if ctx > _AND else text
    kind = type(f)
    names = []
    while isinstance(f, kind):
        names.append(f.var)
        f = f.body
    word = "forall" if kind is Forall else "exists"
    text = f"{word} {' '.join(names)}. {_show(f, 0)}"
    return f"({text})" if ctx > 0 else text


# --------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<op>->|!=|[=&|!(),.])
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*(?:\#\d+)?)
    """,
    re.VERBOSE,
)
_KEYWORDS = {"forall", "exists", "false"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, allow_reserved: bool) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind == "name":
            word = m.group()
            if "#" in word and not allow_reserved:
                raise ParseError(f"reserved variable name {word!r}", line, col)
            toks.append(_Tok("kw" if word in _KEYWORDS else "name", word, line, col))
        elif kind == "op":
            toks.append(_Tok("op", m.group(), line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, constants: Iterable[str], allow_reserved: bool):
        self.toks = _tokenize(text, allow_reserved)
        self.i = 0
        self.constants = set(constants)
        self.arity: dict[str, tuple[str, int]] = {}

    def peek(self, offset: int = 0) -> _Tok:
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def error(self, message: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col)

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        tok = self.peek()
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            want = repr(text) if text is not None else kind
            got = repr(tok.text) if tok.text else "end of input"
            raise self.error(f"expected {want}, got {got}")
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("op", "kw") and tok.text == text

    def note(self, name: str, kind: str, n: int, tok: _Tok) -> None:
        prev = self.arity.setdefault(name, (kind, n))
        if prev != (kind, n):
            raise self.error(
                f"symbol {name!r} used as {kind}/{n} but earlier as {prev[0]}/{prev[1]}", tok
            )

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.take("->")
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.at("|"):
            self.take("|")
            out = Or(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.unary()
        while self.at("&"):
            self.take("&")
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        if self.at("!"):
            self.take("!")
            return Not(self.unary())
        if self.at("forall") or self.at("exists"):
            kind = Forall if self.take(kind="kw").text == "forall" else Exists
            names = [self.take(kind="name").text]
            while self.peek().kind == "name":
                names.append(self.take(kind="name").text)
            self.take(".")
            return quantify(kind, names, self.formula())
        return self.primary()

    def primary(self) -> Formula:
        if self.at("false"):
            self.take("false")
            return Bottom()
        if self.at("("):
            self.take("(")
            inner = self.formula()
            self.take(")")
            return inner
        start = self.peek()
        lhs = self.term(as_relation=True)
        if self.at("=") or self.at("!="):
            negated = self.take(kind="op").text == "!="
            if isinstance(lhs, App) and lhs.symbol in self.arity and self.arity[lhs.symbol][0] == "rel":
                raise self.error(f"relation symbol {lhs.symbol!r} used as a function", start)
            self._register_term(lhs, start)
            out: Formula = Eq(lhs, self.term())
            return Not(out) if negated else out
        if isinstance(lhs, App) and lhs.symbol not in self.constants:
            self.note(lhs.symbol, "rel", len(lhs.args), start)
            for a in lhs.args:
                self._register_term(a, start)
            return Atom(lhs.symbol, lhs.args)
        raise self.error("expected an atom", start)

    def _register_term(self, t: Term, tok: _Tok) -> None:
        if isinstance(t, App):
            self.note(t.symbol, "fun", len(t.args), tok)
            for a in t.args:
                self._register_term(a, tok)

    def term(self, as_relation: bool = False) -> Term:
        tok = self.take(kind="name")
        if self.at("("):
            self.take("(")
            args: list[Term] = []
            if not self.at(")"):
                args.append(self.term())
                while self.at(","):
                    self.take(",")
                    args.append(self.term())
            self.take(")")
            t = App(tok.text, tuple(args))
            if not as_relation:
                self._register_term(t, tok)
            return t
        if tok.text in self.constants:
            t = App(tok.text, ())
            if not as_relation:
                self._register_term(t, tok)
            return t
        return Var(tok.text)


def parse(text: str, constants: Iterable[str] = (), allow_reserved: bool = False) -> Formula:
    """Parse concrete syntax into a :class:`Formula`.

    Names listed in ``constants`` may be written without parentheses.
    Raises :class:`ParseError` with line and column on bad input, including
    symbols used with inconsistent arities.
    """
    p = _Parser(text, constants, allow_reserved)
    if p.peek().kind == "eof":
        raise p.error("empty formula")
    out = p.formula()
    if p.peek().kind != "eof":
        raise p.error(f"unexpected {p.peek().text!r}")
    return out
