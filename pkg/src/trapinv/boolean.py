"""Propositional formulae over named variables.

Formulae are immutable trees built from :class:`Const`, :class:`Var`,
:class:`Not`, :class:`And` and :class:`Or`.  The smart constructors
:func:`conj`, :func:`disj` and :func:`neg` flatten, fold constants and
drop duplicate operands; the node classes themselves never rewrite.

A valuation is either a mapping ``name -> bool`` or a set of the names that
are true (closed world).  Enumeration-based operations return valuations as
frozensets of true names.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Mapping, Union

import numpy as np

from . import kernels
from .errors import CapExceeded, NotPositive, UnboundVariable

DNF_CAP = 100_000
ENUM_BOUND = 24


@dataclass(frozen=True)
class BoolVar:
    """A propositional variable; equality and hashing use the name only."""

    name: str
    kind: str = field(default="state", compare=False)
    origin: tuple | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return self.name


class BoolFormula:
    __slots__ = ()

    def __and__(self, other: BoolFormula) -> BoolFormula:
        return conj(self, other)

    def __or__(self, other: BoolFormula) -> BoolFormula:
        return disj(self, other)

    def __invert__(self) -> BoolFormula:
        return neg(self)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, repr=False)
class Const(BoolFormula):
    value: bool

    def __repr__(self) -> str:
        return "TOP" if self.value else "BOT"


@dataclass(frozen=True, repr=False)
class Var(BoolFormula):
    var: BoolVar

    @property
    def name(self) -> str:
        return self.var.name

    def __repr__(self) -> str:
        return f"Var({self.var.name!r})"


@dataclass(frozen=True, repr=False)
class Not(BoolFormula):
    arg: BoolFormula

    def __repr__(self) -> str:
        return f"Not({self.arg!r})"


@dataclass(frozen=True, repr=False)
class And(BoolFormula):
    args: tuple[BoolFormula, ...]

    def __repr__(self) -> str:
        return f"And{self.args!r}"


@dataclass(frozen=True, repr=False)
class Or(BoolFormula):
    args: tuple[BoolFormula, ...]

    def __repr__(self) -> str:
        return f"Or{self.args!r}"


TOP = Const(True)
BOT = Const(False)

Valuation = Union[Mapping[str, bool], frozenset, set]
Literal = tuple[BoolVar, bool]


def var(name: str, kind: str = "state", origin: tuple | None = None) -> Var:
    return Var(BoolVar(name, kind, origin))


def _dedupe(items: Iterable[BoolFormula]) -> list[BoolFormula]:
    seen = set()
    out = []
    for it in items:
        if it not in seen:
            seen.add(it)
            out.append(it)
    return out


def conj(*args: BoolFormula) -> BoolFormula:
    flat: list[BoolFormula] = []
    for a in args:
        if isinstance(a, And):
            flat.extend(a.args)
        elif a == TOP:
            continue
        elif a == BOT:
            return BOT
        else:
            flat.append(a)
    flat = _dedupe(flat)
    if not flat:
        return TOP
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*args: BoolFormula) -> BoolFormula:
    flat: list[BoolFormula] = []
    for a in args:
        if isinstance(a, Or):
            flat.extend(a.args)
        elif a == BOT:
            continue
        elif a == TOP:
            return TOP
        else:
            flat.append(a)
    flat = _dedupe(flat)
    if not flat:
        return BOT
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(f: BoolFormula) -> BoolFormula:
    if isinstance(f, Const):
        return Const(not f.value)
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def implies(a: BoolFormula, b: BoolFormula) -> BoolFormula:
    return disj(neg(a), b)


def iff(a: BoolFormula, b: BoolFormula) -> BoolFormula:
    return conj(implies(a, b), implies(b, a))


def variables(f: BoolFormula) -> tuple[BoolVar, ...]:
    """Variables of ``f`` sorted by name."""
    found: dict[str, BoolVar] = {}
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            found.setdefault(g.var.name, g.var)
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(g.args)
    return tuple(found[k] for k in sorted(found))


def evaluate(f: BoolFormula, beta: Valuation) -> bool:
    if isinstance(beta, (set, frozenset)):
        truth = beta

        def look(name: str) -> bool:
            return name in truth
    else:
        def look(name: str) -> bool:
            try:
                return bool(beta[name])
            except KeyError:
                raise UnboundVariable(name) from None

    def ev(g: BoolFormula) -> bool:
        if isinstance(g, Const):
            return g.value
        if isinstance(g, Var):
            return look(g.var.name)
        if isinstance(g, Not):
            return not ev(g.arg)
        if isinstance(g, And):
            return all(ev(a) for a in g.args)
        if isinstance(g, Or):
            return any(ev(a) for a in g.args)
        raise TypeError(f"not a boolean formula: {g!r}")

    return ev(f)


# deliberately shadows the builtin inside this module's public API only
eval = evaluate  # noqa: A001


def substitute(f: BoolFormula, mapping: Mapping[str, BoolFormula]) -> BoolFormula:
    """Replace variables by formulae, simplifying through the smart constructors."""
    if isinstance(f, Const):
        return f
    if isinstance(f, Var):
        return mapping.get(f.var.name, f)
    if isinstance(f, Not):
        return neg(substitute(f.arg, mapping))
    if isinstance(f, And):
        return conj(*(substitute(a, mapping) for a in f.args))
    if isinstance(f, Or):
        return disj(*(substitute(a, mapping) for a in f.args))
    raise TypeError(f"not a boolean formula: {f!r}")


def rename(f: BoolFormula, fn) -> BoolFormula:
    """Apply ``fn: BoolVar -> BoolVar`` to every variable."""
    if isinstance(f, Const):
        return f
    if isinstance(f, Var):
        return Var(fn(f.var))
    if isinstance(f, Not):
        return neg(rename(f.arg, fn))
    if isinstance(f, And):
        return conj(*(rename(a, fn) for a in f.args))
    return disj(*(rename(a, fn) for a in f.args))


# ---------------------------------------------------------------- polarity


def is_positive(f: BoolFormula) -> bool:
    """True iff every variable occurs under an even number of negations."""

    def walk(g: BoolFormula, pol: bool) -> bool:
        if isinstance(g, Const):
            return True
        if isinstance(g, Var):
            return pol
        if isinstance(g, Not):
            return walk(g.arg, not pol)
        return all(walk(a, pol) for a in g.args)

    return walk(f, True)


def nnf(f: BoolFormula, negate: bool = False) -> BoolFormula:
    if isinstance(f, Const):
        return Const(f.value != negate)
    if isinstance(f, Var):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return nnf(f.arg, not negate)
    parts = [nnf(a, negate) for a in f.args]
    if isinstance(f, And) != negate:
        return conj(*parts)
    return disj(*parts)


# ---------------------------------------------------------------- DNF


def _absorb(minterms: set[frozenset]) -> set[frozenset]:
    ordered = sorted(minterms, key=len)
    kept: list[frozenset] = []
    for m in ordered:
        if not any(k <= m for k in kept):
            kept.append(m)
    return set(kept)


def minterms(f: BoolFormula, cap: int = DNF_CAP, absorb: bool = True) -> list[frozenset]:
    """DNF of ``f`` as a list of literal sets; a literal is ``(BoolVar, polarity)``.

    Minterms containing complementary literals are dropped, duplicates merged,
    and (with ``absorb``) minterms subsumed by a smaller one removed.
    """

    def product_of(groups: list[set[frozenset]]) -> set[frozenset]:
        acc: set[frozenset] = {frozenset()}
        for g in groups:
            nxt: set[frozenset] = set()
            for a in acc:
                for b in g:
                    m = a | b
                    if _contradictory(m):
                        continue
                    nxt.add(m)
                    if len(nxt) > cap:
                        raise CapExceeded("DNF minterm count", cap, "to_dnf")
            acc = _absorb(nxt) if absorb else nxt
            if not acc:
                break
        return acc

    def walk(g: BoolFormula, pol: bool) -> set[frozenset]:
        if isinstance(g, Const):
            return {frozenset()} if g.value == pol else set()
        if isinstance(g, Var):
            return {frozenset([(g.var, pol)])}
        if isinstance(g, Not):
            return walk(g.arg, not pol)
        subs = [walk(a, pol) for a in g.args]
        if isinstance(g, And) == pol:
            return product_of(subs)
        out: set[frozenset] = set()
        for s in subs:
            out |= s
        if len(out) > cap:
            raise CapExceeded("DNF minterm count", cap, "to_dnf")
        return _absorb(out) if absorb else out

    result = walk(f, True)
    return sorted(result, key=_minterm_key)


def _contradictory(m: frozenset) -> bool:
    pos = {v.name for v, p in m if p}
    return any(v.name in pos for v, p in m if not p)


def _minterm_key(m: frozenset) -> tuple:
    return (len(m), tuple(sorted((v.name, not p) for v, p in m)))


def from_minterms(ms: Iterable[frozenset]) -> BoolFormula:
    terms = []
    for m in sorted(set(ms), key=_minterm_key):
        lits = sorted(m, key=lambda lit: lit[0].name)
        terms.append(conj(*(Var(v) if p else Not(Var(v)) for v, p in lits)))
    return disj(*terms)


def to_dnf(f: BoolFormula, cap: int = DNF_CAP, absorb: bool = False) -> BoolFormula:
    """Equivalent formula in DNF with literals sorted by name inside each minterm."""
    return from_minterms(minterms(f, cap=cap, absorb=absorb))


def is_dnf(f: BoolFormula) -> bool:
    def is_lit(g):
        return isinstance(g, Var) or (isinstance(g, Not) and isinstance(g.arg, Var))

    def is_minterm(g):
        if is_lit(g) or isinstance(g, Const):
            return True
        if isinstance(g, And) and all(is_lit(a) for a in g.args):
            names = [(a.name if isinstance(a, Var) else a.arg.name, isinstance(a, Var)) for a in g.args]
            return len(set(names)) == len(names)
        return False

    if isinstance(f, Or):
        return all(is_minterm(a) for a in f.args)
    return is_minterm(f)


def positivate(f: BoolFormula, cap: int = DNF_CAP) -> BoolFormula:
    """Delete the negative literals of every DNF minterm."""
    ms = minterms(f, cap=cap, absorb=False)
    kept = {frozenset(lit for lit in m if lit[1]) for m in ms}
    return from_minterms(_absorb(kept))


def dualize(f: BoolFormula) -> BoolFormula:
    """Swap conjunction and disjunction in a positive formula."""
    if not is_positive(f):
        raise NotPositive(f"dualize needs a positive formula, got {render(f)}")

    def walk(g: BoolFormula) -> BoolFormula:
        if isinstance(g, Const):
            return Const(not g.value)
        if isinstance(g, Var):
            return g
        if isinstance(g, And):
            return Or(tuple(walk(a) for a in g.args))
        if isinstance(g, Or):
            return And(tuple(walk(a) for a in g.args))
        raise AssertionError("negation survived nnf")

    return walk(nnf(f))


# ---------------------------------------------------------------- enumeration


def compile_program(f: BoolFormula, order: Mapping[str, int]) -> np.ndarray:
    code: list[int] = []

    def emit(g: BoolFormula) -> None:
        if isinstance(g, Const):
            code.extend((kernels.OP_CONST, int(g.value)))
        elif isinstance(g, Var):
            try:
                code.extend((kernels.OP_VAR, order[g.var.name]))
            except KeyError:
                raise UnboundVariable(g.var.name) from None
        elif isinstance(g, Not):
            emit(g.arg)
            code.extend((kernels.OP_NOT, 0))
        else:
            for a in g.args:
                emit(a)
            code.extend((kernels.OP_AND if isinstance(g, And) else kernels.OP_OR, len(g.args)))

    emit(f)
    return np.asarray(code, dtype=np.int32)


def _universe_names(f: BoolFormula, universe: Iterable | None) -> list[str]:
    if universe is None:
        return [v.name for v in variables(f)]
    names = sorted({u.name if isinstance(u, (BoolVar, Var)) else str(u) for u in universe})
    missing = {v.name for v in variables(f)} - set(names)
    if missing:
        raise UnboundVariable(sorted(missing)[0])
    return names


def truth_table(f: BoolFormula, names: list[str], bound: int = ENUM_BOUND) -> np.ndarray:
    if len(names) > bound:
        raise CapExceeded("enumeration variable count", bound, "truth_table")
    order = {n: i for i, n in enumerate(names)}
    return kernels.eval_program(compile_program(f, order), len(names))


def _mask_to_set(mask: int, names: list[str]) -> frozenset:
    return frozenset(n for i, n in enumerate(names) if mask >> i & 1)


def models(f: BoolFormula, universe: Iterable | None = None, bound: int = ENUM_BOUND) -> list[frozenset]:
    names = _universe_names(f, universe)
    table = truth_table(f, names, bound)
    return [_mask_to_set(int(m), names) for m in np.flatnonzero(table)]


def min_models(f: BoolFormula, universe: Iterable | None = None, bound: int = ENUM_BOUND) -> list[frozenset]:
    """The inclusion-minimal models of ``f`` over ``universe`` (default: vars of f)."""
    names = _universe_names(f, universe)
    table = truth_table(f, names, bound)
    minimal = kernels.minimal_masks(table, len(names))
    out = [_mask_to_set(int(m), names) for m in np.flatnonzero(minimal)]
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def equivalent(f: BoolFormula, g: BoolFormula, universe: Iterable | None = None,
               bound: int = ENUM_BOUND) -> bool:
    names = sorted({v.name for v in variables(f)} | {v.name for v in variables(g)}
                   | ({u.name if isinstance(u, (BoolVar, Var)) else str(u) for u in universe}
                      if universe is not None else set()))
    return bool(np.array_equal(truth_table(f, names, bound), truth_table(g, names, bound)))


def is_sat(f: BoolFormula, bound: int = ENUM_BOUND) -> tuple[bool, dict[str, bool] | None]:
    """Satisfiability with a witness; enumeration under ``bound`` vars, splitting above."""
    names = [v.name for v in variables(f)]
    if len(names) <= bound:
        table = truth_table(f, names, bound)
        hits = np.flatnonzero(table)
        if len(hits) == 0:
            return False, None
        m = int(hits[0])
        return True, {n: bool(m >> i & 1) for i, n in enumerate(names)}
    witness = _split_search(f, {})
    if witness is None:
        return False, None
    for n in names:
        witness.setdefault(n, False)
    return True, witness


def _split_search(f: BoolFormula, assigned: dict[str, bool]) -> dict[str, bool] | None:
    if f == TOP:
        return dict(assigned)
    if f == BOT:
        return None
    counts: dict[str, int] = {}
    for v in _iter_var_occurrences(f):
        counts[v] = counts.get(v, 0) + 1
    pick = max(sorted(counts), key=lambda k: counts[k])
    for value in (True, False):
        assigned[pick] = value
        found = _split_search(substitute(f, {pick: Const(value)}), assigned)
        del assigned[pick]
        if found is not None:
            return found
    return None


def _iter_var_occurrences(f: BoolFormula) -> Iterator[str]:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            yield g.var.name
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(g.args)


def all_valuations(names: list[str]) -> Iterator[dict[str, bool]]:
    for bits in product((False, True), repeat=len(names)):
        yield dict(zip(names, bits))


# ---------------------------------------------------------------- printing


def render(f: BoolFormula, ascii: bool = False) -> str:
    AND, OR, NOT = (" & ", " | ", "!") if ascii else (" ∧ ", " ∨ ", "¬")
    T, F = ("true", "false") if ascii else ("⊤", "⊥")

    def walk(g: BoolFormula, parent: str) -> str:
        if isinstance(g, Const):
            return T if g.value else F
        if isinstance(g, Var):
            return g.var.name
        if isinstance(g, Not):
            return NOT + walk(g.arg, "not")
        if isinstance(g, And):
            s = AND.join(walk(a, "and") for a in g.args)
            return f"({s})" if parent in ("not",) else s
        s = OR.join(walk(a, "or") for a in g.args)
        return f"({s})" if parent in ("and", "not") else s

    return walk(f, "top")
