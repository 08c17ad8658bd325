"""Monadic interaction logic: sorted first-order logic with equality and unary
predicates over component instances.

Every index variable and predicate carries its component type; quantifiers
range over ``[1, M(type)]``.  Cardinality atoms :class:`Card` are part of the
same tree so that quantifier elimination can produce mixed intermediate
formulae; a formula whose only atoms are ``Card`` nodes is a closed
cardinality formula.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Union

from . import boolean as bf
from .errors import CapExceeded, NotPositive, ShapeError, TypeMismatch, UnboundVariable

STRUCTURE_BOUND = 1 << 22
INF = None  # bound value standing for infinity


@dataclass(frozen=True, order=True)
class IndexVar:
    name: str
    ctype: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class PredSymbol:
    name: str
    ctype: str
    kind: str = "state"

    def __str__(self) -> str:
        return self.name


Index = Union[IndexVar, int]


class MilFormula:
    __slots__ = ()

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return neg(self)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, repr=False)
class Truth(MilFormula):
    value: bool

    def __repr__(self) -> str:
        return "TRUE" if self.value else "FALSE"


@dataclass(frozen=True, repr=False)
class Eq(MilFormula):
    left: Index
    right: Index

    def __repr__(self) -> str:
        return f"Eq({self.left}, {self.right})"


@dataclass(frozen=True, repr=False)
class Atom(MilFormula):
    pred: PredSymbol
    arg: Index

    def __repr__(self) -> str:
        return f"Atom({self.pred.name}({self.arg}))"


@dataclass(frozen=True, repr=False)
class Not(MilFormula):
    arg: MilFormula

    def __repr__(self) -> str:
        return f"Not({self.arg!r})"


@dataclass(frozen=True, repr=False)
class And(MilFormula):
    args: tuple

    def __repr__(self) -> str:
        return f"And{self.args!r}"


@dataclass(frozen=True, repr=False)
class Or(MilFormula):
    args: tuple

    def __repr__(self) -> str:
        return f"Or{self.args!r}"


@dataclass(frozen=True, repr=False)
class Exists(MilFormula):
    var: IndexVar
    body: MilFormula

    def __repr__(self) -> str:
        return f"Exists({self.var}, {self.body!r})"


@dataclass(frozen=True, repr=False)
class Forall(MilFormula):
    var: IndexVar
    body: MilFormula

    def __repr__(self) -> str:
        return f"Forall({self.var}, {self.body!r})"


@dataclass(frozen=True, repr=False)
class Card(MilFormula):
    """``|term| >= bound`` or ``|term| <= bound`` over instances of ``ctype``.

    ``term`` is a boolean formula whose variables are predicate names of
    ``ctype``.  Build through :func:`card`, which normalises the term and
    folds trivial bounds.
    """

    ctype: str
    term: bf.BoolFormula
    op: str
    bound: int

    def __repr__(self) -> str:
        return f"Card({render(self)})"


TRUE = Truth(True)
FALSE = Truth(False)


# ---------------------------------------------------------------- constructors


def _dedupe(items):
    seen = set()
    out = []
    for it in items:
        if it not in seen:
            seen.add(it)
            out.append(it)
    return out


def conj(*args: MilFormula) -> MilFormula:
    flat = []
    for a in args:
        if isinstance(a, And):
            flat.extend(a.args)
        elif a == TRUE:
            continue
        elif a == FALSE:
            return FALSE
        else:
            flat.append(a)
    flat = _dedupe(flat)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*args: MilFormula) -> MilFormula:
    flat = []
    for a in args:
        if isinstance(a, Or):
            flat.extend(a.args)
        elif a == FALSE:
            continue
        elif a == TRUE:
            return TRUE
        else:
            flat.append(a)
    flat = _dedupe(flat)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(f: MilFormula) -> MilFormula:
    if isinstance(f, Truth):
        return Truth(not f.value)
    if isinstance(f, Not):
        return f.arg
    if isinstance(f, Card):
        if f.op == ">=":
            return card(f.ctype, f.term, "<=", f.bound - 1)
        return card(f.ctype, f.term, ">=", f.bound + 1)
    return Not(f)


def implies(a: MilFormula, b: MilFormula) -> MilFormula:
    return disj(neg(a), b)


def iff(a: MilFormula, b: MilFormula) -> MilFormula:
    return conj(implies(a, b), implies(b, a))


def _check_same_type(a: Index, b: Index) -> None:
    if isinstance(a, IndexVar) and isinstance(b, IndexVar) and a.ctype != b.ctype:
        raise TypeMismatch(f"equality between {a.name}:{a.ctype} and {b.name}:{b.ctype}")


def eq(a: Index, b: Index) -> MilFormula:
    _check_same_type(a, b)
    if a == b:
        return TRUE
    if isinstance(a, int) and isinstance(b, int):
        return Truth(a == b)
    if isinstance(a, int) or (isinstance(b, IndexVar) and b < a):
        a, b = b, a
    return Eq(a, b)


def neq(a: Index, b: Index) -> MilFormula:
    return neg(eq(a, b))


def atom(pred: PredSymbol, arg: Index) -> MilFormula:
    if isinstance(arg, IndexVar) and arg.ctype != pred.ctype:
        raise TypeMismatch(f"predicate {pred.name} of type {pred.ctype} applied to "
                           f"{arg.name} of type {arg.ctype}")
    return Atom(pred, arg)


def exists(vs: IndexVar | Iterable[IndexVar], body: MilFormula) -> MilFormula:
    seq = [vs] if isinstance(vs, IndexVar) else list(vs)
    for v in reversed(seq):
        if isinstance(body, Truth):
            continue
        body = Exists(v, body)
    return body


def forall(vs: IndexVar | Iterable[IndexVar], body: MilFormula) -> MilFormula:
    seq = [vs] if isinstance(vs, IndexVar) else list(vs)
    for v in reversed(seq):
        if isinstance(body, Truth):
            continue
        body = Forall(v, body)
    return body


def distinct(*vs: Index) -> MilFormula:
    return conj(*(neq(a, b) for a, b in itertools.combinations(vs, 2)))


def term_var(p: PredSymbol) -> bf.Var:
    return bf.var(p.name, p.kind, (p.ctype,))


def term_symbol(v: bf.BoolVar) -> PredSymbol:
    return PredSymbol(v.name, v.origin[0] if v.origin else "", v.kind)


def term_symbols(term: bf.BoolFormula) -> tuple[PredSymbol, ...]:
    return tuple(term_symbol(v) for v in bf.variables(term))


def card(ctype: str, term: bf.BoolFormula, op: str, bound: int | None) -> MilFormula:
    """Normalised cardinality atom; ``bound=None`` means infinity."""
    if op not in (">=", "<="):
        raise ValueError(f"bad cardinality operator {op!r}")
    if bound is None:
        return FALSE if op == ">=" else TRUE
    term = canonical_term(term)
    if op == ">=":
        if bound <= 0:
            return TRUE
        if term == bf.BOT:
            return FALSE
    else:
        if bound < 0:
            return FALSE
        if term == bf.BOT:
            return TRUE
    return Card(ctype, term, op, bound)


# ---------------------------------------------------------------- terms


def canonical_term(term: bf.BoolFormula) -> bf.BoolFormula:
    """A deterministic small DNF equivalent to ``term`` (prime-implicant cover)."""
    # variables compare by name only, so the cache key carries kind and origin too
    tags = tuple((v.name, v.kind, v.origin) for v in bf.variables(term))
    return _canonical_term(term, tags)


@lru_cache(maxsize=65536)
def _canonical_term(term: bf.BoolFormula, tags: tuple) -> bf.BoolFormula:
    vs = bf.variables(term)
    if len(vs) > 8:
        return term
    names = [v.name for v in vs]
    by_name = {v.name: v for v in vs}
    table = [bf.evaluate(term, frozenset(n for i, n in enumerate(names) if m >> i & 1))
             for m in range(1 << len(names))]
    # drop inessential variables
    essential = []
    for i, n in enumerate(names):
        bit = 1 << i
        if any(table[m] != table[m ^ bit] for m in range(len(table)) if not m & bit):
            essential.append(i)
    models = [m for m, t in enumerate(table) if t]
    if not models:
        return bf.BOT
    if len(models) == len(table):
        return bf.TOP
    ess_names = [names[i] for i in essential]
    k = len(essential)

    def project(m: int) -> int:
        return sum(1 << j for j, i in enumerate(essential) if m >> i & 1)

    proj_models = sorted({project(m) for m in models})
    model_set = set(proj_models)
    # cubes as (care_mask, value_mask)
    implicants = []
    for care in range(1 << k):
        for value in range(1 << k):
            if value & ~care:
                continue
            free = [j for j in range(k) if not care >> j & 1]
            covered = set()
            ok = True
            for bits in range(1 << len(free)):
                m = value
                for idx, j in enumerate(free):
                    if bits >> idx & 1:
                        m |= 1 << j
                if m not in model_set:
                    ok = False
                    break
                covered.add(m)
            if ok:
                implicants.append((care, value, frozenset(covered)))
    primes = [c for c in implicants
              if not any(o[2] > c[2] for o in implicants)]
    primes.sort(key=lambda c: (bin(c[0]).count("1"), c[0], c[1]))
    uncovered = set(proj_models)
    chosen = []
    while uncovered:
        best = max(primes, key=lambda c: (len(c[2] & uncovered), -bin(c[0]).count("1"), -c[0], -c[1]))
        chosen.append(best)
        uncovered -= best[2]
    chosen.sort(key=lambda c: (bin(c[0]).count("1"), c[0], c[1]))
    disjuncts = []
    for care, value, _ in chosen:
        lits = []
        for j in range(k):
            if care >> j & 1:
                v = bf.Var(by_name[ess_names[j]])
                lits.append(v if value >> j & 1 else bf.Not(v))
        lits.sort(key=lambda lit: lit.name if isinstance(lit, bf.Var) else lit.arg.name)
        disjuncts.append(bf.conj(*lits))
    return bf.disj(*disjuncts)


def term_at(term: bf.BoolFormula, ctype: str, arg: Index) -> MilFormula:
    """The formula ``t(i)``."""
    if isinstance(term, bf.Const):
        return Truth(term.value)
    if isinstance(term, bf.Var):
        return atom(PredSymbol(term.var.name, ctype, term.var.kind), arg)
    if isinstance(term, bf.Not):
        return neg(term_at(term.arg, ctype, arg))
    parts = [term_at(a, ctype, arg) for a in term.args]
    return conj(*parts) if isinstance(term, bf.And) else disj(*parts)


class _Fresh:
    def __init__(self, prefix: str = "_c", taken: Iterable[str] = ()):
        self.prefix = prefix
        self.n = 0
        self.taken = set(taken)

    def __call__(self, ctype: str) -> IndexVar:
        while True:
            self.n += 1
            name = f"{self.prefix}{self.n}"
            if name not in self.taken:
                self.taken.add(name)
                return IndexVar(name, ctype)


def card_to_mil(f: MilFormula, _fresh: _Fresh | None = None) -> MilFormula:
    """Expand every cardinality atom into its first-order definition."""
    fresh = _fresh or _Fresh(taken=(v.name for v in bound_and_free_vars(f)))
    if isinstance(f, Card):
        if f.op == ">=":
            return _card_geq(f.ctype, f.term, f.bound, fresh)
        return neg(_card_geq(f.ctype, f.term, f.bound + 1, fresh))
    return _rebuild(f, lambda g: card_to_mil(g, fresh))


def _card_geq(ctype: str, term: bf.BoolFormula, n: int, fresh: _Fresh) -> MilFormula:
    if n <= 0:
        return TRUE
    vs = [fresh(ctype) for _ in range(n)]
    return exists(vs, conj(distinct(*vs), *(term_at(term, ctype, v) for v in vs)))


def _rebuild(f: MilFormula, fn) -> MilFormula:
    if isinstance(f, Not):
        return neg(fn(f.arg))
    if isinstance(f, And):
        return conj(*(fn(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(fn(a) for a in f.args))
    if isinstance(f, Exists):
        return exists(f.var, fn(f.body))
    if isinstance(f, Forall):
        return forall(f.var, fn(f.body))
    return f


# ---------------------------------------------------------------- syntax queries


def free_vars(f: MilFormula) -> frozenset[IndexVar]:
    if isinstance(f, (Truth, Card)):
        return frozenset()
    if isinstance(f, Eq):
        return frozenset(x for x in (f.left, f.right) if isinstance(x, IndexVar))
    if isinstance(f, Atom):
        return frozenset([f.arg]) if isinstance(f.arg, IndexVar) else frozenset()
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (And, Or)):
        out: frozenset = frozenset()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a MIL formula: {f!r}")


def bound_and_free_vars(f: MilFormula) -> set[IndexVar]:
    out: set[IndexVar] = set()
    for g in subformulae(f):
        if isinstance(g, (Exists, Forall)):
            out.add(g.var)
        elif isinstance(g, Eq):
            out.update(x for x in (g.left, g.right) if isinstance(x, IndexVar))
        elif isinstance(g, Atom) and isinstance(g.arg, IndexVar):
            out.add(g.arg)
    return out


def subformulae(f: MilFormula) -> Iterator[MilFormula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(g.args)
        elif isinstance(g, (Exists, Forall)):
            stack.append(g.body)


def is_sentence(f: MilFormula) -> bool:
    return not free_vars(f)


def is_quantifier_free(f: MilFormula) -> bool:
    return not any(isinstance(g, (Exists, Forall)) for g in subformulae(f))


def predicates(f: MilFormula) -> set[PredSymbol]:
    out: set[PredSymbol] = set()
    for g in subformulae(f):
        if isinstance(g, Atom):
            out.add(g.pred)
        elif isinstance(g, Card):
            out.update(term_symbols(g.term))
    return out


def component_types(f: MilFormula) -> set[str]:
    out: set[str] = set()
    for g in subformulae(f):
        if isinstance(g, Atom):
            out.add(g.pred.ctype)
        elif isinstance(g, Card):
            out.add(g.ctype)
        elif isinstance(g, (Exists, Forall)):
            out.add(g.var.ctype)
    return out


def _term_polarities(term: bf.BoolFormula, pol: bool, out: set) -> None:
    if isinstance(term, bf.Var):
        out.add(pol)
    elif isinstance(term, bf.Not):
        _term_polarities(term.arg, not pol, out)
    elif isinstance(term, (bf.And, bf.Or)):
        for a in term.args:
            _term_polarities(a, pol, out)


def is_positive(f: MilFormula) -> bool:
    """Every predicate symbol under an even number of negations.

    A cardinality atom counts as its first-order definition: ``|t| >= n``
    keeps the polarity of ``t``; ``|t| <= n`` flips it.
    """

    def walk(g: MilFormula, pol: bool) -> bool:
        if isinstance(g, (Truth, Eq)):
            return True
        if isinstance(g, Atom):
            return pol
        if isinstance(g, Card):
            pols: set = set()
            _term_polarities(g.term, pol if g.op == ">=" else not pol, pols)
            return pols <= {True}
        if isinstance(g, Not):
            return walk(g.arg, not pol)
        if isinstance(g, (And, Or)):
            return all(walk(a, pol) for a in g.args)
        return walk(g.body, pol)

    return walk(f, True)


# ---------------------------------------------------------------- semantics


@dataclass(frozen=True)
class Structure:
    """Universe sizes per component type, index valuation, predicate interpretation."""

    sizes: Mapping[str, int]
    interp: Mapping[str, frozenset]
    valuation: Mapping[IndexVar, int] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.valuation is None:
            object.__setattr__(self, "valuation", {})

    def extent(self, name: str) -> frozenset:
        return self.interp.get(name, frozenset())

    def leq(self, other: Structure) -> bool:
        names = set(self.interp) | set(other.interp)
        return all(self.extent(n) <= other.extent(n) for n in names)

    def key(self) -> tuple:
        return (tuple(sorted(self.sizes.items())),
                tuple(sorted((k, tuple(sorted(v))) for k, v in self.interp.items() if v)))


def term_holds(term: bf.BoolFormula, I: Structure, element: int) -> bool:
    return bf.evaluate(term, frozenset(v.name for v in bf.variables(term)
                                       if element in I.extent(v.name)))


def cardinality(term: bf.BoolFormula, ctype: str, I: Structure) -> int:
    size = _size(I, ctype)
    return sum(1 for e in range(1, size + 1) if term_holds(term, I, e))


def _size(I: Structure, ctype: str) -> int:
    try:
        return I.sizes[ctype]
    except KeyError:
        raise UnboundVariable(f"universe size of {ctype}") from None


def eval_mil(f: MilFormula, I: Structure) -> bool:
    env = dict(I.valuation)

    def val(x: Index) -> int:
        if isinstance(x, int):
            return x
        try:
            return env[x]
        except KeyError:
            raise UnboundVariable(x.name) from None

    def ev(g: MilFormula) -> bool:
        if isinstance(g, Truth):
            return g.value
        if isinstance(g, Eq):
            return val(g.left) == val(g.right)
        if isinstance(g, Atom):
            if isinstance(g.arg, IndexVar) and g.arg.ctype != g.pred.ctype:
                raise TypeMismatch(f"{g.pred.name}({g.arg.name})")
            return val(g.arg) in I.extent(g.pred.name)
        if isinstance(g, Card):
            n = cardinality(g.term, g.ctype, I)
            return n >= g.bound if g.op == ">=" else n <= g.bound
        if isinstance(g, Not):
            return not ev(g.arg)
        if isinstance(g, And):
            return all(ev(a) for a in g.args)
        if isinstance(g, Or):
            return any(ev(a) for a in g.args)
        if isinstance(g, (Exists, Forall)):
            want = isinstance(g, Exists)
            saved = env.get(g.var, None)
            had = g.var in env
            result = not want
            for e in range(1, _size(I, g.var.ctype) + 1):
                env[g.var] = e
                if ev(g.body) == want:
                    result = want
                    break
            if had:
                env[g.var] = saved
            else:
                env.pop(g.var, None)
            return result
        raise TypeError(f"not a MIL formula: {g!r}")

    return ev(f)


def place_name(pred: str, index: int) -> str:
    return f"{pred}[{index}]"


def unfold(f: MilFormula, sizes: Mapping[str, int], kinds: Mapping[str, str] | None = None) -> bf.BoolFormula:
    """Replace quantifiers by finite junctions; ``pred(l)`` becomes variable ``pred[l]``."""
    for k, m in sizes.items():
        if m < 1:
            raise ValueError(f"universe size of {k} must be at least 1, got {m}")
    env: dict[IndexVar, int] = {}

    def val(x: Index) -> int:
        if isinstance(x, int):
            return x
        try:
            return env[x]
        except KeyError:
            raise UnboundVariable(x.name) from None

    def size(ctype: str) -> int:
        try:
            return sizes[ctype]
        except KeyError:
            raise UnboundVariable(f"universe size of {ctype}") from None

    def pvar(p: PredSymbol, e: int) -> bf.BoolFormula:
        return bf.var(place_name(p.name, e), p.kind, (p.ctype, e))

    def term_at_elem(term: bf.BoolFormula, ctype: str, e: int) -> bf.BoolFormula:
        return bf.substitute(term, {v.name: pvar(term_symbol(v), e) for v in bf.variables(term)})

    def go(g: MilFormula) -> bf.BoolFormula:
        if isinstance(g, Truth):
            return bf.Const(g.value)
        if isinstance(g, Eq):
            return bf.Const(val(g.left) == val(g.right))
        if isinstance(g, Atom):
            return pvar(g.pred, val(g.arg))
        if isinstance(g, Card):
            n = size(g.ctype)
            threshold = g.bound if g.op == ">=" else g.bound + 1
            at_least = bf.disj(*(bf.conj(*(term_at_elem(g.term, g.ctype, e) for e in combo))
                                 for combo in itertools.combinations(range(1, n + 1), threshold))) \
                if threshold <= n else bf.BOT
            if threshold <= 0:
                at_least = bf.TOP
            return at_least if g.op == ">=" else bf.neg(at_least)
        if isinstance(g, Not):
            return bf.neg(go(g.arg))
        if isinstance(g, And):
            return bf.conj(*(go(a) for a in g.args))
        if isinstance(g, Or):
            return bf.disj(*(go(a) for a in g.args))
        if isinstance(g, (Exists, Forall)):
            parts = []
            had, saved = g.var in env, env.get(g.var)
            for e in range(1, size(g.var.ctype) + 1):
                env[g.var] = e
                parts.append(go(g.body))
            if had:
                env[g.var] = saved
            else:
                env.pop(g.var, None)
            return bf.disj(*parts) if isinstance(g, Exists) else bf.conj(*parts)
        raise TypeError(f"not a MIL formula: {g!r}")

    return go(f)


def structure_to_valuation(I: Structure) -> frozenset:
    """The valuation beta_I as the set of true unfolded variables."""
    return frozenset(place_name(p, e) for p, ext in I.interp.items() for e in ext)


# ---------------------------------------------------------------- normal forms


def nnf(f: MilFormula, negate: bool = False) -> MilFormula:
    """Negation normal form; negation remains only on Eq and Atom nodes."""
    if isinstance(f, Truth):
        return Truth(f.value != negate)
    if isinstance(f, (Eq, Atom)):
        return Not(f) if negate else f
    if isinstance(f, Card):
        return neg(f) if negate else f
    if isinstance(f, Not):
        return nnf(f.arg, not negate)
    if isinstance(f, (And, Or)):
        parts = [nnf(a, negate) for a in f.args]
        return conj(*parts) if isinstance(f, And) != negate else disj(*parts)
    if isinstance(f, (Exists, Forall)):
        body = nnf(f.body, negate)
        return exists(f.var, body) if isinstance(f, Exists) != negate else forall(f.var, body)
    raise TypeError(f"not a MIL formula: {f!r}")


def mil_dual(f: MilFormula) -> MilFormula:
    """Swap and/or, exists/forall, =/!= in a positive formula.

    Cardinality atoms are expanded through their first-order definition first.
    """
    if any(isinstance(g, Card) for g in subformulae(f)):
        f = card_to_mil(f)
    if not is_positive(f):
        raise NotPositive(f"mil_dual needs a positive formula, got {render(f)}")

    def walk(g: MilFormula) -> MilFormula:
        if isinstance(g, Truth):
            return Truth(not g.value)
        if isinstance(g, Eq):
            return Not(g)
        if isinstance(g, Atom):
            return g
        if isinstance(g, Not):
            if isinstance(g.arg, Eq):
                return g.arg
            raise NotPositive("negated predicate atom in positive formula")
        if isinstance(g, And):
            return Or(tuple(walk(a) for a in g.args))
        if isinstance(g, Or):
            return And(tuple(walk(a) for a in g.args))
        if isinstance(g, Exists):
            return Forall(g.var, walk(g.body))
        if isinstance(g, Forall):
            return Exists(g.var, walk(g.body))
        raise TypeError(f"not a MIL formula: {g!r}")

    return walk(nnf(f))


def substitute_var(f: MilFormula, old: IndexVar, new: Index) -> MilFormula:
    """Capture-avoiding replacement of free occurrences of ``old``."""

    def sub(x: Index) -> Index:
        return new if x == old else x

    def go(g: MilFormula) -> MilFormula:
        if isinstance(g, (Truth, Card)):
            return g
        if isinstance(g, Eq):
            return eq(sub(g.left), sub(g.right))
        if isinstance(g, Atom):
            return atom(g.pred, sub(g.arg))
        if isinstance(g, (Exists, Forall)):
            if g.var == old:
                return g
            if isinstance(new, IndexVar) and g.var == new:
                raise ShapeError("substitution would capture a bound variable")
            return type(g)(g.var, go(g.body))
        return _rebuild(g, go)

    return go(f)


def prenex(f: MilFormula) -> MilFormula:
    """Equivalent prenex form with bound variables renamed apart."""
    used = {v.name for v in free_vars(f)}
    counter = itertools.count(1)

    def fresh(v: IndexVar) -> IndexVar:
        if v.name not in used:
            used.add(v.name)
            return v
        while True:
            cand = f"{v.name}_{next(counter)}"
            if cand not in used:
                used.add(cand)
                return IndexVar(cand, v.ctype)

    def rename_apart(g: MilFormula) -> MilFormula:
        if isinstance(g, (Exists, Forall)):
            nv = fresh(g.var)
            body = g.body if nv == g.var else substitute_var(g.body, g.var, nv)
            return type(g)(nv, rename_apart(body))
        return _rebuild_raw(g, rename_apart)

    def pull(g: MilFormula) -> tuple[list, MilFormula]:
        if isinstance(g, (Exists, Forall)):
            pre, m = pull(g.body)
            return [(type(g), g.var)] + pre, m
        if isinstance(g, (And, Or)):
            prefix: list = []
            mats = []
            for a in g.args:
                pre, m = pull(a)
                prefix.extend(pre)
                mats.append(m)
            return prefix, (conj(*mats) if isinstance(g, And) else disj(*mats))
        return [], g

    prefix, matrix = pull(rename_apart(nnf(f)))
    out = matrix
    for q, v in reversed(prefix):
        out = q(v, out)
    return out


def _rebuild_raw(f: MilFormula, fn) -> MilFormula:
    if isinstance(f, Not):
        return Not(fn(f.arg))
    if isinstance(f, And):
        return And(tuple(fn(a) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(fn(a) for a in f.args))
    return f


def quantifier_prefix(f: MilFormula) -> list[tuple[str, IndexVar]]:
    out = []
    while isinstance(f, (Exists, Forall)):
        out.append(("exists" if isinstance(f, Exists) else "forall", f.var))
        f = f.body
    return out


# ---------------------------------------------------------------- enumeration


def enumerate_structures(preds: Iterable[PredSymbol], max_sizes: Mapping[str, int],
                         exact: bool = False, bound: int = STRUCTURE_BOUND) -> Iterator[Structure]:
    """Every structure over ``preds`` with per-type sizes in ``[1, max]`` (or exactly
    ``max`` when ``exact``), each yielded once."""
    preds = sorted(set(preds))
    types = sorted(max_sizes)
    by_type = {k: [p for p in preds if p.ctype == k] for k in types}
    for p in preds:
        if p.ctype not in max_sizes:
            raise UnboundVariable(f"universe size of {p.ctype}")
    ranges = [[max_sizes[k]] if exact else list(range(1, max_sizes[k] + 1)) for k in types]
    total = 0
    for combo in itertools.product(*ranges):
        count = 1
        for k, m in zip(types, combo):
            count *= 2 ** (m * len(by_type[k]))
        total += count
    if total > bound:
        raise CapExceeded("structure count", bound, "enumerate_structures")
    for combo in itertools.product(*ranges):
        sizes = dict(zip(types, combo))
        slots = [(p, e) for k in types for p in by_type[k] for e in range(1, sizes[k] + 1)]
        for bits in range(1 << len(slots)):
            interp: dict[str, set] = {p.name: set() for p in preds}
            for i, (p, e) in enumerate(slots):
                if bits >> i & 1:
                    interp[p.name].add(e)
            yield Structure(sizes, {k: frozenset(v) for k, v in interp.items()})


def structure_count(preds: Iterable[PredSymbol], max_sizes: Mapping[str, int], exact: bool = False) -> int:
    preds = set(preds)
    total = 0
    types = sorted(max_sizes)
    ranges = [[max_sizes[k]] if exact else list(range(1, max_sizes[k] + 1)) for k in types]
    for combo in itertools.product(*ranges):
        c = 1
        for k, m in zip(types, combo):
            c *= 2 ** (m * sum(1 for p in preds if p.ctype == k))
        total += c
    return total


def minimal_structures(f: MilFormula, preds: Iterable[PredSymbol], sizes: Mapping[str, int]) -> set[tuple]:
    """Keys of the pointwise-minimal models of ``f`` among structures of exactly ``sizes``."""
    from . import kernels
    import numpy as np

    preds = sorted(set(preds))
    structs = list(enumerate_structures(preds, sizes, exact=True))
    table = np.array([eval_mil(f, I) for I in structs], dtype=np.uint8)
    nbits = (len(table) - 1).bit_length() if len(table) > 1 else 0
    minimal = kernels.minimal_masks(table, nbits)
    return {structs[int(i)].key() for i in np.flatnonzero(minimal)}


# ---------------------------------------------------------------- printing


def render(f: MilFormula, ascii: bool = False) -> str:
    AND, OR, NOT = (" & ", " | ", "!") if ascii else (" ∧ ", " ∨ ", "¬")
    EX, FA = ("exists ", "forall ") if ascii else ("∃", "∀")
    GE, LE, NE = (">=", "<=", "!=") if ascii else ("≥", "≤", "≠")

    def walk(g: MilFormula, parent: str) -> str:
        if isinstance(g, Truth):
            return ("true" if g.value else "false") if ascii else ("⊤" if g.value else "⊥")
        if isinstance(g, Eq):
            return f"{g.left} = {g.right}"
        if isinstance(g, Atom):
            return f"{g.pred.name}({g.arg})"
        if isinstance(g, Card):
            t = bf.render(g.term, ascii=ascii)
            op = GE if g.op == ">=" else LE
            return f"|{t}| {op} {g.bound}"
        if isinstance(g, Not):
            if isinstance(g.arg, Eq):
                return f"{g.arg.left} {NE} {g.arg.right}"
            return NOT + walk(g.arg, "not")
        if isinstance(g, And):
            s = AND.join(walk(a, "and") for a in g.args)
            return f"({s})" if parent in ("not", "quant") else s
        if isinstance(g, Or):
            s = OR.join(walk(a, "or") for a in g.args)
            return f"({s})" if parent in ("and", "not", "quant") else s
        q = EX if isinstance(g, Exists) else FA
        s = f"{q}{g.var} . {walk(g.body, 'quant')}"
        return f"({s})" if parent in ("and", "or", "not") else s

    return walk(f, "top")
