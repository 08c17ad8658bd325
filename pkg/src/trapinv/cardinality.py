"""Cardinality constraints over monadic predicates.

A closed cardinality formula is a boolean combination of :class:`mil.Card`
atoms.  This module eliminates quantifiers from MIL into that fragment,
computes the upward closure (positivation) of a cardinality formula with
respect to the pointwise order on structures, dualises positive cardinality
formulae, and decides satisfiability by integer feasibility over counts of
complete minterms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import boolean as bf
from . import mil
from .errors import CapExceeded, NotPositive, ShapeError
from .mil import (FALSE, TRUE, And, Atom, Card, Eq, Exists, Forall, IndexVar, MilFormula, Not,
                  Or, Truth, card, card_to_mil, conj, disj, neg)

VOCAB_CAP = 10
COMPOSITION_CAP = 200_000
SAT_VOCAB_CAP = 12

__all__ = [
    "card_to_mil", "simplify", "qelim_exists", "elim_exists", "elim_forall", "qelim",
    "card_dnf", "split_vocab", "Box", "complete_decompose", "ppos", "ppos_card",
    "ppos_formula", "card_dual", "SizeSpec", "SatResult", "card_sat", "is_closed_card",
]


# ---------------------------------------------------------------- simplification


def _key(a: Card) -> tuple:
    return (a.ctype, a.term)


def _interval(a: Card) -> tuple[int, int | None]:
    return (a.bound, None) if a.op == ">=" else (0, a.bound)


def _atoms_of_interval(ctype, term, lo, hi) -> list[MilFormula]:
    out = []
    if lo > 0:
        out.append(card(ctype, term, ">=", lo))
    if hi is not None:
        out.append(card(ctype, term, "<=", hi))
    return out


def _merge_conj(args: list[MilFormula]) -> MilFormula:
    intervals: dict[tuple, list] = {}
    order: list = []
    rest = []
    for a in args:
        if isinstance(a, Card):
            k = _key(a)
            lo, hi = _interval(a)
            if k not in intervals:
                intervals[k] = [lo, hi]
                order.append(k)
            else:
                cur = intervals[k]
                cur[0] = max(cur[0], lo)
                if hi is not None:
                    cur[1] = hi if cur[1] is None else min(cur[1], hi)
        else:
            rest.append(a)
    atoms = []
    for k in order:
        lo, hi = intervals[k]
        if hi is not None and lo > hi:
            return FALSE
        atoms.extend(_atoms_of_interval(k[0], k[1], lo, hi))
    lits = set(rest) | set(atoms)
    if any(neg(x) in lits for x in rest):
        return FALSE
    # absorption: a & (a | b) = a
    kept = [x for x in rest if not (isinstance(x, Or) and any(y in lits for y in x.args))]
    return conj(*atoms, *kept)


def _merge_disj(args: list[MilFormula]) -> MilFormula:
    rays: dict[tuple, list] = {}
    order: list = []
    rest = []
    for a in args:
        if isinstance(a, Card):
            k = _key(a)
            if k not in rays:
                rays[k] = [None, None]  # smallest lower threshold, largest upper threshold
                order.append(k)
            r = rays[k]
            if a.op == ">=":
                r[0] = a.bound if r[0] is None else min(r[0], a.bound)
            else:
                r[1] = a.bound if r[1] is None else max(r[1], a.bound)
        else:
            rest.append(a)
    atoms = []
    for k in order:
        lo, hi = rays[k]
        if lo is not None and hi is not None and hi >= lo - 1:
            return TRUE
        if lo is not None:
            atoms.append(card(k[0], k[1], ">=", lo))
        if hi is not None:
            atoms.append(card(k[0], k[1], "<=", hi))
    lits = set(rest) | set(atoms)
    if any(neg(x) in lits for x in rest):
        return TRUE
    kept = [x for x in rest if not (isinstance(x, And) and any(y in lits for y in x.args))]
    return disj(*atoms, *kept)


def simplify(f: MilFormula) -> MilFormula:
    """Constant folding, flattening, duplicate and complement detection, and
    merging of cardinality atoms over the same term."""
    if isinstance(f, Not):
        inner = simplify(f.arg)
        return mil.nnf(inner, negate=True) if isinstance(inner, (And, Or, Not, Card, Truth)) else neg(inner)
    if isinstance(f, And):
        parts = conj(*(simplify(a) for a in f.args))
        return _merge_conj(list(parts.args)) if isinstance(parts, And) else parts
    if isinstance(f, Or):
        parts = disj(*(simplify(a) for a in f.args))
        return _merge_disj(list(parts.args)) if isinstance(parts, Or) else parts
    if isinstance(f, Exists):
        return mil.exists(f.var, simplify(f.body))
    if isinstance(f, Forall):
        return mil.forall(f.var, simplify(f.body))
    if isinstance(f, Eq):
        return mil.eq(f.left, f.right)
    return f


# ---------------------------------------------------------------- quantifier elimination


def _eq_partners(f: MilFormula, i: IndexVar) -> list:
    out = set()
    for g in mil.subformulae(f):
        if isinstance(g, Eq):
            if g.left == i and g.right != i:
                out.add(g.right)
            elif g.right == i and g.left != i:
                out.add(g.left)
    return sorted(out, key=lambda x: (isinstance(x, IndexVar), str(x)))


def _drop_equalities(f: MilFormula, i: IndexVar) -> MilFormula:
    if isinstance(f, Eq):
        return FALSE if i in (f.left, f.right) else f
    if isinstance(f, (Truth, Atom, Card)):
        return f
    return mil._rebuild(f, lambda g: _drop_equalities(g, i))


def _assign_atoms(f: MilFormula, i: IndexVar, truth: Mapping[str, bool]) -> MilFormula:
    if isinstance(f, Atom):
        return Truth(truth[f.pred.name]) if f.arg == i else f
    if isinstance(f, (Truth, Eq, Card)):
        return f
    return mil._rebuild(f, lambda g: _assign_atoms(g, i, truth))


def _exists_distinct(ctype: str, others: list, term: bf.BoolFormula) -> MilFormula:
    """Quantifier-free equivalent of ``exists i . t(i) and i != j for all j in others``."""
    clauses = []
    for r in range(len(others) + 1):
        for sub in itertools.combinations(others, r):
            premise = conj(mil.distinct(*sub), *(mil.term_at(term, ctype, j) for j in sub))
            clauses.append(mil.implies(premise, card(ctype, term, ">=", r + 1)))
    return conj(*clauses)


def elim_exists(i: IndexVar, psi: MilFormula) -> MilFormula:
    """Quantifier-free formula equivalent to ``exists i . psi`` for quantifier-free ``psi``."""
    psi = simplify(psi)
    if not mil.is_quantifier_free(psi):
        raise ShapeError("elim_exists needs a quantifier-free body")
    if i not in mil.free_vars(psi):
        return psi
    if isinstance(psi, Or):
        return simplify(disj(*(elim_exists(i, a) for a in psi.args)))
    if isinstance(psi, And):
        indep = [a for a in psi.args if i not in mil.free_vars(a)]
        if indep:
            dep = [a for a in psi.args if i in mil.free_vars(a)]
            return simplify(conj(*indep, elim_exists(i, conj(*dep))))
    partners = _eq_partners(psi, i)
    for j in partners:
        if isinstance(j, IndexVar) and j.ctype != i.ctype:
            raise mil.TypeMismatch(f"equality between {i.name} and {j.name}")
    cases = [simplify(mil.substitute_var(psi, i, j)) for j in partners]
    rest = simplify(_drop_equalities(psi, i))
    preds = sorted({g.pred for g in mil.subformulae(rest) if isinstance(g, Atom) and g.arg == i})
    groups: dict[MilFormula, list] = {}
    for bits in range(1 << len(preds)):
        truth = {p.name: bool(bits >> k & 1) for k, p in enumerate(preds)}
        residual = simplify(_assign_atoms(rest, i, truth))
        if residual == FALSE:
            continue
        minterm = bf.conj(*(mil.term_var(p) if truth[p.name] else bf.neg(mil.term_var(p))
                            for p in preds))
        groups.setdefault(residual, []).append(minterm)
    for residual, minterms in groups.items():
        term = bf.disj(*minterms)
        cases.append(conj(residual, _exists_distinct(i.ctype, partners, term)))
    return simplify(disj(*cases))


def elim_forall(i: IndexVar, psi: MilFormula) -> MilFormula:
    return simplify(mil.nnf(elim_exists(i, mil.nnf(psi, negate=True)), negate=True))


def qelim_exists(body: MilFormula, i: IndexVar) -> MilFormula:
    """Eliminate one existential quantifier from a quantifier-free body."""
    return elim_exists(i, body)


def qelim(f: MilFormula) -> MilFormula:
    """Closed cardinality formula equivalent to the MIL sentence ``f``.

    Quantifiers are eliminated innermost first; universal quantifiers go
    through the existential case by duality.
    """
    if isinstance(f, Exists):
        return elim_exists(f.var, qelim(f.body))
    if isinstance(f, Forall):
        return elim_forall(f.var, qelim(f.body))
    if isinstance(f, Not):
        return simplify(mil.nnf(qelim(f.arg), negate=True))
    if isinstance(f, And):
        return simplify(conj(*(qelim(a) for a in f.args)))
    if isinstance(f, Or):
        return simplify(disj(*(qelim(a) for a in f.args)))
    return simplify(f)


def is_closed_card(f: MilFormula) -> bool:
    return all(isinstance(g, (Truth, Card, And, Or, Not)) for g in mil.subformulae(f))


# ---------------------------------------------------------------- DNF over atoms


def _atom_key(a: Card) -> tuple[tuple, bool]:
    """Atom identity as ``|t| >= n`` plus polarity."""
    if a.op == ">=":
        return (a.ctype, a.term, a.bound), True
    return (a.ctype, a.term, a.bound + 1), False


def _key_atom(key: tuple, positive: bool) -> MilFormula:
    ctype, term, n = key
    return card(ctype, term, ">=", n) if positive else card(ctype, term, "<=", n - 1)


class _Abstraction:
    def __init__(self):
        self.keys: dict[tuple, str] = {}
        self.back: dict[str, tuple] = {}

    def name(self, key: tuple) -> str:
        if key not in self.keys:
            n = f"c{len(self.keys):04d}"
            self.keys[key] = n
            self.back[n] = key
        return self.keys[key]

    def to_bool(self, f: MilFormula) -> bf.BoolFormula:
        if isinstance(f, Truth):
            return bf.Const(f.value)
        if isinstance(f, Card):
            key, pol = _atom_key(f)
            v = bf.var(self.name(key))
            return v if pol else bf.neg(v)
        if isinstance(f, Not):
            return bf.neg(self.to_bool(f.arg))
        if isinstance(f, And):
            return bf.conj(*(self.to_bool(a) for a in f.args))
        if isinstance(f, Or):
            return bf.disj(*(self.to_bool(a) for a in f.args))
        raise ShapeError(f"not a closed cardinality formula: {mil.render(f)}")

    def from_bool(self, f: bf.BoolFormula) -> MilFormula:
        if isinstance(f, bf.Const):
            return Truth(f.value)
        if isinstance(f, bf.Var):
            return _key_atom(self.back[f.name], True)
        if isinstance(f, bf.Not):
            return neg(self.from_bool(f.arg))
        parts = [self.from_bool(a) for a in f.args]
        return conj(*parts) if isinstance(f, bf.And) else disj(*parts)


def card_dnf(f: MilFormula, cap: int = bf.DNF_CAP) -> list[list[Card]]:
    """Disjuncts of a closed cardinality formula, each a list of atoms.

    Disjuncts that are inconsistent on a single term are dropped.
    """
    ab = _Abstraction()
    g = ab.to_bool(simplify(f))
    out = []
    for m in bf.minterms(g, cap=cap):
        atoms = [_key_atom(ab.back[v.name], pol) for v, pol in sorted(m, key=lambda lit: (lit[0].name, lit[1]))]
        merged = _merge_conj([a for a in atoms if a != TRUE])
        if merged == FALSE:
            continue
        out.append([] if merged == TRUE else list(merged.args) if isinstance(merged, And) else [merged])
    return out


# ---------------------------------------------------------------- vocabulary split


def _vocab(a: Card) -> tuple[str, ...]:
    return tuple(v.name for v in bf.variables(a.term))


def split_vocab(conjuncts: Iterable[MilFormula]) -> list[list[MilFormula]]:
    """Group conjuncts into connected components of shared predicate symbols.

    Atoms with an empty vocabulary (counting the universe) form one part
    per component type.
    """
    items = list(conjuncts)
    parent = list(range(len(items)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: dict = {}
    for idx, a in enumerate(items):
        if isinstance(a, Card):
            names = _vocab(a) or (("", a.ctype),)
        elif isinstance(a, Truth):
            names = (("", "true"),)
        else:
            names = tuple(sorted(p.name for p in mil.predicates(a))) or ((str(a), ""),)
        for n in names:
            if n in owner:
                parent[find(idx)] = find(owner[n])
            else:
                owner[n] = idx
    groups: dict[int, list] = {}
    for idx, a in enumerate(items):
        groups.setdefault(find(idx), []).append(a)
    return [groups[k] for k in sorted(groups)]


# ---------------------------------------------------------------- complete minterms


@dataclass
class Box:
    """Per-minterm count bounds ``lower[S] <= |t_S| <= upper[S]``; ``S`` is a bitmask
    over ``vocab`` and ``None`` stands for infinity."""

    ctype: str
    vocab: tuple
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)

    def feasible(self) -> bool:
        return all(u is None or l <= u for l, u in zip(self.lower, self.upper))

    def contains(self, other: Box) -> bool:
        return all(lo <= lo2 for lo, lo2 in zip(self.lower, other.lower)) and all(
            u is None or (u2 is not None and u2 <= u) for u, u2 in zip(self.upper, other.upper))

    def minterm(self, s: int) -> bf.BoolFormula:
        return bf.conj(*(self._v(k) if s >> k & 1 else bf.neg(self._v(k)) for k in range(len(self.vocab))))

    def _v(self, k: int) -> bf.BoolFormula:
        return bf.var(self.vocab[k], "state", (self.ctype,))

    def as_formula(self) -> MilFormula:
        parts = []
        for s in range(1 << len(self.vocab)):
            parts.extend(_atoms_of_interval(self.ctype, self.minterm(s), self.lower[s], self.upper[s]))
        return conj(*parts)


def term_minterms(term: bf.BoolFormula, vocab: tuple) -> list[int]:
    """Bitmasks ``S`` over ``vocab`` whose complete minterm implies ``term``."""
    out = []
    for s in range(1 << len(vocab)):
        if bf.evaluate(term, frozenset(vocab[k] for k in range(len(vocab)) if s >> k & 1)):
            out.append(s)
    return out


def weak_compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in weak_compositions(total - first, parts - 1):
            yield (first,) + rest


def _reduce_boxes(boxes: list[Box]) -> list[Box]:
    boxes = [b for b in boxes if b.feasible()]
    kept: list[Box] = []
    for b in sorted(boxes, key=lambda b: (sum(b.lower), [(-1 if u is None else u) for u in b.upper]), reverse=False):
        if any(k.contains(b) for k in kept):
            continue
        kept = [k for k in kept if not b.contains(k)]
        kept.append(b)
    kept.sort(key=lambda b: (b.lower, [(-1 if u is None else u) for u in b.upper]))
    return kept


def complete_decompose(atoms: Iterable[Card], vocab: Iterable[str] | None = None, ctype: str | None = None,
                       vocab_cap: int = VOCAB_CAP, composition_cap: int = COMPOSITION_CAP) -> list[Box]:
    """Rewrite a conjunction of atoms as a union of count boxes over complete minterms."""
    atoms = list(atoms)
    if vocab is None:
        vocab = sorted({n for a in atoms for n in _vocab(a)})
    vocab = tuple(vocab)
    if ctype is None:
        types = {a.ctype for a in atoms}
        if len(types) > 1:
            raise ShapeError("conjunction mixes component types")
        ctype = types.pop() if types else ""
    if len(vocab) > vocab_cap:
        raise CapExceeded("vocabulary size", vocab_cap, "complete_decompose")
    size = 1 << len(vocab)
    boxes = [Box(ctype, vocab, [0] * size, [None] * size)]
    made = 0
    for a in atoms:
        if not isinstance(a, Card):
            raise ShapeError(f"complete_decompose expects cardinality atoms, got {mil.render(a)}")
        support = term_minterms(a.term, vocab)
        options = []
        for comp in weak_compositions(a.bound, len(support)):
            made += 1
            if made > composition_cap:
                raise CapExceeded("composition count", composition_cap, "complete_decompose")
            options.append(dict(zip(support, comp)))
        if not options:
            # empty support: |bot| >= n with n > 0 is false, |bot| <= n is true
            if a.op == ">=" and a.bound > 0:
                return []
            continue
        new = []
        for b in boxes:
            for opt in options:
                lower, upper = list(b.lower), list(b.upper)
                for s, v in opt.items():
                    if a.op == ">=":
                        lower[s] = max(lower[s], v)
                    else:
                        upper[s] = v if upper[s] is None else min(upper[s], v)
                cand = Box(ctype, vocab, lower, upper)
                if cand.feasible():
                    new.append(cand)
        boxes = _reduce_boxes(new)
        if not boxes:
            return []
    return boxes


# ---------------------------------------------------------------- positivation


def _antichains(elements: list[int]) -> list[tuple[int, ...]]:
    """Nonempty antichains (under bitmask inclusion) of ``elements``."""
    out = []
    n = len(elements)
    if n > 16:
        raise CapExceeded("antichain candidates", 16, "ppos")
    for pick in range(1, 1 << n):
        chosen = [elements[k] for k in range(n) if pick >> k & 1]
        if all(not (a & b == a or a & b == b) for a, b in itertools.combinations(chosen, 2)):
            out.append(tuple(chosen))
    return out


def ppos(box: Box) -> list[MilFormula]:
    """Positive atoms whose conjunction is the upward closure of ``box``."""
    k = len(box.vocab)
    var = box._v
    lower_support = [s for s in range(1 << k) if box.lower[s] > 0]
    out: list[MilFormula] = []
    for chain in _antichains(lower_support):
        bound = sum(box.lower[s] for s in lower_support if any(t & s == t for t in chain))
        term = bf.disj(*(bf.conj(*(var(b) for b in range(k) if t >> b & 1)) for t in chain))
        out.append(card(box.ctype, term, ">=", bound))
    finite = [s for s in range(1 << k) if box.upper[s] is not None]
    finite_set = set(finite)
    for chain in _antichains(finite):
        down = {s for s in range(1 << k) if any(s & t == s for t in chain)}
        if not down <= finite_set:
            continue
        bound = sum(box.upper[s] for s in down)
        term = bf.disj(*(bf.conj(*(bf.neg(var(b)) for b in range(k) if not (t >> b & 1)))
                         for t in chain))
        out.append(card(box.ctype, term, "<=", bound))
    merged = _merge_conj([a for a in out if a != TRUE])
    if merged == TRUE:
        return []
    if merged == FALSE:
        return [FALSE]
    atoms = list(merged.args) if isinstance(merged, And) else [merged]
    return [a for a in atoms if not any(b is not a and _implies_atom(b, a) for b in atoms)]


def _implies_atom(a: Card, b: Card) -> bool:
    """``a`` entails ``b`` for atoms of one type and direction (strict on ties)."""
    if a.ctype != b.ctype or a.op != b.op or a == b:
        return False
    if a.op == ">=":
        stronger = a.bound >= b.bound and _term_implies(a.term, b.term)
    else:
        stronger = a.bound <= b.bound and _term_implies(b.term, a.term)
    if not stronger:
        return False
    # break ties between equivalent atoms deterministically
    return not (a.bound == b.bound and _term_implies(b.term, a.term) and _term_implies(a.term, b.term)
                and repr(a) > repr(b))


def _term_implies(s: bf.BoolFormula, t: bf.BoolFormula) -> bool:
    return not bf.is_sat(bf.conj(s, bf.neg(t)))[0]


def ppos_card(f: MilFormula, dnf_cap: int = bf.DNF_CAP, vocab_cap: int = VOCAB_CAP) -> MilFormula:
    """Positive closed cardinality formula with the same minimal models as ``f``."""
    if isinstance(f, Truth):
        return f
    disjuncts = []
    for atoms in card_dnf(f, cap=dnf_cap):
        parts = []
        for part in split_vocab(atoms):
            boxes = complete_decompose(part, vocab_cap=vocab_cap)
            parts.append(disj(*(conj(*ppos(b)) for b in boxes)))
        disjuncts.append(conj(*parts))
    return simplify(disj(*disjuncts))


def ppos_formula(f: MilFormula, **caps) -> MilFormula:
    """Positive MIL formula (quantified form) with the same minimal models as ``f``."""
    return card_to_mil(ppos_card(f, **caps))


def _monotone(term: bf.BoolFormula) -> bool:
    return bf.is_positive(term)


def card_dual(f: MilFormula) -> MilFormula:
    """Dual of a positive closed cardinality formula, again as cardinality atoms.

    ``|t| >= n`` (t monotone) becomes ``|not dual(t)| <= n-1``; ``|t| <= n``
    (t antitone) becomes ``|dual(not t)| >= n+1``.
    """
    if isinstance(f, Truth):
        return Truth(not f.value)
    if isinstance(f, And):
        return disj(*(card_dual(a) for a in f.args))
    if isinstance(f, Or):
        return conj(*(card_dual(a) for a in f.args))
    if isinstance(f, Card):
        if f.op == ">=":
            if not _monotone(f.term):
                raise NotPositive(f"non-monotone term in {mil.render(f)}")
            return card(f.ctype, bf.neg(bf.dualize(f.term)), "<=", f.bound - 1)
        flipped = bf.nnf(bf.neg(f.term))
        if not _monotone(flipped):
            raise NotPositive(f"non-antitone term in {mil.render(f)}")
        return card(f.ctype, bf.dualize(flipped), ">=", f.bound + 1)
    raise NotPositive(f"not a positive cardinality formula: {mil.render(f)}")


# ---------------------------------------------------------------- satisfiability


@dataclass(frozen=True)
class SizeSpec:
    """Admissible universe sizes for one component type."""

    minimum: int = 1
    exact: int | None = None


@dataclass
class SatResult:
    sat: bool
    counts: dict = field(default_factory=dict)  # ctype -> {frozenset of true predicates: count}

    def __bool__(self) -> bool:
        return self.sat

    def sizes(self) -> dict[str, int]:
        return {k: sum(v.values()) for k, v in self.counts.items()}

    def structure(self) -> mil.Structure:
        interp: dict[str, set] = {}
        sizes = {}
        for ctype in sorted(self.counts):
            e = 0
            for preds, n in sorted(self.counts[ctype].items(), key=lambda kv: sorted(kv[0])):
                for _ in range(n):
                    e += 1
                    for p in preds:
                        interp.setdefault(p, set()).add(e)
            sizes[ctype] = e
            for p in self.vocab.get(ctype, ()):
                interp.setdefault(p, set())
        return mil.Structure(sizes, {k: frozenset(v) for k, v in interp.items()})

    vocab: dict = field(default_factory=dict)

    def describe(self) -> dict:
        out = {}
        for ctype in sorted(self.counts):
            rows = {}
            for preds, n in sorted(self.counts[ctype].items(), key=lambda kv: sorted(kv[0])):
                if n:
                    rows["{" + ",".join(sorted(preds)) + "}"] = n
            out[ctype] = rows
        return out


class _Theory:
    """Integer feasibility of a set of atom literals over complete-minterm counts."""

    def __init__(self, keys: Iterable[tuple], sizes: Mapping[str, SizeSpec], vocab_cap: int):
        keys = list(keys)
        vocab: dict[str, set] = {k: set() for k in sizes}
        for ctype, term, _ in keys:
            vocab.setdefault(ctype, set()).update(v.name for v in bf.variables(term))
        self.vocab = {k: tuple(sorted(v)) for k, v in vocab.items()}
        for k, v in self.vocab.items():
            if len(v) > vocab_cap:
                raise CapExceeded(f"vocabulary of {k}", vocab_cap, "card_sat")
        self.types = sorted(self.vocab)
        self.offset = {}
        n = 0
        for k in self.types:
            self.offset[k] = n
            n += 1 << len(self.vocab[k])
        self.nvars = n
        self.sizes = {k: sizes.get(k, SizeSpec()) for k in self.types}
        self._rows: dict[tuple, np.ndarray] = {}
        self._cache: dict[frozenset, dict | None] = {}

    def row(self, ctype: str, term: bf.BoolFormula) -> np.ndarray:
        key = (ctype, term)
        if key not in self._rows:
            r = np.zeros(self.nvars)
            for s in term_minterms(term, self.vocab[ctype]):
                r[self.offset[ctype] + s] = 1.0
            self._rows[key] = r
        return self._rows[key]

    def base_constraints(self):
        rows, lo, hi = [], [], []
        for k in self.types:
            r = np.zeros(self.nvars)
            r[self.offset[k]:self.offset[k] + (1 << len(self.vocab[k]))] = 1.0
            spec = self.sizes[k]
            rows.append(r)
            if spec.exact is not None:
                lo.append(spec.exact)
                hi.append(spec.exact)
            else:
                lo.append(spec.minimum)
                hi.append(np.inf)
        return rows, lo, hi

    def check(self, literals: frozenset) -> dict | None:
        if literals in self._cache:
            return self._cache[literals]
        from scipy.optimize import LinearConstraint, milp

        rows, lo, hi = self.base_constraints()
        for (ctype, term, n), pol in sorted(literals, key=repr):
            rows.append(self.row(ctype, term))
            if pol:
                lo.append(n)
                hi.append(np.inf)
            else:
                lo.append(-np.inf)
                hi.append(n - 1)
        if not rows:
            self._cache[literals] = {}
            return {}
        res = milp(c=np.zeros(self.nvars), integrality=np.ones(self.nvars),
                   bounds=(0, np.inf), constraints=LinearConstraint(np.array(rows), lo, hi))
        out = None
        if res.status == 0:
            x = np.rint(res.x).astype(int)
            out = {}
            for k in self.types:
                voc = self.vocab[k]
                out[k] = {frozenset(voc[b] for b in range(len(voc)) if s >> b & 1): int(x[self.offset[k] + s])
                          for s in range(1 << len(voc))}
        self._cache[literals] = out
        return out


def card_sat(f: MilFormula, sizes: Mapping[str, SizeSpec] | None = None, nonempty: bool = True,
             vocab_cap: int = SAT_VOCAB_CAP) -> SatResult:
    """Decide a closed cardinality formula by case splitting on atoms with an
    integer feasibility check over complete-minterm counts.

    ``sizes`` constrains universe sizes per type; types not listed get minimum
    1 when ``nonempty`` is set, else 0.
    """
    ab = _Abstraction()
    g = ab.to_bool(simplify(f))
    spec = dict(sizes or {})
    mentioned = {g.ctype for g in mil.subformulae(f) if isinstance(g, Card)}
    for ctype in sorted(mentioned | {key[0] for key in ab.back.values()}):
        spec.setdefault(ctype, SizeSpec(1 if nonempty else 0))
    theory = _Theory(ab.back.values(), spec, vocab_cap)
    order = {v.name: k for k, v in enumerate(bf.variables(g))}

    def lits_of(assign: dict) -> frozenset:
        return frozenset((ab.back[n], v) for n, v in assign.items())

    def search(h: bf.BoolFormula, assign: dict):
        while True:
            if h == bf.BOT:
                return None
            model = theory.check(lits_of(assign))
            if model is None:
                return None
            if h == bf.TOP:
                return model
            forced = {}
            if isinstance(h, (bf.Var, bf.Not)):
                units = [h]
            elif isinstance(h, bf.And):
                units = [a for a in h.args if isinstance(a, bf.Var) or
                         (isinstance(a, bf.Not) and isinstance(a.arg, bf.Var))]
            else:
                units = []
            for u in units:
                if isinstance(u, bf.Var):
                    forced[u.name] = True
                else:
                    forced[u.arg.name] = False
            if not forced:
                break
            assign = {**assign, **forced}
            h = bf.substitute(h, {n: bf.Const(v) for n, v in forced.items()})
        name = min((v.name for v in bf.variables(h)), key=lambda n: order[n])
        for val in (True, False):
            sub = bf.substitute(h, {name: bf.Const(val)})
            r = search(sub, {**assign, name: val})
            if r is not None:
                return r
        return None

    model = search(g, {})
    if model is None:
        return SatResult(False, vocab=theory.vocab)
    return SatResult(True, model, vocab=theory.vocab)


def eval_counts(f: MilFormula, counts: Mapping[str, Mapping[frozenset, int]]) -> bool:
    """Truth of a closed cardinality formula given complete-minterm counts."""
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Card):
        n = sum(c for preds, c in counts.get(f.ctype, {}).items()
                if bf.evaluate(f.term, frozenset(preds)))
        return n >= f.bound if f.op == ">=" else n <= f.bound
    if isinstance(f, Not):
        return not eval_counts(f.arg, counts)
    if isinstance(f, And):
        return all(eval_counts(a, counts) for a in f.args)
    if isinstance(f, Or):
        return any(eval_counts(a, counts) for a in f.args)
    raise ShapeError(f"not a closed cardinality formula: {mil.render(f)}")
