"""SMT-LIB2 export of closed cardinality formulae and propositional formulae.

Output is deterministic: declarations are sorted and the formula is printed
in a fixed traversal order.
"""
from __future__ import annotations

import re
from typing import Mapping

from . import boolean as bf
from . import mil
from .cardinality import SizeSpec, term_minterms
from .errors import ShapeError
from .mil import And, Card, MilFormula, Not, Or, Truth

SETS_LOGIC = "QF_UFLIAFS"
_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*$")


def symbol(s: str) -> str:
    return s if _SIMPLE.match(s) else "|" + s.replace("|", "_").replace("\\", "_") + "|"


def _vocabularies(f: MilFormula, sizes: Mapping[str, SizeSpec]) -> dict[str, tuple[str, ...]]:
    vocab: dict[str, set] = {k: set() for k in sizes}
    for g in mil.subformulae(f):
        if isinstance(g, Card):
            vocab.setdefault(g.ctype, set()).update(v.name for v in bf.variables(g.term))
        elif not isinstance(g, (Truth, And, Or, Not)):
            raise ShapeError(f"not a closed cardinality formula: {mil.render(g)}")
    return {k: tuple(sorted(v)) for k, v in sorted(vocab.items())}


def _size_specs(vocab, sizes, nonempty) -> dict[str, SizeSpec]:
    return {k: sizes.get(k, SizeSpec(1 if nonempty else 0)) for k in vocab}


def _sexpr(f: MilFormula, atom) -> str:
    if isinstance(f, Truth):
        return "true" if f.value else "false"
    if isinstance(f, Card):
        return atom(f)
    if isinstance(f, Not):
        return f"(not {_sexpr(f.arg, atom)})"
    if isinstance(f, (And, Or)):
        op = "and" if isinstance(f, And) else "or"
        return f"({op} " + " ".join(_sexpr(a, atom) for a in f.args) + ")"
    raise ShapeError(f"not a closed cardinality formula: {mil.render(f)}")


def _sum(terms: list[str]) -> str:
    if not terms:
        return "0"
    if len(terms) == 1:
        return terms[0]
    return "(+ " + " ".join(terms) + ")"


def _cmp(f: Card, lhs: str) -> str:
    return f"({f.op} {lhs} {f.bound})"


def count_name(ctype: str, vocab: tuple[str, ...], s: int) -> str:
    bits = "".join("1" if s >> k & 1 else "0" for k in range(len(vocab)))
    return symbol(f"n_{ctype}_{bits}" if vocab else f"n_{ctype}")


def emit_lia(f: MilFormula, sizes: Mapping[str, SizeSpec] | None = None, nonempty: bool = True,
             get_model: bool = False) -> str:
    """QF_LIA script over one count per complete minterm of each type's vocabulary."""
    sizes = dict(sizes or {})
    vocab = _vocabularies(f, sizes)
    specs = _size_specs(vocab, sizes, nonempty)
    lines = ["(set-logic QF_LIA)"]
    for k, voc in vocab.items():
        lines.append(f"; {k}: minterm bits over ({' '.join(voc)})")
        for s in range(1 << len(voc)):
            lines.append(f"(declare-const {count_name(k, voc, s)} Int)")
    side = []
    for k, voc in vocab.items():
        names = [count_name(k, voc, s) for s in range(1 << len(voc))]
        side.extend(f"(>= {n} 0)" for n in names)
        spec = specs[k]
        total = _sum(names)
        if spec.exact is not None:
            side.append(f"(= {total} {spec.exact})")
        elif spec.minimum > 0:
            side.append(f"(>= {total} {spec.minimum})")

    def atom(a: Card) -> str:
        voc = vocab[a.ctype]
        return _cmp(a, _sum([count_name(a.ctype, voc, s) for s in term_minterms(a.term, voc)]))

    body = _sexpr(f, atom)
    lines.append("(assert (and " + " ".join(side + [body]) + "))")
    lines.append("(check-sat)")
    if get_model:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"


def emit_sets(f: MilFormula, sizes: Mapping[str, SizeSpec] | None = None, nonempty: bool = True,
              get_model: bool = False) -> str:
    """Finite-set script: one element sort and universe per type, one set per predicate."""
    sizes = dict(sizes or {})
    vocab = _vocabularies(f, sizes)
    specs = _size_specs(vocab, sizes, nonempty)
    lines = [f"(set-logic {SETS_LOGIC})"]
    side = []
    for k, voc in vocab.items():
        sort = symbol(f"{k}_E")
        universe = symbol(f"U_{k}")
        lines.append(f"(declare-sort {sort} 0)")
        lines.append(f"(declare-const {universe} (Set {sort}))")
        for p in voc:
            lines.append(f"(declare-const {symbol(f'{k}.{p}')} (Set {sort}))")
            side.append(f"(set.subset {symbol(f'{k}.{p}')} {universe})")
        spec = specs[k]
        if spec.exact is not None:
            side.append(f"(= (set.card {universe}) {spec.exact})")
        elif spec.minimum > 0:
            side.append(f"(>= (set.card {universe}) {spec.minimum})")

    def term(t: bf.BoolFormula, k: str) -> str:
        sort = symbol(f"{k}_E")
        universe = symbol(f"U_{k}")
        if isinstance(t, bf.Const):
            return universe if t.value else f"(as set.empty (Set {sort}))"
        if isinstance(t, bf.Var):
            return symbol(f"{k}.{t.name}")
        if isinstance(t, bf.Not):
            return f"(set.minus {universe} {term(t.arg, k)})"
        op = "set.inter" if isinstance(t, bf.And) else "set.union"
        parts = [term(a, k) for a in t.args]
        out = parts[0]
        for p in parts[1:]:
            out = f"({op} {out} {p})"
        return out

    def atom(a: Card) -> str:
        return _cmp(a, f"(set.card {term(a.term, a.ctype)})")

    body = _sexpr(f, atom)
    lines.append("(assert (and " + " ".join(side + [body]) + "))")
    lines.append("(check-sat)")
    if get_model:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"


def emit_smtlib(f: MilFormula, theory: str = "lia", sizes: Mapping[str, SizeSpec] | None = None,
                nonempty: bool = True, get_model: bool = False) -> str:
    if theory == "lia":
        return emit_lia(f, sizes, nonempty, get_model)
    if theory == "sets":
        return emit_sets(f, sizes, nonempty, get_model)
    raise ValueError(f"unknown theory {theory!r}")


def emit_propositional(f: bf.BoolFormula, get_model: bool = False) -> str:
    """Core-theory script with one Bool constant per variable."""
    lines = ["(set-logic QF_UF)"]
    for v in bf.variables(f):
        lines.append(f"(declare-const {symbol(v.name)} Bool)")

    def go(g: bf.BoolFormula) -> str:
        if isinstance(g, bf.Const):
            return "true" if g.value else "false"
        if isinstance(g, bf.Var):
            return symbol(g.name)
        if isinstance(g, bf.Not):
            return f"(not {go(g.arg)})"
        op = "and" if isinstance(g, bf.And) else "or"
        return f"({op} " + " ".join(go(a) for a in g.args) + ")"

    lines.append(f"(assert {go(f)})")
    lines.append("(check-sat)")
    if get_model:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"
