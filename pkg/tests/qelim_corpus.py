"""MIL sentences used by the quantifier elimination and positivation checks."""
from __future__ import annotations

from pathlib import Path

from trapinv import boolean as bf
from trapinv import mil
from trapinv import system as sm
from trapinv.mil import IndexVar, PredSymbol
from trapinv.parser import load_system
from trapinv.pipeline import corpus_path


def parametric_systems():
    files = sorted(corpus_path("benchmarks").glob("*.sys")) + sorted(corpus_path("parametric").glob("*.sys"))
    return [load_system(f) for f in files]


W = "Worker"
w, u = PredSymbol("w", W, "state"), PredSymbol("u", W, "state")
i, i1, i2, j, k = (IndexVar(n, W) for n in ("i", "i1", "i2", "j", "k"))


def broadcast_trap_as_printed():
    """The broadcast trap constraint written out by hand, consequent guard included."""
    def side(p):
        return mil.disj(mil.atom(p, i1), mil.atom(p, i2),
                        mil.exists(j, mil.conj(mil.neq(j, i1), mil.neq(j, i2), mil.atom(w, j))))
    first = mil.forall([i1, i2], mil.implies(mil.conj(mil.neq(i1, i2), side(w)),
                                             mil.conj(mil.neq(i1, i2), side(u))))
    return mil.conj(first, mil.forall(i, mil.implies(mil.atom(u, i), mil.atom(w, i))))


def hand_written():
    return [
        ("exists w", mil.exists(i, mil.atom(w, i))),
        ("forall w or u", mil.forall(i, mil.disj(mil.atom(w, i), mil.atom(u, i)))),
        ("two distinct w", mil.exists([i, j], mil.conj(mil.neq(i, j), mil.atom(w, i), mil.atom(w, j)))),
        ("every w has another w", mil.forall(i, mil.implies(mil.atom(w, i),
                                                            mil.exists(j, mil.conj(mil.neq(i, j), mil.atom(w, j)))))),
        ("at most one u", mil.forall([i, j], mil.implies(mil.conj(mil.atom(u, i), mil.atom(u, j)), mil.eq(i, j)))),
        ("exactly one w", mil.exists(i, mil.conj(mil.atom(w, i),
                                                  mil.forall(j, mil.implies(mil.atom(w, j), mil.eq(i, j)))))),
        ("three distinct", mil.exists([i, j, k], mil.conj(mil.distinct(i, j, k), mil.atom(w, i),
                                                       mil.neg(mil.atom(u, j)), mil.atom(u, k)))),
        ("u implies w somewhere else", mil.forall(i, mil.disj(mil.neg(mil.atom(u, i)),
                                                             mil.exists(j, mil.conj(mil.neq(i, j), mil.atom(w, j),
                                                                                    mil.neg(mil.atom(u, j))))))),
        ("equality case", mil.forall(i2, mil.exists(i1, mil.conj(mil.eq(i1, i2), mil.disj(mil.atom(w, i1),
                                                                                           mil.neg(mil.atom(u, i2))))))),
        ("nested alternation", mil.forall(i, mil.exists(j, mil.forall(k, mil.disj(
            mil.conj(mil.atom(w, i), mil.neg(mil.atom(w, j))), mil.eq(k, j), mil.atom(u, k)))))),
        ("mixed card", mil.conj(mil.card(W, bf.conj(mil.term_var(w), bf.neg(mil.term_var(u))), "<=", 1),
                                mil.exists(i, mil.atom(u, i)))),
        ("broadcast trap as printed", broadcast_trap_as_printed()),
    ]


def corpus() -> list[tuple[str, mil.MilFormula]]:
    items = []
    for S in parametric_systems():
        trap = sm.trap_constraint_param(S)
        items.append((f"{S.name} trap", trap))
        items.append((f"{S.name} trap and init", mil.conj(trap, sm.init_formula_param(S))))
        items.append((f"{S.name} deadlock", sm.deadlock_formula_param(S)))
    items.extend(hand_written())
    return items
