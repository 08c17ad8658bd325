import pytest
from hypothesis import given, settings

import oracles as O
from qelim_corpus import parametric_systems
from strategies import TYPES, random_sentence, sentences
from trapinv import boolean as bf
from trapinv import mil
from trapinv import pipeline as pl
from trapinv import system as sm
from trapinv.errors import CapExceeded, NotPositive, TypeMismatch, UnboundVariable
from trapinv.mil import IndexVar, PredSymbol, Structure

T, SEM = "Task", "Semaphore"
w, u, b = (PredSymbol(n, T, k) for n, k in (("w", "state"), ("u", "state"), ("b", "port")))
r, s = PredSymbol("r", SEM, "state"), PredSymbol("s", SEM, "state")
i, j, i1, i2 = (IndexVar(n, T) for n in ("i", "j", "i1", "i2"))


def unfolded_equal(f, names, expected):
    return O.same_models(f, expected, names)


def test_eval_exists():
    I = Structure({T: 2}, {"w": frozenset({1})})
    assert mil.eval_mil(mil.exists(i, mil.atom(w, i)), I)


def test_eval_distinct_same_element():
    I = Structure({T: 2}, {}, {i1: 1, i2: 1})
    assert not mil.eval_mil(mil.distinct(i1, i2), I)


def test_eval_unbound_free_variable():
    with pytest.raises(UnboundVariable):
        mil.eval_mil(mil.atom(w, i), Structure({T: 2}, {}))


def test_atom_type_mismatch():
    with pytest.raises(TypeMismatch):
        mil.atom(r, i)
    with pytest.raises(TypeMismatch):
        mil.eq(i, IndexVar("k", SEM))


def test_eval_mutex_trap_constraint_against_oracle():
    from trapinv import petri
    S = parametric_systems()[-2]
    assert S.name == "mutex"
    f = mil.conj(sm.trap_constraint_param(S), sm.init_formula_param(S))
    N = petri.build_pn(S.bounded({T: 2}))
    marked = set(petri.marked_traps(N))
    # {r, u1, u2} is a marked trap; {r, w1, w2} is not, since a with b(1) empties r and w1
    for interp, places in [({"r": {1}, "u": {1, 2}}, ["r[1]", "u[1]", "u[2]"]),
                           ({"r": {1}, "w": {1, 2}}, ["r[1]", "w[1]", "w[2]"])]:
        I = Structure({SEM: 1, T: 2}, {n: frozenset(interp.get(n, ())) for n in "rsuw"})
        assert mil.eval_mil(f, I) == (N.mask(places) in marked)
    assert N.mask(["r[1]", "u[1]", "u[2]"]) in marked
    assert N.mask(["r[1]", "w[1]", "w[2]"]) not in marked


# ---------------------------------------------------------------- unfold


def test_unfold_exists():
    g = mil.unfold(mil.exists(i, mil.atom(b, i)), {T: 2})
    assert unfolded_equal(g, ["b[1]", "b[2]"], bf.disj(bf.var("b[1]"), bf.var("b[2]")))


def test_unfold_forall():
    g = mil.unfold(mil.forall(i, mil.atom(w, i)), {T: 3})
    assert unfolded_equal(g, [], bf.conj(*(bf.var(f"w[{k}]") for k in (1, 2, 3))))


def test_unfold_parametric_mutex_interaction():
    S = parametric_systems()[-2]
    g = mil.unfold(S.interaction(), {SEM: 1, T: 2})
    a, e = bf.var("a[1]"), bf.var("e[1]")
    expected = bf.disj(bf.conj(a, bf.var("b[1]")), bf.conj(a, bf.var("b[2]")),
                       bf.conj(e, bf.var("f[1]")), bf.conj(e, bf.var("f[2]")))
    assert unfolded_equal(g, [], expected)


def test_unfold_equalities_fold_to_constants():
    f = mil.forall([i, j], mil.disj(mil.eq(i, j), mil.neg(mil.conj(mil.atom(w, i), mil.atom(w, j)))))
    g = mil.unfold(f, {T: 2})
    assert unfolded_equal(g, [], bf.neg(bf.conj(bf.var("w[1]"), bf.var("w[2]"))))


def corpus_sentences():
    out = []
    for S in parametric_systems():
        out.append(mil.conj(sm.trap_constraint_param(S), sm.init_formula_param(S)))
        out.append(sm.deadlock_formula_param(S))
    return out


def test_model_correspondence_on_corpus():
    checked = 0
    for f in corpus_sentences():
        preds = O.pred_table(f)
        for M in O.size_maps(preds, 2):
            g = mil.unfold(f, M)
            for I in O.structures(preds, M):
                beta = {mil.place_name(p, e) for p, ext in I.interp.items() for e in ext}
                assert mil.eval_mil(f, I) == O.bool_eval(g, beta)
                checked += 1
    assert checked > 1000


def test_minimal_model_correspondence_on_corpus():
    for f in corpus_sentences():
        preds = O.pred_table(f)
        for M in O.size_maps(preds, 2):
            g = mil.unfold(f, M)
            names = [mil.place_name(p, e) for k in sorted(preds) for p in preds[k] for e in range(1, M[k] + 1)]
            structural = set()
            for I in O.structures(preds, M):
                if mil.eval_mil(f, I):
                    structural.add(mil.structure_to_valuation(I))
            assert O.minimal_sets(structural) == O.minimal_sets(O.models(g, names))
            assert mil.minimal_structures(f, [PredSymbol(p, k, "state") for k in preds for p in preds[k]], M) == \
                {I.key() for I in O.structures(preds, M)
                 if mil.structure_to_valuation(I) in O.minimal_sets(structural)}


@given(sentences())
def test_model_correspondence_random(f):
    preds = {k: list(v) for k, v in TYPES.items()}
    for M in O.size_maps(preds, 2):
        g = mil.unfold(f, M)
        for I in O.structures(preds, M):
            beta = {mil.place_name(p, e) for p, ext in I.interp.items() for e in ext}
            assert mil.eval_mil(f, I) == O.bool_eval(g, beta)


# ---------------------------------------------------------------- dual


def test_dual_single_rule():
    assert mil.mil_dual(mil.exists(i, mil.atom(u, i))) == mil.forall(i, mil.atom(u, i))


def test_dual_rejects_non_positive():
    with pytest.raises(NotPositive):
        mil.mil_dual(mil.exists(i, mil.neg(mil.atom(u, i))))


def test_dual_swaps_equalities():
    f = mil.exists([i, j], mil.conj(mil.neq(i, j), mil.atom(w, i), mil.atom(w, j)))
    assert mil.mil_dual(f) == mil.forall([i, j], mil.disj(mil.eq(i, j), mil.atom(w, i), mil.atom(w, j)))


def positive_sentence(seed):
    import random
    rng = random.Random(seed)
    while True:
        f = random_sentence(rng)
        if mil.is_positive(f) and not any(isinstance(g, mil.Card) for g in mil.subformulae(f)):
            return f


@pytest.mark.parametrize("seed", range(40))
def test_dual_involution_and_positivity(seed):
    f = positive_sentence(seed)
    d = mil.mil_dual(f)
    assert mil.is_positive(d)
    assert mil.nnf(mil.mil_dual(d)) == mil.nnf(f)


@pytest.mark.parametrize("seed", range(20))
def test_dual_commutes_with_unfolding(seed):
    f = positive_sentence(seed)
    for M in O.size_maps(TYPES, 2):
        g = mil.unfold(f, M)
        assert O.same_models(mil.unfold(mil.mil_dual(f), M), bf.dualize(bf.nnf(g)))


def test_mutex_parametric_invariant():
    """(r∨s) ∧ ∀i.(w(i)∨u(i)) ∧ (r∨∃i.u(i)) ∧ (s∨∃i.w(i)), Semaphore a singleton."""
    S = parametric_systems()[-2]
    inv = pl.parametric_invariant_mil(S)
    k = IndexVar("k", SEM)
    R, Sx = mil.exists(k, mil.atom(r, k)), mil.exists(k, mil.atom(s, k))
    expected = mil.conj(mil.disj(R, Sx), mil.forall(i, mil.disj(mil.atom(w, i), mil.atom(u, i))),
                        mil.disj(R, mil.exists(i, mil.atom(u, i))), mil.disj(Sx, mil.exists(i, mil.atom(w, i))))
    preds = {SEM: ["r", "s"], T: ["u", "w"]}
    for n in (1, 2, 3):
        for I in O.structures(preds, {SEM: 1, T: n}):
            assert mil.eval_mil(inv, I) == mil.eval_mil(expected, I)


# ---------------------------------------------------------------- prenex


def test_prenex_pulls_quantifiers():
    f = mil.disj(mil.exists(i, mil.atom(b, i)), mil.exists(j, mil.atom(w, j)))
    g = mil.prenex(f)
    assert [q for q, _ in mil.quantifier_prefix(g)] == ["exists", "exists"]
    for I in O.structures({T: ["b", "w"]}, {T: 2}):
        assert mil.eval_mil(f, I) == mil.eval_mil(g, I)


def test_prenex_negated_exists():
    g = mil.prenex(mil.neg(mil.exists(i, mil.atom(w, i))))
    assert g == mil.forall(i, mil.neg(mil.atom(w, i)))


def test_prenex_broadcast_trap_constraint():
    S = parametric_systems()[3]
    assert S.name == "broadcast-2"
    f = sm.trap_constraint_param(S)
    g = mil.prenex(f)
    kinds = [q for q, _ in mil.quantifier_prefix(g)]
    assert kinds[:2] == ["forall", "forall"] and "exists" in kinds
    assert mil.is_quantifier_free(_matrix(g))
    for I in O.structures({"Worker": ["u", "w"]}, {"Worker": 3}):
        assert mil.eval_mil(f, I) == mil.eval_mil(g, I)


def _matrix(f):
    while isinstance(f, (mil.Exists, mil.Forall)):
        f = f.body
    return f


@given(sentences())
def test_prenex_preserves_models(f):
    g = mil.prenex(f)
    assert mil.is_sentence(g) and mil.is_quantifier_free(_matrix(g))
    for M in O.size_maps(TYPES, 2):
        for I in O.structures({k: list(v) for k, v in TYPES.items()}, M):
            assert mil.eval_mil(f, I) == mil.eval_mil(g, I)


@given(sentences())
def test_nnf_preserves_models(f):
    g = mil.nnf(f)
    for I in O.structures({k: list(v) for k, v in TYPES.items()}, {"A": 2, "B": 1}):
        assert mil.eval_mil(f, I) == mil.eval_mil(g, I)


# ---------------------------------------------------------------- enumeration and cardinality


def test_enumerate_structures_counts():
    one = [PredSymbol("p", "A", "state")]
    two = one + [PredSymbol("q", "A", "state")]
    assert len(list(mil.enumerate_structures(one, {"A": 1}))) == 2
    assert len(list(mil.enumerate_structures(two, {"A": 2}, exact=True))) == 16
    assert mil.structure_count(two, {"A": 2}, exact=True) == 16
    keys = [I.key() for I in mil.enumerate_structures(two, {"A": 2})]
    assert len(keys) == len(set(keys)) == 4 + 16


def test_enumerate_structures_cap():
    preds = [PredSymbol(n, "A", "state") for n in "pqrs"]
    with pytest.raises(CapExceeded):
        list(mil.enumerate_structures(preds, {"A": 6}, bound=1000))


def test_card_to_mil_examples():
    pt = mil.term_var(w)
    assert mil.card(T, pt, ">=", None) == mil.FALSE
    f = mil.card_to_mil(mil.card(T, pt, ">=", 1))
    g = mil.card_to_mil(mil.card(T, pt, "<=", 0))
    for I in O.structures({T: ["w"]}, {T: 3}):
        assert mil.eval_mil(f, I) == mil.eval_mil(mil.exists(i, mil.atom(w, i)), I)
        assert mil.eval_mil(g, I) == mil.eval_mil(mil.forall(i, mil.neg(mil.atom(w, i))), I)


@pytest.mark.parametrize("op,bound", [(">=", 0), (">=", 1), (">=", 2), (">=", 3), ("<=", 0), ("<=", 1), ("<=", 2)])
def test_card_to_mil_counts(op, bound):
    term = bf.conj(mil.term_var(w), bf.neg(mil.term_var(u)))
    a = mil.card(T, term, op, bound)
    f = mil.card_to_mil(a)
    for n in (1, 2, 3):
        for I in O.structures({T: ["u", "w"]}, {T: n}):
            assert mil.eval_mil(f, I) == O.card_value(a, I)


def test_structure_order():
    small = Structure({T: 2}, {"w": frozenset({1})})
    big = Structure({T: 2}, {"w": frozenset({1, 2}), "u": frozenset({2})})
    assert small.leq(big) and not big.leq(small)
