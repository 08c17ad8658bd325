import random

import pytest
from hypothesis import given

import oracles as O
from qelim_corpus import parametric_systems
from strategies import TYPES, card_formulas, random_card, sentences
from trapinv import boolean as bf
from trapinv import cardinality as cd
from trapinv import mil, petri
from trapinv import system as sm
from trapinv.cardinality import Box, SizeSpec
from trapinv.errors import CapExceeded, NotPositive
from trapinv.mil import IndexVar, PredSymbol

A = "A"
p, q = PredSymbol("p", A, "state"), PredSymbol("q", A, "state")
P, Q = mil.term_var(p), mil.term_var(q)
i1, i2 = IndexVar("i1", A), IndexVar("i2", A)

T, SEM, W = "Task", "Semaphore", "Worker"


def tv(name, ctype):
    return bf.var(name, "state", (ctype,))


def C(ctype, term, op, bound):
    return mil.card(ctype, term, op, bound)


w, u = tv("w", T), tv("u", T)
r, s = tv("r", SEM), tv("s", SEM)
ww, uu = tv("w", W), tv("u", W)


def agree_on_structures(f, g, preds, bound=3, valuation_vars=()):
    for M in O.size_maps(preds, bound):
        for I in O.structures(preds, M):
            for nu in _valuations(valuation_vars, M):
                J = mil.Structure(I.sizes, I.interp, nu)
                if mil.eval_mil(f, J) != mil.eval_mil(g, J):
                    return False
    return True


def _valuations(vs, M):
    import itertools
    vs = list(vs)
    for combo in itertools.product(*[range(1, M[v.ctype] + 1) for v in vs]):
        yield dict(zip(vs, combo))


# ---------------------------------------------------------------- single elimination steps


def test_qelim_exists_equality_case():
    g = cd.qelim_exists(mil.conj(mil.eq(i1, i2), mil.atom(p, i1)), i1)
    assert g == mil.atom(p, i2)


def test_qelim_exists_plain():
    g = cd.qelim_exists(mil.atom(p, i1), i1)
    assert g == C(A, P, ">=", 1)


def test_qelim_exists_disequality():
    g = cd.qelim_exists(mil.conj(mil.neq(i1, i2), mil.atom(p, i1)), i1)
    expected = mil.conj(C(A, P, ">=", 1), mil.implies(mil.atom(p, i2), C(A, P, ">=", 2)))
    assert agree_on_structures(g, expected, {A: ["p"]}, valuation_vars=[i2])
    assert agree_on_structures(g, mil.exists(i1, mil.conj(mil.neq(i1, i2), mil.atom(p, i1))),
                               {A: ["p"]}, valuation_vars=[i2])


def test_qelim_closed_formula_unchanged():
    f = mil.conj(C(A, P, ">=", 2), C(A, bf.conj(P, bf.neg(Q)), "<=", 1))
    assert O.card_equivalent(cd.qelim(f), f)


def test_qelim_output_is_closed():
    for S in parametric_systems():
        f = cd.qelim(mil.conj(sm.trap_constraint_param(S), sm.init_formula_param(S)))
        assert cd.is_closed_card(f)
        assert not mil.free_vars(f)


@given(sentences())
def test_qelim_sound_on_random_sentences(f):
    g = cd.qelim(f)
    assert cd.is_closed_card(g)
    preds = {k: list(v) for k, v in TYPES.items()}
    for M in O.size_maps(preds, 3):
        if M["A"] == 3 and M["B"] == 3:
            continue
        for I in O.structures(preds, M):
            assert mil.eval_mil(f, I) == O.card_value(g, I)


def mutex():
    S = [x for x in parametric_systems() if x.name == "mutex"][0]
    return S, mil.conj(sm.trap_constraint_param(S), sm.init_formula_param(S))


def mutex_structures(max_tasks=3):
    for n in range(1, max_tasks + 1):
        yield from O.structures({SEM: ["r", "s"], T: ["u", "w"]}, {SEM: 1, T: n})


MUTEX_DISJUNCT = mil.conj(C(SEM, r, "<=", 0), C(SEM, s, "<=", 0), C(T, bf.conj(w, bf.neg(u)), "<=", 0),
                          C(T, bf.conj(u, bf.neg(w)), "<=", 0), C(T, w, ">=", 1))
BROADCAST_DISJUNCT = mil.conj(C(W, ww, ">=", 2), C(W, bf.conj(ww, bf.neg(uu)), "<=", 1),
                              C(W, bf.conj(uu, bf.neg(ww)), "<=", 0))


def test_qelim_mutex_contains_worked_disjunct():
    _, f = mutex()
    g = cd.qelim(f)
    hits = 0
    for I in mutex_structures():
        if O.card_value(MUTEX_DISJUNCT, I):
            hits += 1
            assert O.card_value(g, I)
    assert hits > 0


def test_qelim_mutex_keeps_trap_through_r_and_u():
    """{r, u1} is a marked trap with one task, so r ∧ |¬u| ≤ 0 ∧ |w| ≤ 0 must satisfy the result."""
    S, f = mutex()
    g = cd.qelim(f)
    I = mil.Structure({SEM: 1, T: 1}, {"r": frozenset({1}), "s": frozenset(), "u": frozenset({1}),
                                      "w": frozenset()})
    assert O.card_value(g, I)
    N = petri.build_pn(S.bounded({T: 1}))
    assert N.mask(["r[1]", "u[1]"]) in petri.marked_traps(N)


def test_qelim_broadcast_matches_worked_output():
    S = [x for x in parametric_systems() if x.name == "broadcast-2"][0]
    g = cd.qelim(mil.conj(sm.trap_constraint_param(S), sm.init_formula_param(S)))
    expected = mil.disj(
        mil.conj(C(W, ww, ">=", 3), C(W, bf.conj(uu, bf.neg(ww)), "<=", 0)),
        BROADCAST_DISJUNCT,
        mil.conj(C(W, bf.neg(uu), "<=", 1), C(W, bf.conj(bf.neg(uu), bf.neg(ww)), "<=", 0),
                 C(W, bf.conj(uu, bf.neg(ww)), "<=", 0), C(W, ww, ">=", 1)),
        mil.conj(C(W, bf.conj(ww, bf.neg(uu)), "<=", 0), C(W, bf.conj(uu, bf.neg(ww)), "<=", 0), C(W, ww, ">=", 1)))
    assert O.card_equivalent(g, expected, cap=4)


# ---------------------------------------------------------------- split and decompose


def test_split_vocab_disjoint():
    parts = cd.split_vocab([C(T, w, ">=", 1), C(SEM, bf.conj(r, s), "<=", 0)])
    assert len(parts) == 2


def test_split_vocab_single_atom():
    assert cd.split_vocab([C(T, w, ">=", 1)]) == [[C(T, w, ">=", 1)]]


def test_split_vocab_mutex_disjunct():
    parts = cd.split_vocab(list(MUTEX_DISJUNCT.args))
    vocabs = sorted(tuple(sorted({v.name for a in part for v in bf.variables(a.term)})) for part in parts)
    assert vocabs == [("r",), ("s",), ("u", "w")]


def test_split_vocab_keeps_universe_atoms_per_type():
    parts = cd.split_vocab([C(T, bf.TOP, ">=", 2), C(SEM, bf.TOP, "<=", 1), C(T, bf.TOP, "<=", 3)])
    assert sorted(len(x) for x in parts) == [1, 2]


def test_decompose_single_predicate():
    boxes = cd.complete_decompose([C(A, P, ">=", 1)])
    assert len(boxes) == 1
    assert boxes[0].vocab == ("p",) and boxes[0].lower == [0, 1]


def test_decompose_two_minterm_support():
    boxes = cd.complete_decompose([C(T, w, ">=", 1)], vocab=("u", "w"))
    # S ranges over {w} (bit 1) and {u, w} (bits 0 and 1)
    assert sorted(tuple(b.lower) for b in boxes) == [(0, 0, 0, 1), (0, 0, 1, 0)]


def test_decompose_trivial_bound():
    boxes = cd.complete_decompose([], vocab=("p",), ctype=A)
    assert len(boxes) == 1 and boxes[0].lower == [0, 0] and boxes[0].upper == [None, None]


def test_decompose_composition_cap():
    with pytest.raises(CapExceeded):
        cd.complete_decompose([C(A, bf.disj(P, Q), ">=", 40)], composition_cap=100)


@pytest.mark.parametrize("seed", range(25))
def test_decompose_preserves_counts(seed):
    rng = random.Random(seed)
    vocab = ("p", "q")
    atoms = []
    for _ in range(rng.randint(1, 3)):
        from strategies import random_term
        a = mil.card(A, random_term(rng, A, vocab, 2), rng.choice([">=", "<="]), rng.randint(0, 3))
        if isinstance(a, mil.Card):
            atoms.append(a)
    boxes = cd.complete_decompose(atoms, vocab=vocab, ctype=A)
    union = mil.disj(*(b.as_formula() for b in boxes))
    assert O.card_equivalent(union, mil.conj(*atoms), cap=4)


def test_complete_minterms_are_incompatible():
    box = Box(A, ("p", "q", "x"), [0] * 8, [None] * 8)
    for s in range(8):
        for t in range(8):
            if s != t:
                assert not bf.is_sat(bf.conj(box.minterm(s), box.minterm(t)))[0]
                assert not O.models(bf.conj(box.minterm(s), box.minterm(t)), ["p", "q", "x"])


# ---------------------------------------------------------------- positivation


def test_ppos_mutex_worked_example():
    g = cd.ppos_card(MUTEX_DISJUNCT)
    assert O.card_equivalent(g, C(T, bf.conj(u, w), ">=", 1))


def test_ppos_broadcast_worked_example():
    g = cd.ppos_card(BROADCAST_DISJUNCT)
    assert O.card_equivalent(g, mil.conj(C(W, ww, ">=", 2), C(W, bf.conj(uu, ww), ">=", 1)))


def test_ppos_of_positive_box_keeps_lower_bounds():
    box = Box(A, ("p", "q"), [0, 2, 0, 1], [None] * 4)
    g = mil.conj(*cd.ppos(box))
    assert O.card_equivalent(g, mil.conj(C(A, P, ">=", 3), C(A, bf.conj(P, Q), ">=", 1)))


def test_ppos_formula_of_false_and_single_atom():
    assert cd.ppos_formula(mil.FALSE) == mil.FALSE
    g = cd.ppos_formula(C(T, w, ">=", 1))
    assert agree_on_structures(g, mil.exists(IndexVar("i", T), mil.atom(PredSymbol("w", T, "state"),
                                                                         IndexVar("i", T))), {T: ["w"]})


CARD_PREDS = {"A": ["p", "q"], "B": ["r"]}


def minimal_on_structures(f, g, preds, bound=3):
    for M in O.size_maps(preds, bound):
        A_, B_ = set(), set()
        for I in O.structures(preds, M):
            m = O.encode(I, preds)
            if O.card_value(f, I):
                A_.add(m)
            if O.card_value(g, I):
                B_.add(m)
        if O.minimal_masks(A_) != O.minimal_masks(B_):
            return False
    return True


@given(card_formulas({"A": ("p", "q"), "B": ("r",)}, max_bound=2))
def test_ppos_is_positive_and_preserves_minimal_models(f):
    g = cd.ppos_card(f)
    assert mil.is_positive(g)
    assert mil.is_positive(cd.ppos_formula(f))
    assert minimal_on_structures(f, g, CARD_PREDS)


@given(card_formulas({"A": ("p", "q"), "B": ("r",)}, max_bound=2))
def test_ppos_is_upward_closed(f):
    g = cd.ppos_card(f)
    preds = CARD_PREDS
    for M in O.size_maps(preds, 2):
        models = {O.encode(I, preds) for I in O.structures(preds, M) if O.card_value(g, I)}
        nbits = sum(len(preds[k]) * M[k] for k in preds)
        for m in models:
            for bit in range(nbits):
                assert m | (1 << bit) in models


# ---------------------------------------------------------------- dual


@given(card_formulas({"A": ("p", "q"), "B": ("r",)}, max_bound=2))
def test_card_dual_matches_mil_dual(f):
    g = cd.ppos_card(f)
    d = cd.card_dual(g)
    md = mil.mil_dual(mil.card_to_mil(g))
    preds = CARD_PREDS
    for M in O.size_maps(preds, 2):
        for I in O.structures(preds, M):
            assert O.card_value(d, I) == mil.eval_mil(md, I)


def test_card_dual_rejects_non_monotone():
    with pytest.raises(NotPositive):
        cd.card_dual(C(A, bf.neg(P), ">=", 1))


# ---------------------------------------------------------------- simplify and dnf


@given(card_formulas(max_bound=3))
def test_simplify_preserves_meaning(f):
    assert O.card_equivalent(cd.simplify(f), f)


@given(card_formulas(max_bound=3))
def test_card_dnf_preserves_meaning(f):
    g = mil.disj(*(mil.conj(*atoms) for atoms in cd.card_dnf(f)))
    assert O.card_equivalent(g, f)


# ---------------------------------------------------------------- satisfiability


def test_card_sat_examples():
    assert not cd.card_sat(mil.conj(C(A, P, ">=", 1), C(A, P, "<=", 0)))
    res = cd.card_sat(C(A, P, ">=", 2))
    assert res.sat and res.counts[A][frozenset({"p"})] >= 2
    assert O.card_value(C(A, P, ">=", 2), res.structure())


def test_card_sat_respects_sizes():
    f = C(A, P, ">=", 2)
    assert not cd.card_sat(f, {A: SizeSpec(1, 1)})
    assert cd.card_sat(f, {A: SizeSpec(2, 2)}).sizes() == {A: 2}
    assert cd.card_sat(mil.TRUE, {A: SizeSpec(3)}).sat
    assert not cd.card_sat(C(A, bf.TOP, "<=", 1), {A: SizeSpec(2)})


def test_card_sat_nonempty_flag():
    f = C(A, P, "<=", 0)
    assert cd.card_sat(f, nonempty=False).sat
    assert cd.card_sat(C(A, bf.TOP, "<=", 0), nonempty=False).sat
    assert not cd.card_sat(C(A, bf.TOP, "<=", 0), nonempty=True).sat


def test_card_sat_vocabulary_cap():
    term = bf.conj(*(tv(f"x{k}", A) for k in range(6)))
    with pytest.raises(CapExceeded):
        cd.card_sat(C(A, term, ">=", 1), vocab_cap=4)


@given(card_formulas({"A": ("p", "q"), "B": ("r", "x")}, max_bound=3))
def test_card_sat_agrees_with_enumeration(f):
    res = cd.card_sat(f)
    assert res.sat == O.enumerate_sat(f)
    if res.sat:
        assert O.card_value(f, res.structure())
        assert all(n >= 1 for n in res.sizes().values())


def test_eval_counts_matches_structures():
    rng = random.Random(7)
    for _ in range(30):
        f = random_card(rng, {"A": ("p", "q")}, 2)
        res = cd.card_sat(f)
        if res.sat:
            assert cd.eval_counts(f, res.counts) == O.card_value(f, res.structure()) is True
