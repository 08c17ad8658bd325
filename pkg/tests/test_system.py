import pytest

import oracles as O
from qelim_corpus import parametric_systems
from trapinv import boolean as bf
from trapinv import mil, petri
from trapinv import pipeline as pl
from trapinv import system as sm
from trapinv.errors import InputError, NotPositive
from trapinv.mil import IndexVar, PredSymbol
from trapinv.parser import load_system, parse_system
from trapinv.system import ComponentType

SEM = ComponentType("Semaphore", ("a", "e"), ("r", "s"), "r", (("r", "a", "s"), ("s", "e", "r")))
TASK = ComponentType("Task", ("b", "f"), ("w", "u"), "w", (("w", "b", "u"), ("u", "f", "w")))


def V(name):
    return bf.var(name)


def mutex2():
    return load_system(pl.corpus_path("bounded", "mutex-2.sys")).bounded()


def param(name):
    return [S for S in parametric_systems() if S.name == name][0]


# ---------------------------------------------------------------- component types


def test_pre_post():
    assert sm.pre_post(SEM, "a") == ("r", "s")
    assert sm.pre_post(TASK, "f") == ("u", "w")
    idle = ComponentType("Idle", ("x",), ("q",), "q", ())
    assert idle.pre_post("x") == (None, None)
    with pytest.raises(InputError):
        TASK.pre_post("zz")


@pytest.mark.parametrize("kwargs", [
    dict(init="zz"),
    dict(transitions=(("w", "b", "u"), ("u", "b", "w"))),
    dict(transitions=(("w", "c", "u"),)),
    dict(transitions=(("w", "b", "nowhere"),)),
    dict(ports=("b", "b")),
    dict(ports=("b", "w")),
])
def test_component_type_validation(kwargs):
    base = dict(name="T", ports=("b", "f"), states=("w", "u"), init="w", transitions=())
    base.update(kwargs)
    with pytest.raises(InputError):
        ComponentType(**base)


def test_bounded_system_rejects_negative_interaction():
    with pytest.raises(NotPositive):
        sm.BoundedSystem("x", {"Task": TASK}, {"Task": 1}, bf.neg(V("b[1]")))


def test_bounded_system_rejects_unknown_port():
    with pytest.raises(InputError):
        sm.BoundedSystem("x", {"Task": TASK}, {"Task": 1}, V("b[2]"))


# ---------------------------------------------------------------- bounded formulae


def test_trap_constraint_mutex():
    B = mutex2()
    r, s = V("r[1]"), V("s[1]")
    expected = bf.conj(*(bf.iff(bf.disj(r, V(f"w[{i}]")), bf.disj(s, V(f"u[{i}]"))) for i in (1, 2)))
    assert O.same_models(sm.trap_constraint_bounded(B), expected)


def test_trap_constraint_single_interaction():
    B = sm.BoundedSystem("one", {"Semaphore": SEM, "Task": TASK}, {"Semaphore": 1, "Task": 1},
                         bf.conj(V("a[1]"), V("b[1]")))
    expected = bf.implies(bf.disj(V("r[1]"), V("w[1]")), bf.disj(V("s[1]"), V("u[1]")))
    assert O.same_models(sm.trap_constraint_bounded(B), expected)


def test_trap_constraint_silent_port():
    S = load_system(pl.corpus_path("bounded", "silent-port.sys"))
    B = S.bounded()
    # ping labels no transition, so b(1)+ping(2) constrains only instance 1
    expected = bf.conj(bf.implies(V("w[1]"), V("u[1]")), bf.implies(V("u[1]"), V("w[1]")),
                       bf.implies(V("w[2]"), V("u[2]")), bf.implies(V("u[2]"), V("w[2]")))
    assert O.same_models(sm.trap_constraint_bounded(B), expected)


def test_init_and_deadlock_mutex():
    B = mutex2()
    init = sm.init_formula_bounded(B)
    assert O.same_models(init, bf.disj(V("r[1]"), V("w[1]"), V("w[2]")))
    dead = sm.deadlock_formula_bounded(B)
    expected = bf.conj(bf.disj(bf.neg(V("r[1]")), bf.neg(bf.disj(V("w[1]"), V("w[2]")))),
                       bf.disj(bf.neg(V("s[1]")), bf.neg(bf.disj(V("u[1]"), V("u[2]")))))
    assert O.same_models(dead, expected)


def test_deadlock_of_empty_interaction_is_true():
    B = load_system(pl.corpus_path("bounded", "idle.sys")).bounded()
    assert sm.deadlock_formula_bounded(B) == bf.TOP
    assert sm.trap_constraint_bounded(B) == bf.TOP


# ---------------------------------------------------------------- parametric formulae

T, SM = "Task", "Semaphore"
w, u = PredSymbol("w", T, "state"), PredSymbol("u", T, "state")
r, s = PredSymbol("r", SM, "state"), PredSymbol("s", SM, "state")
i, i2 = IndexVar("i", T), IndexVar("i2", T)
k = IndexVar("k", SM)


def mutex_structures(n=3):
    for m in range(1, n + 1):
        yield from O.structures({SM: ["r", "s"], T: ["u", "w"]}, {SM: 1, T: m})


def test_trap_constraint_param_mutex_schema():
    """Consequent of the second conjunct is r ∨ w(i), as pre/post of e and f dictate."""
    f = sm.trap_constraint_param(param("mutex"))
    R, S_ = mil.atom(r, k), mil.atom(s, k)
    expected = mil.forall(k, mil.conj(
        mil.forall(i, mil.implies(mil.disj(R, mil.atom(w, i)), mil.disj(S_, mil.atom(u, i)))),
        mil.forall(i, mil.implies(mil.disj(S_, mil.atom(u, i)), mil.disj(R, mil.atom(w, i))))))
    misprint = mil.forall(k, mil.conj(
        mil.forall(i, mil.implies(mil.disj(R, mil.atom(w, i)), mil.disj(S_, mil.atom(u, i)))),
        mil.forall(i, mil.implies(mil.disj(S_, mil.atom(u, i)), mil.disj(R, mil.atom(u, i))))))
    differs = False
    for I in mutex_structures():
        assert mil.eval_mil(f, I) == mil.eval_mil(expected, I)
        differs |= mil.eval_mil(f, I) != mil.eval_mil(misprint, I)
    assert differs


def test_trap_constraint_param_broadcast_matches_hand_written():
    from qelim_corpus import broadcast_trap_as_printed
    f = sm.trap_constraint_param(param("broadcast-2"))
    g = broadcast_trap_as_printed()
    for n in (1, 2, 3, 4):
        for I in O.structures({"Worker": ["u", "w"]}, {"Worker": n}):
            assert mil.eval_mil(f, I) == mil.eval_mil(g, I)


def test_trap_constraint_param_smallest_clause():
    S = parse_system("component Task { ports b, f; states w init, u; trans w -b-> u; trans u -f-> w; }"
                     "system one { instances Task: param; interaction exists i:Task . b(i); }")
    f = sm.trap_constraint_param(S)
    expected = mil.forall(i, mil.implies(mil.atom(w, i), mil.atom(u, i)))
    for I in O.structures({T: ["u", "w"]}, {T: 3}):
        assert mil.eval_mil(f, I) == mil.eval_mil(expected, I)


def test_init_formula_param():
    f = sm.init_formula_param(param("mutex"))
    expected = mil.disj(mil.exists(k, mil.atom(r, k)), mil.exists(i, mil.atom(w, i)))
    for I in mutex_structures():
        assert mil.eval_mil(f, I) == mil.eval_mil(expected, I)
    g = sm.init_formula_param(param("broadcast-2"))
    W = IndexVar("j", "Worker")
    for I in O.structures({"Worker": ["u", "w"]}, {"Worker": 2}):
        assert mil.eval_mil(g, I) == mil.eval_mil(mil.exists(W, mil.atom(PredSymbol("w", "Worker", "state"), W)), I)


def test_deadlock_formula_param_mutex():
    f = sm.deadlock_formula_param(param("mutex"))
    R, S_ = mil.exists(k, mil.atom(r, k)), mil.exists(k, mil.atom(s, k))
    expected = mil.conj(mil.disj(mil.neg(R), mil.neg(mil.exists(i, mil.atom(w, i)))),
                        mil.disj(mil.neg(S_), mil.neg(mil.exists(i, mil.atom(u, i)))))
    for I in mutex_structures():
        assert mil.eval_mil(f, I) == mil.eval_mil(expected, I)


def all_unfoldings(bound=3):
    for S in parametric_systems():
        for M in pl.unfold_sizes(S, bound):
            yield S, M


@pytest.mark.parametrize("S,M", list(all_unfoldings()), ids=lambda x: getattr(x, "name", None) or pl.mapping_str(x))
def test_generators_commute_with_unfolding(S, M):
    B = S.bounded(M)
    names = B.place_names()
    assert O.same_models(sm.trap_constraint_bounded(B), mil.unfold(sm.trap_constraint_param(S), M), names)
    assert O.same_models(sm.init_formula_bounded(B), mil.unfold(sm.init_formula_param(S), M), names)
    assert O.same_models(sm.deadlock_formula_bounded(B), mil.unfold(sm.deadlock_formula_param(S), M), names)


def bounded_corpus(max_places=12):
    for f in sorted(pl.corpus_path("bounded").glob("*.sys")):
        B = load_system(f).bounded()
        if len(B.place_names()) <= max_places:
            yield B


@pytest.mark.parametrize("B", list(bounded_corpus()), ids=lambda B: B.name)
def test_trap_constraint_models_are_marked_traps(B):
    N = petri.build_pn(B)
    f = bf.conj(sm.trap_constraint_bounded(B), sm.init_formula_bounded(B))
    sat = {N.mask(m) for m in O.models(f, N.places)}
    assert sat == set(petri.marked_traps(N))


def test_system_sizes_and_admissibility():
    S = param("task-sem-2")
    assert S.sizes({"Semaphore": 1, "Task": 2}) == {"Semaphore": 1, "Task": 2}
    assert S.admissible({"Semaphore": 1, "Task": 2})
    assert not S.admissible({"Semaphore": 1, "Task": 1})
    with pytest.raises(InputError):
        S.sizes({"Semaphore": 1})
    with pytest.raises(InputError):
        S.sizes({"Semaphore": 1, "Task": 2, "Ghost": 1})
    with pytest.raises(InputError):
        S.sizes({"Semaphore": 0, "Task": 2})
    M = param("mutex")
    with pytest.raises(InputError):
        M.sizes({"Semaphore": 2, "Task": 2})
