"""1-safe Petri net semantics of bounded systems: exact reachability,
deadlocks and traps by exhaustive enumeration."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import boolean as bf
from . import kernels
from .errors import CapExceeded, InputError, UnsafeNet
from .system import BoundedSystem

MARKING_CAP = 1_000_000
TRAP_PLACE_CAP = 20


@dataclass(frozen=True)
class Transition:
    label: tuple[str, ...]  # fired port variables
    pre: int
    post: int


@dataclass
class PetriNet:
    places: list[str]
    transitions: list[Transition]
    initial: int
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {p: k for k, p in enumerate(self.places)}

    def mask(self, names) -> int:
        m = 0
        for n in names:
            m |= 1 << self._index[n]
        return m

    def names(self, mask: int) -> frozenset[str]:
        return frozenset(p for k, p in enumerate(self.places) if mask >> k & 1)

    def enabled(self, marking: int) -> list[int]:
        return [k for k, t in enumerate(self.transitions) if marking & t.pre == t.pre]

    def is_deadlock(self, marking: int) -> bool:
        return not self.enabled(marking)

    def arrays(self):
        pre = np.array([t.pre for t in self.transitions], dtype=np.uint64)
        post = np.array([t.post for t in self.transitions], dtype=np.uint64)
        return pre, post


def build_pn(S: BoundedSystem) -> PetriNet:
    """Places are (state, instance); one transition per minimal model of the interaction."""
    places = S.place_names()
    if len(places) > 64:
        raise CapExceeded("place count", 64, "build_pn")
    index = {p: k for k, p in enumerate(places)}
    transitions = []
    for inter in S.interactions():
        pre = post = 0
        touched: dict = {}
        for v in sorted(inter):
            k, p, e = S.ports[v]
            if (k, e) in touched:
                raise InputError(f"instance {e} of {k} would fire ports {touched[(k, e)]} and {p} "
                                 f"in one interaction")
            touched[(k, e)] = p
            src, dst = S.endpoints(v)
            if src is None:
                continue
            pre |= 1 << index[src.name]
            post |= 1 << index[dst.name]
        transitions.append(Transition(tuple(sorted(inter)), pre, post))
    init = 0
    for k in S.types:
        for e in range(1, S.counts.get(k, 0) + 1):
            init |= 1 << index[f"{S.types[k].init}[{e}]"]
    return PetriNet(places, transitions, init)


@dataclass
class Exploration:
    markings: list[int]
    parent: list[int]
    via: list[int]

    def trace(self, idx: int) -> list[tuple[int | None, int]]:
        """(transition index or None, marking) from the initial marking to ``idx``."""
        out = []
        while idx >= 0:
            out.append((self.via[idx] if self.via[idx] >= 0 else None, self.markings[idx]))
            idx = self.parent[idx]
        return out[::-1]


def explore(N: PetriNet, limit: int = MARKING_CAP) -> Exploration:
    pre, post = N.arrays()
    status, markings, parent, via = kernels.explore(pre, post, N.initial, limit)
    ex = Exploration(markings, parent, via)
    if status == kernels.UNSAFE:
        tr = ex.trace(len(markings) - 1)
        raise UnsafeNet("net is not 1-safe: " + " -> ".join(
            "{" + ",".join(sorted(N.names(m))) + "}" for _, m in tr))
    if status == kernels.LIMIT:
        raise CapExceeded("reachable markings", limit, "reachable")
    return ex


def reachable(N: PetriNet, limit: int = MARKING_CAP) -> set[frozenset[str]]:
    return {N.names(m) for m in explore(N, limit).markings}


def deadlocks(N: PetriNet, limit: int = MARKING_CAP) -> set[frozenset[str]]:
    return {N.names(m) for m in explore(N, limit).markings if N.is_deadlock(m)}


@dataclass
class ExactResult:
    deadlock_free: bool
    reachable: int
    witness: list[dict] | None = None  # steps: {"fired": [...], "marking": [...]}


def is_deadlock_free_exact(N: PetriNet, limit: int = MARKING_CAP) -> ExactResult:
    ex = explore(N, limit)
    for idx, m in enumerate(ex.markings):
        if N.is_deadlock(m):
            steps = []
            for t, mk in ex.trace(idx):
                steps.append({"fired": list(N.transitions[t].label) if t is not None else [],
                              "marking": sorted(N.names(mk))})
            return ExactResult(False, len(ex.markings), steps)
    return ExactResult(True, len(ex.markings))


def trap_table(N: PetriNet, cap: int = TRAP_PLACE_CAP) -> np.ndarray:
    if len(N.places) > cap:
        raise CapExceeded("place count", cap, "traps_bruteforce")
    pre, post = N.arrays()
    return kernels.trap_table(pre, post, len(N.places))


def traps_bruteforce(N: PetriNet, cap: int = TRAP_PLACE_CAP) -> list[int]:
    """Every place set W (bitmask) such that each transition consuming from W also produces into W."""
    return [int(w) for w in np.flatnonzero(trap_table(N, cap))]


def marked_traps(N: PetriNet, cap: int = TRAP_PLACE_CAP) -> list[int]:
    return [w for w in traps_bruteforce(N, cap) if w & N.initial]


def minimal_marked_traps(N: PetriNet, cap: int = TRAP_PLACE_CAP) -> list[int]:
    table = trap_table(N, cap).copy()
    size = len(table)
    masks = np.arange(size, dtype=np.uint64)
    table &= ((masks & np.uint64(N.initial)) != 0).astype(np.uint8)
    minimal = kernels.minimal_masks(table, len(N.places))
    return [int(w) for w in np.flatnonzero(minimal)]


def trap_invariant_exact(N: PetriNet, cap: int = TRAP_PLACE_CAP) -> bf.BoolFormula:
    """Conjunction over minimal marked traps of the disjunction of their places."""
    clauses = []
    for w in minimal_marked_traps(N, cap):
        clauses.append(bf.disj(*(bf.var(p) for p in sorted(N.names(w)))))
    return bf.conj(*clauses)


# ---------------------------------------------------------------- DOT output


def _q(s: str) -> str:
    return '"' + s.replace('"', r'\"') + '"'


def to_dot(N: PetriNet, name: str = "net") -> str:
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;"]
    for k, p in enumerate(N.places):
        style = ', style=filled, fillcolor="#dddddd"' if N.initial >> k & 1 else ""
        lines.append(f"  {_q('p:' + p)} [label={_q(p)}, shape=circle{style}];")
    for k, t in enumerate(N.transitions):
        tid = _q(f"t{k}")
        lines.append(f"  {tid} [label={_q(' '.join(t.label))}, shape=box];")
        for j, p in enumerate(N.places):
            if t.pre >> j & 1:
                lines.append(f"  {_q('p:' + p)} -> {tid};")
            if t.post >> j & 1:
                lines.append(f"  {tid} -> {_q('p:' + p)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def reachability_dot(N: PetriNet, limit: int = MARKING_CAP, name: str = "reach") -> str:
    ex = explore(N, limit)
    pre, post = N.arrays()
    index = {m: k for k, m in enumerate(ex.markings)}
    lines = [f"digraph {_q(name)} {{"]
    for k, m in enumerate(ex.markings):
        label = " ".join(sorted(N.names(m)))
        extra = ", peripheries=2" if N.is_deadlock(m) else ""
        lines.append(f"  m{k} [label={_q(label)}{extra}];")
    for k, m in enumerate(ex.markings):
        for t in N.enabled(m):
            nxt = (m & ~N.transitions[t].pre) | N.transitions[t].post
            lines.append(f"  m{k} -> m{index[nxt]} [label={_q(' '.join(N.transitions[t].label))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
