"""Component types, bounded and parametric systems, and the formulae derived
from them: trap constraints, initial-state formulae and deadlock formulae."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from . import boolean as bf
from . import mil
from .errors import InputError, NotPositive
from .mil import FALSE, TRUE, Index, IndexVar, MilFormula, PredSymbol


@dataclass(frozen=True)
class ComponentType:
    name: str
    ports: tuple[str, ...]
    states: tuple[str, ...]
    init: str
    transitions: tuple[tuple[str, str, str], ...]  # (source, port, target)

    def __post_init__(self):
        if self.init not in self.states:
            raise InputError(f"component {self.name}: initial state {self.init!r} is not a state")
        seen = set()
        for src, port, dst in self.transitions:
            if src not in self.states or dst not in self.states:
                raise InputError(f"component {self.name}: transition {src} -{port}-> {dst} "
                                 f"uses an undeclared state")
            if port not in self.ports:
                raise InputError(f"component {self.name}: unknown port {port!r}")
            if port in seen:
                raise InputError(f"component {self.name}: port {port!r} labels two transitions")
            seen.add(port)
        if len(set(self.ports)) != len(self.ports) or len(set(self.states)) != len(self.states):
            raise InputError(f"component {self.name}: duplicate port or state name")
        if set(self.ports) & set(self.states):
            raise InputError(f"component {self.name}: a name is both a port and a state")

    def pre_post(self, port: str) -> tuple[str | None, str | None]:
        if port not in self.ports:
            raise InputError(f"component {self.name}: unknown port {port!r}")
        for src, p, dst in self.transitions:
            if p == port:
                return src, dst
        return None, None

    def port(self, name: str) -> PredSymbol:
        return PredSymbol(name, self.name, "port")

    def state(self, name: str) -> PredSymbol:
        return PredSymbol(name, self.name, "state")


def pre_post(ctype: ComponentType, port: str) -> tuple[str | None, str | None]:
    """Source and target state of the transition labelled ``port`` (None, None if absent)."""
    return ctype.pre_post(port)


@dataclass(frozen=True)
class InstanceSpec:
    """Instance count of one type: a literal, or a parameter with a lower bound."""

    count: int | None = None
    minimum: int = 1

    @property
    def is_param(self) -> bool:
        return self.count is None

    def __str__(self) -> str:
        if self.count is not None:
            return str(self.count)
        return "param" if self.minimum == 1 else f"param >= {self.minimum}"


@dataclass(frozen=True)
class InteractionClause:
    """``exists i1..il . guard and p1(i1) .. pl(il) and forall j . psi_j -> q_j(j)``."""

    rendezvous: tuple[tuple[Index, PredSymbol], ...]
    guard: MilFormula = TRUE
    broadcasts: tuple[tuple[IndexVar, MilFormula, PredSymbol], ...] = ()

    @property
    def variables(self) -> tuple[IndexVar, ...]:
        return tuple(i for i, _ in self.rendezvous if isinstance(i, IndexVar))

    def to_mil(self) -> MilFormula:
        body = mil.conj(self.guard,
                        *(mil.atom(p, i) for i, p in self.rendezvous),
                        *(mil.forall(j, mil.implies(psi, mil.atom(p, j))) for j, psi, p in self.broadcasts))
        return mil.exists(self.variables, body)

    def render(self, ascii: bool = False) -> str:
        return mil.render(self.to_mil(), ascii=ascii)


@dataclass
class BoundedSystem:
    """Fixed instance counts and a propositional interaction over ports ``p[i]``."""

    name: str
    types: dict[str, ComponentType]
    counts: dict[str, int]
    interaction: bf.BoolFormula
    ports: dict[str, tuple[str, str, int]] = field(default_factory=dict)  # var -> (type, port, index)

    def __post_init__(self):
        for k, n in self.counts.items():
            if n < 1:
                raise InputError(f"instance count of {k} must be at least 1")
        if not self.ports:
            for k, n in self.counts.items():
                for p in self.types[k].ports:
                    for e in range(1, n + 1):
                        self.ports[mil.place_name(p, e)] = (k, p, e)
        if not bf.is_positive(self.interaction):
            raise NotPositive("interaction formula of a bounded system must be positive")
        unknown = [v.name for v in bf.variables(self.interaction) if v.name not in self.ports]
        if unknown:
            raise InputError(f"interaction mentions unknown port variables {unknown}")

    def place(self, ctype: str, state: str, index: int) -> bf.Var:
        return bf.var(mil.place_name(state, index), "state", (ctype, index))

    def places(self) -> list[tuple[str, str, int]]:
        """(type, state, index) in type order, then instance, then state order."""
        out = []
        for k in self.types:
            if k not in self.counts:
                continue
            for e in range(1, self.counts[k] + 1):
                for s in self.types[k].states:
                    out.append((k, s, e))
        return out

    def place_names(self) -> list[str]:
        return [mil.place_name(s, e) for _, s, e in self.places()]

    def interactions(self) -> list[frozenset[str]]:
        """Minterms of the absorbed DNF of the interaction, i.e. its minimal models."""
        return [frozenset(v.name for v, _ in m) for m in bf.minterms(self.interaction, absorb=True)]

    def endpoints(self, port_var: str) -> tuple[bf.BoolFormula | None, bf.BoolFormula | None]:
        k, p, e = self.ports[port_var]
        src, dst = self.types[k].pre_post(p)
        if src is None:
            return None, None
        return self.place(k, src, e), self.place(k, dst, e)


@dataclass
class System:
    """A system as read from input: literal and parametric instance counts."""

    name: str
    types: dict[str, ComponentType]
    instances: dict[str, InstanceSpec]
    clauses: tuple[InteractionClause, ...]

    @property
    def is_bounded(self) -> bool:
        return all(not s.is_param for s in self.instances.values())

    @property
    def param_types(self) -> list[str]:
        return [k for k, s in self.instances.items() if s.is_param]

    def interaction(self) -> MilFormula:
        return mil.disj(*(c.to_mil() for c in self.clauses))

    def sizes(self, overrides: Mapping[str, int] | None = None) -> dict[str, int]:
        """Concrete instance counts: literals plus ``overrides`` for parameters."""
        overrides = dict(overrides or {})
        out = {}
        for k, spec in self.instances.items():
            if k in overrides:
                if spec.count is not None and overrides[k] != spec.count:
                    raise InputError(f"type {k} has a fixed count of {spec.count}")
                out[k] = overrides.pop(k)
            elif spec.count is not None:
                out[k] = spec.count
            else:
                raise InputError(f"no instance count given for parametric type {k}")
            if out[k] < 1:
                raise InputError(f"instance count of {k} must be at least 1")
        if overrides:
            raise InputError(f"unknown component types {sorted(overrides)}")
        return out

    def admissible(self, sizes: Mapping[str, int]) -> bool:
        return all(spec.count == sizes[k] if spec.count is not None else sizes[k] >= spec.minimum
                   for k, spec in self.instances.items())

    def bounded(self, sizes: Mapping[str, int] | None = None) -> BoundedSystem:
        counts = self.sizes(sizes)
        inter = mil.unfold(self.interaction(), counts)
        return BoundedSystem(self.name, {k: self.types[k] for k in counts}, counts, inter)


# ---------------------------------------------------------------- bounded formulae


def trap_constraint_bounded(S: BoundedSystem) -> bf.BoolFormula:
    conjuncts = []
    for inter in S.interactions():
        pres, posts = [], []
        for v in sorted(inter):
            pre, post = S.endpoints(v)
            if pre is not None:
                pres.append(pre)
                posts.append(post)
        conjuncts.append(bf.implies(bf.disj(*pres), bf.disj(*posts)))
    return bf.conj(*conjuncts)


def init_formula_bounded(S: BoundedSystem) -> bf.BoolFormula:
    return bf.disj(*(S.place(k, S.types[k].init, e)
                     for k in S.types if k in S.counts for e in range(1, S.counts[k] + 1)))


def deadlock_formula_bounded(S: BoundedSystem) -> bf.BoolFormula:
    conjuncts = []
    for inter in S.interactions():
        lits = []
        for v in sorted(inter):
            pre, _ = S.endpoints(v)
            lits.append(bf.TOP if pre is None else bf.neg(pre))
        conjuncts.append(bf.disj(*lits))
    return bf.conj(*conjuncts)


# ---------------------------------------------------------------- parametric formulae


def _endpoint_atom(S: System, p: PredSymbol, i: Index, which: int) -> MilFormula:
    ends = S.types[p.ctype].pre_post(p.name)
    if ends[which] is None:
        return FALSE
    return mil.atom(S.types[p.ctype].state(ends[which]), i)


def trap_constraint_param(S: System) -> MilFormula:
    conjuncts = []
    for c in S.clauses:
        def side(which: int) -> MilFormula:
            return mil.disj(*(_endpoint_atom(S, p, i, which) for i, p in c.rendezvous),
                            *(mil.exists(j, mil.conj(psi, _endpoint_atom(S, p, j, which)))
                              for j, psi, p in c.broadcasts))
        conjuncts.append(mil.forall(c.variables, mil.implies(mil.conj(c.guard, side(0)), side(1))))
    return mil.conj(*conjuncts)


def init_formula_param(S: System) -> MilFormula:
    return mil.disj(*(mil.exists(IndexVar(f"i_{k}", k), mil.atom(S.types[k].state(S.types[k].init),
                                                                   IndexVar(f"i_{k}", k)))
                      for k in S.instances))


def deadlock_formula_param(S: System) -> MilFormula:
    conjuncts = []
    for c in S.clauses:
        disabled = mil.disj(*(mil.neg(_endpoint_atom(S, p, i, 0)) for i, p in c.rendezvous),
                            *(mil.exists(j, mil.conj(psi, mil.neg(_endpoint_atom(S, p, j, 0))))
                              for j, psi, p in c.broadcasts))
        conjuncts.append(mil.forall(c.variables, mil.implies(c.guard, disabled)))
    return mil.conj(*conjuncts)


def trap_constraint(S):
    return trap_constraint_bounded(S) if isinstance(S, BoundedSystem) else trap_constraint_param(S)


def init_formula(S):
    return init_formula_bounded(S) if isinstance(S, BoundedSystem) else init_formula_param(S)


def deadlock_formula(S):
    return deadlock_formula_bounded(S) if isinstance(S, BoundedSystem) else deadlock_formula_param(S)
