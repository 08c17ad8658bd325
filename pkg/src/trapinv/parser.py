"""Reader for the system description format.

    component Task { ports b, f; states w init, u; trans w -b-> u; trans u -f-> w; }
    system mutex {
      instances Semaphore: 1; instances Task: param;
      interaction exists i:Semaphore, j:Task . a(i) and b(j);
      interaction exists i1:W, i2:W . i1 != i2 and b(i1) and b(i2)
                  with forall j:W . (j != i1 and j != i2) -> a(j);
    }

``param`` may carry a lower bound (``param >= 2``).  Several clauses may be
joined by ``or`` in one ``interaction`` statement.  A clause may consist of
broadcasts only (``interaction forall i:W . f(i);``).  A port of a type with
exactly one instance may be written without an index.  Integer indices are
accepted only when every instance count is a literal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from . import mil
from .errors import InputError
from .mil import TRUE, IndexVar, MilFormula
from .system import ComponentType, InstanceSpec, InteractionClause, System

KEYWORDS = {"component", "system", "ports", "states", "init", "trans", "instances", "param",
            "interaction", "exists", "forall", "with", "and", "or", "distinct", "true"}

TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(//|[#])[^\n]*)
  | (?P<arrow>->|→)
  | (?P<ne>!=|≠)
  | (?P<ge>>=|≥)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<and>&&|&|∧)
  | (?P<sym>[{}();:,.=\-])
""", re.VERBOSE)


ASCII = {"→": "->", "≠": "!=", "≥": ">="}


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    out = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = TOKEN.match(text, pos)
        if not m:
            raise InputError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind not in ("ws", "comment"):
            if kind == "name" and s in KEYWORDS:
                kind = "kw"
            width = len(s)
            if kind == "and":
                kind, s = "kw", "and"
            s = ASCII.get(s, s)
            out.append(Tok(kind, s, line, col))
            col += width
        else:
            col += len(s)
        pos = m.end()
    out.append(Tok("eof", "", line, col))
    return out


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0
        self.types: dict[str, ComponentType] = {}
        self.instances: dict[str, InstanceSpec] = {}
        self.implicit: list[IndexVar] = []
        self.fresh = 0

    # token helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.pos]

    def error(self, msg: str, tok: Tok | None = None):
        t = tok or self.tok
        raise InputError(msg, t.line, t.col)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("kw", "sym", "arrow", "ne", "ge")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.pos += 1
        return t

    def name(self) -> Tok:
        t = self.tok
        if t.kind != "name":
            self.error(f"expected a name, found {t.text or 'end of input'!r}")
        self.pos += 1
        return t

    def integer(self) -> int:
        t = self.tok
        if t.kind != "int":
            self.error(f"expected an integer, found {t.text or 'end of input'!r}")
        self.pos += 1
        return int(t.text)

    def names(self) -> list[Tok]:
        out = [self.name()]
        while self.accept(","):
            out.append(self.name())
        return out

    # top level
    def parse(self) -> System:
        systems = []
        while self.tok.kind != "eof":
            if self.accept("component"):
                self.component()
            elif self.accept("system"):
                systems.append(self.system())
            else:
                self.error(f"expected 'component' or 'system', found {self.tok.text!r}")
        if len(systems) != 1:
            raise InputError(f"expected exactly one system, found {len(systems)}")
        return systems[0]

    def component(self) -> None:
        nt = self.name()
        if nt.text in self.types:
            self.error(f"component {nt.text} declared twice", nt)
        self.expect("{")
        ports: list[str] = []
        states: list[str] = []
        init = None
        trans = []
        while not self.accept("}"):
            if self.accept("ports"):
                ports.extend(t.text for t in self.names())
            elif self.accept("states"):
                while True:
                    st = self.name()
                    states.append(st.text)
                    if self.accept("init"):
                        if init is not None:
                            self.error("two initial states", st)
                        init = st.text
                    if not self.accept(","):
                        break
            elif self.accept("trans"):
                src = self.name().text
                self.expect("-")
                port = self.name().text
                self.expect("->")
                dst = self.name().text
                trans.append((src, port, dst))
            else:
                self.error(f"unexpected {self.tok.text!r} in component {nt.text}")
            self.expect(";")
        if init is None:
            self.error(f"component {nt.text} has no initial state", nt)
        try:
            ct = ComponentType(nt.text, tuple(ports), tuple(states), init, tuple(trans))
        except InputError as e:
            raise InputError(e.message, nt.line, nt.col) from None
        taken = {n for t in self.types.values() for n in t.ports + t.states}
        clash = taken & set(ports + states)
        if clash:
            self.error(f"names {sorted(clash)} already used by another component type", nt)
        self.types[nt.text] = ct

    def system(self) -> System:
        nt = self.name()
        label = nt.text
        end = (nt.line, nt.col + len(nt.text))
        # hyphens and digit runs may be glued into the name: sync-2x3
        while (self.tok.line, self.tok.col) == end and (self.at("-") or self.tok.kind in ("name", "int")):
            t = self.tok
            self.pos += 1
            label += t.text
            end = (t.line, t.col + len(t.text))
        if label.endswith("-"):
            self.error("bad system name")
        self.expect("{")
        instances: dict[str, InstanceSpec] = {}
        pending = []
        while not self.accept("}"):
            if self.accept("instances"):
                while True:
                    tt = self.name()
                    if tt.text not in self.types:
                        self.error(f"unknown component type {tt.text}", tt)
                    if tt.text in instances:
                        self.error(f"instances of {tt.text} declared twice", tt)
                    self.expect(":")
                    if self.accept("param"):
                        lo = 1
                        if self.accept(">="):
                            lo = self.integer()
                            if lo < 1:
                                self.error("parameter lower bound must be at least 1")
                        instances[tt.text] = InstanceSpec(None, lo)
                    else:
                        it = self.tok
                        n = self.integer()
                        if n < 1:
                            self.error("instance count must be at least 1", it)
                        instances[tt.text] = InstanceSpec(n, n)
                    if not self.accept(","):
                        break
                self.expect(";")
            elif self.accept("interaction"):
                start = self.pos
                while not self.at(";"):
                    if self.tok.kind == "eof":
                        self.error("unterminated interaction")
                    self.pos += 1
                pending.append((start, self.pos))
                self.expect(";")
            else:
                self.error(f"unexpected {self.tok.text!r} in system {nt.text}")
        if not instances:
            self.error(f"system {nt.text} declares no instances", nt)
        self.instances = instances
        clauses = []
        end = self.pos
        for start, stop in pending:
            self.pos = start
            clauses.extend(self.interaction(stop))
        self.pos = end
        return System(label, {k: self.types[k] for k in self.types if k in instances},
                      instances, tuple(clauses))

    # interactions
    def interaction(self, stop: int) -> list[InteractionClause]:
        out = [self.clause()]
        while self.accept("or"):
            out.append(self.clause())
        if self.pos != stop:
            self.error(f"unexpected {self.tok.text!r} in interaction")
        return out

    def binders(self, scope: dict) -> list[IndexVar]:
        out = []
        while True:
            vt = self.name()
            self.expect(":")
            tt = self.name()
            if tt.text not in self.instances:
                self.error(f"type {tt.text} has no instances in this system", tt)
            if vt.text in scope:
                self.error(f"variable {vt.text} bound twice", vt)
            v = IndexVar(vt.text, tt.text)
            scope[vt.text] = v
            out.append(v)
            if not self.accept(","):
                return out

    def clause(self) -> InteractionClause:
        self.clause_start = self.tok
        scope: dict[str, IndexVar] = {}
        bound: list[IndexVar] = []
        rendezvous = []
        guard = []
        broadcasts = []
        if self.at("forall"):
            broadcasts.append(self.broadcast(scope))
            while self.accept("and"):
                broadcasts.append(self.broadcast(scope))
            return self.make_clause(bound, rendezvous, guard, broadcasts, scope)
        while self.accept("exists"):
            bound.extend(self.binders(scope))
            self.expect(".")
        self.body(scope, rendezvous, guard, broadcasts)
        if self.accept("with"):
            broadcasts.append(self.broadcast(scope))
            while self.accept(","):
                broadcasts.append(self.broadcast(scope))
        return self.make_clause(bound, rendezvous, guard, broadcasts, scope)

    def body(self, scope, rendezvous, guard, broadcasts) -> None:
        while True:
            if self.accept("("):
                self.body(scope, rendezvous, guard, broadcasts)
                self.expect(")")
            elif self.at("forall"):
                broadcasts.append(self.broadcast(scope))
            elif self.accept("true"):
                pass
            else:
                lit = self.literal(scope, allow_ports=True)
                if isinstance(lit, tuple):
                    rendezvous.append(lit)
                else:
                    guard.append(lit)
            if not self.accept("and"):
                return

    def index(self, scope: dict):
        t = self.tok
        if t.kind == "int":
            self.pos += 1
            return int(t.text), t
        if t.kind == "name":
            self.pos += 1
            if t.text not in scope:
                self.error(f"unbound variable {t.text}", t)
            return scope[t.text], t
        self.error(f"expected an index, found {t.text!r}")

    def check_constant(self, c: int, ctype: str | None, t: Tok) -> None:
        if any(s.is_param for s in self.instances.values()):
            self.error("integer indices are only allowed when every instance count is a literal", t)
        if ctype is not None and not 1 <= c <= self.instances[ctype].count:
            self.error(f"index {c} out of range for {ctype}", t)

    def literal(self, scope: dict, allow_ports: bool):
        if self.accept("distinct"):
            self.expect("(")
            idx = [self.index(scope)]
            while self.accept(","):
                idx.append(self.index(scope))
            self.expect(")")
            for (a, ta), (b, _) in zip(idx, idx[1:]):
                self.same_type(a, b, ta)
            return mil.distinct(*(a for a, _ in idx))
        t = self.tok
        if t.kind == "name" and t.text in scope or t.kind == "int":
            a, ta = self.index(scope)
            if self.accept("="):
                positive = True
            elif self.accept("!="):
                positive = False
            else:
                self.error("expected '=' or '!='")
            b, _ = self.index(scope)
            self.same_type(a, b, ta)
            return mil.eq(a, b) if positive else mil.neq(a, b)
        pt = self.name()
        owner = self.port_owner(pt)
        if not allow_ports:
            self.error("port atoms are not allowed here", pt)
        if self.accept("("):
            arg, at = self.index(scope)
            self.expect(")")
            if isinstance(arg, int):
                self.check_constant(arg, owner.name, at)
            elif arg.ctype != owner.name:
                self.error(f"port {pt.text} of {owner.name} applied to {arg.name} of type {arg.ctype}", at)
            return (arg, owner.port(pt.text))
        spec = self.instances[owner.name]
        if spec.count != 1:
            self.error(f"port {pt.text} needs an index: {owner.name} does not have exactly one instance", pt)
        self.fresh += 1
        v = IndexVar(f"_{owner.name.lower()}{self.fresh}", owner.name)
        scope[v.name] = v
        self.implicit.append(v)
        return (v, owner.port(pt.text))

    def same_type(self, a, b, t: Tok) -> None:
        if isinstance(a, int) or isinstance(b, int):
            for x in (a, b):
                if isinstance(x, int):
                    self.check_constant(x, None, t)
            return
        if a.ctype != b.ctype:
            self.error(f"equality between {a.name}:{a.ctype} and {b.name}:{b.ctype}", t)

    def port_owner(self, t: Tok) -> ComponentType:
        for ct in self.types.values():
            if t.text in ct.ports:
                if ct.name not in self.instances:
                    self.error(f"type {ct.name} has no instances in this system", t)
                return ct
            if t.text in ct.states:
                self.error(f"{t.text} is a state, not a port", t)
        self.error(f"unknown port {t.text}", t)

    def guard(self, scope: dict) -> list[MilFormula]:
        out = []
        while True:
            if self.accept("("):
                out.extend(self.guard(scope))
                self.expect(")")
            elif self.accept("true"):
                pass
            else:
                out.append(self.literal(scope, allow_ports=False))
            if not self.accept("and"):
                return out

    def guard_ahead(self) -> bool:
        """True when a '->' follows before the broadcast's port atom can end."""
        depth = 0
        for t in self.toks[self.pos:]:
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
                if depth < 0:
                    return False
            elif t.text == "->":
                return True
            elif t.text in (";", ",", "or", "}", "with") or t.kind == "eof":
                return False
        return False

    def broadcast(self, scope: dict):
        ft = self.expect("forall")
        inner = dict(scope)
        bound = self.binders(inner)
        if len(bound) != 1:
            self.error("a broadcast binds exactly one variable", ft)
        j = bound[0]
        self.expect(".")
        psi: list[MilFormula] = []
        if self.guard_ahead():
            psi = self.guard(inner)
            self.expect("->")
        pt = self.name()
        owner = self.port_owner(pt)
        self.expect("(")
        arg, at = self.index(inner)
        self.expect(")")
        if arg != j:
            self.error(f"broadcast port must be applied to its bound variable {j.name}", at)
        if owner.name != j.ctype:
            self.error(f"port {pt.text} of {owner.name} applied to {j.name} of type {j.ctype}", pt)
        return (j, mil.conj(*psi), owner.port(pt.text))

    def make_clause(self, bound, rendezvous, guard, broadcasts, scope) -> InteractionClause:
        t = self.clause_start
        implicit = [v for v in self.implicit if v.name in scope]
        self.implicit = [v for v in self.implicit if v not in implicit]
        used: dict = {}
        for i, p in rendezvous:
            if isinstance(i, IndexVar):
                if i in used:
                    self.error(f"variable {i.name} is used with two ports ({used[i]} and {p.name})", t)
                used[i] = p.name
        for v in bound:
            if v not in used:
                self.error(f"variable {v.name} is bound but has no port", t)
        order = {v: k for k, v in enumerate(bound + implicit)}
        rendezvous.sort(key=lambda ip: (0, order[ip[0]]) if isinstance(ip[0], IndexVar) else (1, ip[0], ip[1].name))
        if not rendezvous and not broadcasts:
            self.error("empty interaction clause", t)
        return InteractionClause(tuple(rendezvous), mil.conj(*guard), tuple(broadcasts))


def parse_system(text: str) -> System:
    """Parse and validate a system description."""
    return Parser(text).parse()


def load_system(path: str | Path) -> System:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    return parse_system(text)
