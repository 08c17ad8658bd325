"""End-to-end verification runs and the benchmark runner."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from . import boolean as bf
from . import cardinality as cd
from . import mil, petri
from . import system as sm
from .cardinality import SizeSpec
from .errors import InputError
from .parser import load_system
from .smtlib import emit_propositional, emit_smtlib

DEADLOCK_FREE = "DeadlockFree"
UNKNOWN = "Unknown"
EXACT_DEADLOCK = "ExactDeadlock"
EXACT_FREE = "ExactFree"

EXIT_CODES = {DEADLOCK_FREE: 0, EXACT_FREE: 0, UNKNOWN: 1, EXACT_DEADLOCK: 2}
EXIT_INPUT_ERROR = 3
EXIT_CAP = 4

MODES = ("parametric", "bounded", "exact")


@dataclass
class RunConfig:
    mode: str = "parametric"
    sizes: dict[str, int] = field(default_factory=dict)
    emit_smt: str | None = None
    theory: str = "lia"
    dnf_cap: int = bf.DNF_CAP
    vocab_cap: int = cd.VOCAB_CAP
    marking_cap: int = petri.MARKING_CAP

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"unknown mode {self.mode!r}")
        if self.theory not in ("lia", "sets"):
            raise InputError(f"unknown theory {self.theory!r}")


@dataclass
class Verdict:
    example: str
    mode: str
    result: str
    invariant: str
    t_gen_ms: float
    t_solve_ms: float
    witness: object = None
    smt_path: str | None = None
    formula: object = field(default=None, repr=False)  # invariant as a formula object

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.result]

    @property
    def sat_result(self) -> str:
        """``unsat`` when the verification condition was refuted, else ``sat``."""
        return "unsat" if self.result in (DEADLOCK_FREE, EXACT_FREE) else "sat"

    def to_json(self, timings: bool = True) -> dict:
        out = {"example": self.example, "mode": self.mode, "verdict": self.result,
               "invariant": self.invariant}
        if self.witness is not None:
            out["witness"] = self.witness
        if timings:
            out["t_gen_ms"] = round(self.t_gen_ms, 3)
            out["t_solve_ms"] = round(self.t_solve_ms, 3)
        if self.smt_path:
            out["smt"] = self.smt_path
        return out


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1000.0


def _size_specs(S: sm.System) -> dict[str, SizeSpec]:
    return {k: SizeSpec(s.minimum, s.count) for k, s in S.instances.items()}


@dataclass
class ParametricArtifacts:
    trap: mil.MilFormula
    init: mil.MilFormula
    qelim: mil.MilFormula
    positive: mil.MilFormula
    invariant: mil.MilFormula
    deadlock: mil.MilFormula
    condition: mil.MilFormula


def parametric_artifacts(S: sm.System, cfg: RunConfig | None = None) -> ParametricArtifacts:
    """Every intermediate formula of the parametric check."""
    cfg = cfg or RunConfig()
    trap = sm.trap_constraint_param(S)
    init = sm.init_formula_param(S)
    q = cd.qelim(mil.conj(trap, init))
    pos = cd.ppos_card(q, dnf_cap=cfg.dnf_cap, vocab_cap=cfg.vocab_cap)
    inv = cd.card_dual(pos)
    dead = cd.qelim(sm.deadlock_formula_param(S))
    return ParametricArtifacts(trap, init, q, pos, inv, dead, cd.simplify(mil.conj(inv, dead)))


def parametric_invariant_mil(S: sm.System) -> mil.MilFormula:
    """The invariant in quantified form, via the MIL dual of the positivated constraint."""
    return mil.mil_dual(cd.ppos_formula(cd.qelim(mil.conj(sm.trap_constraint_param(S),
                                                          sm.init_formula_param(S)))))


def verify_parametric(S: sm.System, cfg: RunConfig | None = None) -> Verdict:
    cfg = cfg or RunConfig()
    t0 = time.perf_counter()
    art = parametric_artifacts(S, cfg)
    t_gen = _ms(t0)
    specs = _size_specs(S)
    smt_path = None
    if cfg.emit_smt:
        Path(cfg.emit_smt).write_text(emit_smtlib(art.condition, cfg.theory, specs), encoding="utf-8")
        smt_path = cfg.emit_smt
    t1 = time.perf_counter()
    res = cd.card_sat(art.condition, specs, vocab_cap=cd.SAT_VOCAB_CAP)
    t_solve = _ms(t1)
    witness = None
    if res.sat:
        witness = {"sizes": res.sizes(), "counts": res.describe()}
    return Verdict(S.name, "parametric", UNKNOWN if res.sat else DEADLOCK_FREE,
                   mil.render(art.invariant), t_gen, t_solve, witness, smt_path, art.invariant)


def _bounded(S, cfg: RunConfig) -> sm.BoundedSystem:
    if isinstance(S, sm.BoundedSystem):
        return S
    sizes = S.sizes(cfg.sizes)
    if not S.admissible(sizes):
        bad = [f"{k}={sizes[k]} (needs >= {s.minimum})" for k, s in S.instances.items()
               if s.is_param and sizes[k] < s.minimum]
        raise InputError("instance counts below the declared minimum: " + ", ".join(bad))
    return S.bounded(sizes)


def bounded_invariant(B: sm.BoundedSystem, cap: int = bf.DNF_CAP) -> bf.BoolFormula:
    return bf.dualize(bf.positivate(bf.conj(sm.trap_constraint_bounded(B), sm.init_formula_bounded(B)),
                                    cap=cap))


def verify_bounded_symbolic(S, cfg: RunConfig | None = None) -> Verdict:
    cfg = cfg or RunConfig(mode="bounded")
    B = _bounded(S, cfg)
    t0 = time.perf_counter()
    inv = bounded_invariant(B, cfg.dnf_cap)
    cond = bf.conj(inv, sm.deadlock_formula_bounded(B))
    t_gen = _ms(t0)
    smt_path = None
    if cfg.emit_smt:
        Path(cfg.emit_smt).write_text(emit_propositional(cond), encoding="utf-8")
        smt_path = cfg.emit_smt
    t1 = time.perf_counter()
    sat, model = bf.is_sat(cond)
    t_solve = _ms(t1)
    witness = None
    if sat:
        witness = {"marking": sorted(n for n, v in model.items() if v)}
    return Verdict(B.name, "bounded", UNKNOWN if sat else DEADLOCK_FREE, bf.render(inv),
                   t_gen, t_solve, witness, smt_path, inv)


def verify_bounded_exact(S, cfg: RunConfig | None = None) -> Verdict:
    cfg = cfg or RunConfig(mode="exact")
    B = _bounded(S, cfg)
    t0 = time.perf_counter()
    N = petri.build_pn(B)
    t_gen = _ms(t0)
    t1 = time.perf_counter()
    res = petri.is_deadlock_free_exact(N, cfg.marking_cap)
    t_solve = _ms(t1)
    inv = ""
    formula = None
    if len(N.places) <= petri.TRAP_PLACE_CAP:
        formula = petri.trap_invariant_exact(N)
        inv = bf.render(formula)
    witness = None if res.deadlock_free else {"trace": res.witness}
    return Verdict(B.name, "exact", EXACT_FREE if res.deadlock_free else EXACT_DEADLOCK, inv,
                   t_gen, t_solve, witness, None, formula)


def verify(S, cfg: RunConfig) -> Verdict:
    if cfg.mode == "parametric":
        if isinstance(S, sm.BoundedSystem):
            raise InputError("parametric mode needs a system description, not an unfolded system")
        if cfg.sizes:
            raise InputError("--n applies to the bounded and exact modes only")
        if any(isinstance(i, int) for c in S.clauses for i, _ in c.rendezvous):
            raise InputError("parametric mode needs index variables; integer indices fix instances")
        return verify_parametric(S, cfg)
    if cfg.mode == "bounded":
        return verify_bounded_symbolic(S, cfg)
    return verify_bounded_exact(S, cfg)


def run_benchmarks(corpus_dir: str | Path, cfg: RunConfig | None = None) -> list[Verdict]:
    """Parametric verification of every ``*.sys`` file in ``corpus_dir`` (sorted by name)."""
    cfg = cfg or RunConfig()
    files = sorted(Path(corpus_dir).glob("*.sys"))
    if not files:
        raise InputError(f"no .sys files in {corpus_dir}")
    return [verify_parametric(load_system(f), cfg) for f in files]


def benchmark_table(rows: list[Verdict]) -> str:
    head = f"{'example':<16} {'verdict':<13} {'result':<7} {'t-gen ms':>10} {'t-solve ms':>11}"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(f"{r.example:<16} {r.result:<13} {r.sat_result:<7} {r.t_gen_ms:>10.1f} "
                     f"{r.t_solve_ms:>11.1f}")
    return "\n".join(lines)


def report_json(v: Verdict | list[Verdict], timings: bool = True) -> str:
    if isinstance(v, list):
        return json.dumps([r.to_json(timings) for r in v], indent=2, ensure_ascii=False)
    return json.dumps(v.to_json(timings), indent=2, ensure_ascii=False)


def default_corpus() -> Path:
    return Path(__file__).parent / "corpus" / "benchmarks"


def corpus_path(*parts: str) -> Path:
    return Path(__file__).parent.joinpath("corpus", *parts)


def parse_sizes(items: list[str] | None) -> dict[str, int]:
    out: dict[str, int] = {}
    for it in items or []:
        if "=" not in it:
            raise InputError(f"expected TYPE=K, got {it!r}")
        k, v = it.split("=", 1)
        try:
            out[k.strip()] = int(v)
        except ValueError:
            raise InputError(f"instance count for {k} is not an integer: {v!r}") from None
    return out


def unfold_sizes(S: sm.System, bound: int = 3) -> list[dict[str, int]]:
    """All size maps with parametric types in ``[1, bound]`` and literal types fixed."""
    import itertools

    keys = list(S.instances)
    ranges = [[S.instances[k].count] if S.instances[k].count is not None else list(range(1, bound + 1))
              for k in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*ranges)]


def mapping_str(m: Mapping[str, int]) -> str:
    return ",".join(f"{k}={v}" for k, v in sorted(m.items()))
