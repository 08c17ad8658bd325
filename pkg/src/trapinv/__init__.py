"""Deadlock-freedom verification of bounded and parametric component systems
through trap invariants."""
from .errors import (CapExceeded, InputError, NotPositive, ShapeError, TrapInvError, TypeMismatch,
                     UnboundVariable, UnsafeNet)
from .kernels import BACKEND
from .parser import load_system, parse_system
from .pipeline import (RunConfig, Verdict, run_benchmarks, verify, verify_bounded_exact,
                       verify_bounded_symbolic, verify_parametric)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CapExceeded", "InputError", "NotPositive", "RunConfig", "ShapeError", "TrapInvError",
    "TypeMismatch", "UnboundVariable", "UnsafeNet", "Verdict", "load_system", "parse_system",
    "run_benchmarks", "verify", "verify_bounded_exact", "verify_bounded_symbolic",
    "verify_parametric",
]
