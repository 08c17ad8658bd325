"""Kernel dispatch: compiled extension when built, numpy fallback otherwise.

Set ``TRAPINV_PURE=1`` in the environment to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

OK = _kernels_py.OK
UNSAFE = _kernels_py.UNSAFE
LIMIT = _kernels_py.LIMIT

OP_CONST = _kernels_py.OP_CONST
OP_VAR = _kernels_py.OP_VAR
OP_NOT = _kernels_py.OP_NOT
OP_AND = _kernels_py.OP_AND
OP_OR = _kernels_py.OP_OR


def _load():
    if os.environ.get("TRAPINV_PURE", "") not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels_c  # type: ignore[attr-defined]
    except ImportError:
        return _kernels_py, "python"
    return _kernels_c, "compiled"


_impl, BACKEND = _load()

eval_program = _impl.eval_program
minimal_masks = _impl.minimal_masks
trap_table = _impl.trap_table
explore = _impl.explore
