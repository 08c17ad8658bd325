"""Pure-Python (numpy) implementations of the enumeration kernels.

These are the reference versions; ``_kernels_c`` mirrors every function here
with the same signature and return conventions.
"""
from __future__ import annotations

from collections import deque

import numpy as np

OP_CONST = 0
OP_VAR = 1
OP_NOT = 2
OP_AND = 3
OP_OR = 4

# explore() status codes
OK = 0
UNSAFE = 1
LIMIT = 2


def eval_program(code: np.ndarray, nvars: int) -> np.ndarray:
    """Evaluate a postfix formula program on every valuation of ``nvars`` bits.

    ``code`` is a flat int32 array of (opcode, argument) pairs.  Entry ``m`` of
    the result is 1 iff the valuation whose true variables are the set bits of
    ``m`` satisfies the formula.
    """
    size = 1 << nvars
    masks = np.arange(size, dtype=np.int64)
    stack: list[np.ndarray] = []
    for pc in range(0, len(code), 2):
        op, arg = int(code[pc]), int(code[pc + 1])
        if op == OP_CONST:
            stack.append(np.full(size, bool(arg)))
        elif op == OP_VAR:
            stack.append(((masks >> arg) & 1).astype(bool))
        elif op == OP_NOT:
            stack[-1] = ~stack[-1]
        elif op == OP_AND or op == OP_OR:
            args = stack[len(stack) - arg:]
            del stack[len(stack) - arg:]
            if not args:
                stack.append(np.full(size, op == OP_AND))
                continue
            acc = args[0].copy()
            for a in args[1:]:
                if op == OP_AND:
                    acc &= a
                else:
                    acc |= a
            stack.append(acc)
        else:
            raise ValueError(f"bad opcode {op}")
    if len(stack) != 1:
        raise ValueError("malformed program")
    return stack[0].astype(np.uint8)


def minimal_masks(table: np.ndarray, nvars: int) -> np.ndarray:
    """Mark the inclusion-minimal set bits of an indicator table over 2^nvars masks."""
    below = table.astype(bool).copy()
    # subset-sum transform: below[m] = OR of table over submasks of m
    for i in range(nvars):
        view = below.reshape(-1, 2, 1 << i)
        view[:, 1, :] |= view[:, 0, :]
    strict = np.zeros_like(below)
    for i in range(nvars):
        s = strict.reshape(-1, 2, 1 << i)
        b = below.reshape(-1, 2, 1 << i)
        s[:, 1, :] |= b[:, 0, :]
    return (table.astype(bool) & ~strict).astype(np.uint8)


def trap_table(pre: np.ndarray, post: np.ndarray, nplaces: int) -> np.ndarray:
    """Indicator of traps: every transition consuming from W also produces into W."""
    w = np.arange(1 << nplaces, dtype=np.uint64)
    ok = np.ones(w.shape, dtype=bool)
    for p, q in zip(pre.tolist(), post.tolist()):
        ok &= ((w & np.uint64(p)) == 0) | ((w & np.uint64(q)) != 0)
    return ok.astype(np.uint8)


def explore(pre: np.ndarray, post: np.ndarray, init: int, limit: int):
    """Breadth-first reachability over 1-safe bitmask markings.

    Returns ``(status, markings, parent, via)``: ``parent[k]`` is the index of
    the marking from which ``markings[k]`` was first reached and ``via[k]``
    the transition fired (-1 for the initial marking).  On a 1-safety
    violation the offending successor is appended last and status is UNSAFE.
    """
    pre_l = [int(x) for x in pre]
    post_l = [int(x) for x in post]
    markings = [init]
    parent = [-1]
    via = [-1]
    index = {init: 0}
    queue = deque([0])
    while queue:
        k = queue.popleft()
        m = markings[k]
        for t, (p, q) in enumerate(zip(pre_l, post_l)):
            if m & p != p:
                continue
            rest = m & ~p
            nxt = rest | q
            if rest & q:
                markings.append(nxt)
                parent.append(k)
                via.append(t)
                return UNSAFE, markings, parent, via
            if nxt not in index:
                if len(markings) >= limit:
                    return LIMIT, markings, parent, via
                index[nxt] = len(markings)
                markings.append(nxt)
                parent.append(k)
                via.append(t)
                queue.append(len(markings) - 1)
    return OK, markings, parent, via
