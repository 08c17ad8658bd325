# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernels; same contracts as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint8_t, uint64_t, int32_t, int64_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

cnp.import_array()

DEF OP_CONST = 0
DEF OP_VAR = 1
DEF OP_NOT = 2
DEF OP_AND = 3
DEF OP_OR = 4
DEF MAX_STACK = 4096

OK = 0
UNSAFE = 1
LIMIT = 2


cdef uint64_t[6] LANE_PATTERN = [
    0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
    0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL]


def eval_program(code, int nvars):
    # bit-parallel: one uint64 word carries 64 consecutive valuations
    cdef int32_t[::1] prog = np.ascontiguousarray(code, dtype=np.int32)
    cdef Py_ssize_t n = prog.shape[0]
    cdef uint64_t size = (<uint64_t>1) << nvars
    out_arr = np.zeros(size, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    cdef uint64_t stack[MAX_STACK]
    cdef int sp, op, arg, k
    cdef Py_ssize_t pc
    cdef uint64_t base, word, acc, lanes, nwords, lane
    if n // 2 > MAX_STACK:
        raise ValueError("program too long for compiled kernel")
    lanes = 64 if size >= 64 else size
    nwords = size // lanes
    for base in range(nwords):
        sp = 0
        pc = 0
        while pc < n:
            op = prog[pc]
            arg = prog[pc + 1]
            pc += 2
            if op == OP_CONST:
                stack[sp] = 0xFFFFFFFFFFFFFFFFULL if arg != 0 else 0
                sp += 1
            elif op == OP_VAR:
                if arg < 6:
                    stack[sp] = LANE_PATTERN[arg]
                elif ((base * 64) >> arg) & 1:
                    stack[sp] = 0xFFFFFFFFFFFFFFFFULL
                else:
                    stack[sp] = 0
                sp += 1
            elif op == OP_NOT:
                stack[sp - 1] = ~stack[sp - 1]
            elif op == OP_AND:
                acc = 0xFFFFFFFFFFFFFFFFULL
                for k in range(arg):
                    acc &= stack[sp - 1 - k]
                sp -= arg
                stack[sp] = acc
                sp += 1
            elif op == OP_OR:
                acc = 0
                for k in range(arg):
                    acc |= stack[sp - 1 - k]
                sp -= arg
                stack[sp] = acc
                sp += 1
            else:
                raise ValueError("bad opcode")
        if sp != 1:
            raise ValueError("malformed program")
        word = stack[0]
        for lane in range(lanes):
            out[base * lanes + lane] = (word >> lane) & 1
    return out_arr


def minimal_masks(table, int nvars):
    cdef uint8_t[::1] tab = np.ascontiguousarray(table, dtype=np.uint8)
    cdef uint64_t size = (<uint64_t>1) << nvars
    below_arr = np.array(tab, dtype=np.uint8)
    cdef uint8_t[::1] below = below_arr
    out_arr = np.zeros(size, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    cdef uint64_t m, bit
    cdef int i
    cdef uint8_t strict
    for i in range(nvars):
        bit = (<uint64_t>1) << i
        for m in range(size):
            if m & bit:
                below[m] |= below[m ^ bit]
    for m in range(size):
        if not tab[m]:
            continue
        strict = 0
        for i in range(nvars):
            bit = (<uint64_t>1) << i
            if (m & bit) and below[m ^ bit]:
                strict = 1
                break
        out[m] = 1 - strict
    return out_arr


def trap_table(pre, post, int nplaces):
    cdef uint64_t[::1] pre_a = np.ascontiguousarray(pre, dtype=np.uint64)
    cdef uint64_t[::1] post_a = np.ascontiguousarray(post, dtype=np.uint64)
    cdef Py_ssize_t nt = pre_a.shape[0]
    cdef uint64_t size = (<uint64_t>1) << nplaces
    out_arr = np.ones(size, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    cdef uint64_t w
    cdef Py_ssize_t t
    for w in range(size):
        for t in range(nt):
            if (w & pre_a[t]) and not (w & post_a[t]):
                out[w] = 0
                break
    return out_arr


def explore(pre, post, init, int64_t limit):
    cdef cnp.ndarray[uint64_t, ndim=1] pre_a = np.ascontiguousarray(pre, dtype=np.uint64)
    cdef cnp.ndarray[uint64_t, ndim=1] post_a = np.ascontiguousarray(post, dtype=np.uint64)
    cdef Py_ssize_t nt = pre_a.shape[0]
    cdef vector[uint64_t] markings
    cdef vector[int64_t] parent
    cdef vector[int64_t] via
    cdef unordered_map[uint64_t, int64_t] index
    cdef uint64_t m, p, q, rest, nxt
    cdef Py_ssize_t head = 0, t
    cdef int status = OK
    markings.push_back(<uint64_t>init)
    parent.push_back(-1)
    via.push_back(-1)
    index[<uint64_t>init] = 0
    while head < <Py_ssize_t>markings.size() and status == OK:
        m = markings[head]
        for t in range(nt):
            p = pre_a[t]
            q = post_a[t]
            if (m & p) != p:
                continue
            rest = m & ~p
            nxt = rest | q
            if rest & q:
                markings.push_back(nxt)
                parent.push_back(head)
                via.push_back(t)
                status = UNSAFE
                break
            if index.count(nxt) == 0:
                if <int64_t>markings.size() >= limit:
                    status = LIMIT
                    break
                index[nxt] = markings.size()
                markings.push_back(nxt)
                parent.push_back(head)
                via.push_back(t)
        head += 1
    return (status, [int(x) for x in markings], [int(x) for x in parent],
            [int(x) for x in via])
