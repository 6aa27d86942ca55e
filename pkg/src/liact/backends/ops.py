"""Bytecode representation for compiled scalar expressions.

Expression ASTs are lowered to a tiny stack machine so the flow kernels
(pure-Python or Cython) can evaluate vector-field components without
touching Python objects in the inner loop.
"""

from dataclasses import dataclass

import numpy as np

OP_CONST = 0   # push consts[arg]
OP_VAR = 1     # push values[arg]
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_POW = 7     # integer exponent in arg
OP_SIN = 8
OP_COS = 9
OP_EXP = 10


@dataclass(frozen=True)
class Program:
    """One compiled scalar expression: rows of (opcode, arg)."""

    code: np.ndarray      # int32, shape (k, 2)
    consts: np.ndarray    # float64
    max_stack: int
    n_vars: int


def flatten_programs(programs):
    """Concatenate programs for the kernel call.

    Returns (codes, starts, consts, max_stack, n_vars); const indices are
    rebased into the shared constant pool.
    """
    codes = []
    starts = [0]
    consts = []
    max_stack = 1
    n_vars = 0
    for p in programs:
        code = p.code.copy()
        for row in code:
            if row[0] == OP_CONST:
                row[1] += len(consts)
        consts.extend(p.consts.tolist())
        codes.append(code)
        starts.append(starts[-1] + len(code))
        max_stack = max(max_stack, p.max_stack)
        n_vars = max(n_vars, p.n_vars)
    all_code = np.concatenate(codes) if codes else np.zeros((0, 2), dtype=np.int32)
    return (
        np.ascontiguousarray(all_code, dtype=np.int32),
        np.asarray(starts, dtype=np.int32),
        np.asarray(consts, dtype=np.float64),
        max_stack,
        n_vars,
    )


@dataclass
class RawTrajectory:
    """Accepted integration steps plus the stop reason."""

    status: int           # rkconst.COMPLETED / ESCAPED / BLOWUP
    ts: np.ndarray
    ys: np.ndarray        # shape (len(ts), dim)
    fs: np.ndarray        # RHS at each accepted state, for dense output
    err_est: float
    naccept: int
    nreject: int
    escape_coord: int = -1
