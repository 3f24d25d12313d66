"""Pure-NumPy executor for compiled expression programs.

Semantics match trapkit._speedups bit for bit: every operation is an
elementwise IEEE double operation followed by the sanitize rule
(NaN -> +inf, -inf -> +inf).  min/max are implemented with explicit
comparisons so signed zeros behave exactly like the C kernel.
"""

import numpy as np

from trapkit._programs import (
    OP_ABS,
    OP_ADD,
    OP_CONST,
    OP_DIV,
    OP_MAX2,
    OP_MIN2,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_SQRT,
    OP_SUB,
    OP_VAR,
    Program,
)

_NEGINF = -np.inf


def _san(v: np.ndarray) -> np.ndarray:
    bad = np.isnan(v) | (v == _NEGINF)
    if bad.any():
        v = np.where(bad, np.inf, v)
    return v


def eval_program(prog: Program, points: np.ndarray) -> np.ndarray:
    """Evaluate `prog` at every row of `points` (shape (N, dim))."""
    n = points.shape[0]
    stack: list = [None] * prog.stack_size
    sp = 0
    codes = prog.codes
    operands = prog.operands
    with np.errstate(all="ignore"):
        for i in range(codes.shape[0]):
            c = codes[i]
            if c == OP_CONST:
                stack[sp] = np.full(n, operands[i])
                sp += 1
            elif c == OP_VAR:
                stack[sp] = points[:, int(operands[i])]
                sp += 1
            elif c == OP_NEG:
                stack[sp - 1] = _san(-stack[sp - 1])
            elif c == OP_ABS:
                stack[sp - 1] = _san(np.abs(stack[sp - 1]))
            elif c == OP_SQRT:
                stack[sp - 1] = _san(np.sqrt(stack[sp - 1]))
            else:
                b = stack[sp - 1]
                a = stack[sp - 2]
                sp -= 1
                if c == OP_ADD:
                    v = a + b
                elif c == OP_SUB:
                    v = a - b
                elif c == OP_MUL:
                    v = a * b
                elif c == OP_DIV:
                    v = a / b
                elif c == OP_POW:
                    v = np.power(a, b)
                elif c == OP_MIN2:
                    v = np.where(a < b, a, b)
                elif c == OP_MAX2:
                    v = np.where(a > b, a, b)
                else:  # pragma: no cover
                    raise ValueError(f"bad opcode {c}")
                stack[sp - 1] = _san(v)
    out = stack[0]
    # VAR-only programs alias the input; hand back an owned array.
    if out.base is not None or out is points:
        out = out.copy()
    return out
