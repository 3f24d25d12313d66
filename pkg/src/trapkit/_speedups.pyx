# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled executor for expression programs (the hot evaluation kernel).

Must stay semantically identical to trapkit._pyexec: IEEE double ops with
NaN and -inf collapsed to +inf after every operation.
"""

import numpy as np

from libc.math cimport INFINITY, fabs, isnan, pow, sqrt

DEF MAX_STACK = 64

cdef inline double _san(double v) nogil:
    if isnan(v) or v == -INFINITY:
        return INFINITY
    return v


def eval_program(const int[::1] codes, const double[::1] operands,
                 const double[:, ::1] points, int stack_size):
    if stack_size > MAX_STACK:
        raise ValueError("program stack too deep for compiled kernel")
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t m = codes.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double stack[MAX_STACK]
    cdef Py_ssize_t i, j
    cdef int sp, c
    cdef double a, b, v
    with nogil:
        for j in range(n):
            sp = 0
            for i in range(m):
                c = codes[i]
                if c == 0:      # CONST
                    v = operands[i]
                elif c == 1:    # VAR
                    v = points[j, <Py_ssize_t> operands[i]]
                elif c == 7:    # NEG
                    sp -= 1
                    v = _san(-stack[sp])
                elif c == 8:    # ABS
                    sp -= 1
                    v = _san(fabs(stack[sp]))
                elif c == 9:    # SQRT
                    sp -= 1
                    v = _san(sqrt(stack[sp]))
                else:
                    sp -= 2
                    a = stack[sp]
                    b = stack[sp + 1]
                    if c == 2:      # ADD
                        v = a + b
                    elif c == 3:    # SUB
                        v = a - b
                    elif c == 4:    # MUL
                        v = a * b
                    elif c == 5:    # DIV
                        v = a / b
                    elif c == 6:    # POW
                        v = pow(a, b)
                    elif c == 10:   # MIN2
                        v = a if a < b else b
                    else:           # MAX2
                        v = a if a > b else b
                    v = _san(v)
                stack[sp] = v
                sp += 1
            out[j] = stack[0]
    return out_arr
