"""Backend selection for program evaluation.

The compiled kernel (trapkit._speedups, built from Cython) is used when it
imported successfully; otherwise the NumPy executor is used.  Both produce
identical results.  The choice can be forced with the environment variable
TRAPKIT_BACKEND=python|compiled or at runtime via set_backend().
"""

import os

import numpy as np

from trapkit import _pyexec
from trapkit._programs import Program

try:
    from trapkit import _speedups

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _speedups = None
    HAVE_COMPILED = False

_VALID = ("compiled", "python")


def _initial() -> str:
    env = os.environ.get("TRAPKIT_BACKEND", "").strip().lower()
    if env:
        if env not in _VALID:
            raise ValueError(f"TRAPKIT_BACKEND must be one of {_VALID}, got {env!r}")
        if env == "compiled" and not HAVE_COMPILED:
            raise ImportError(
                "TRAPKIT_BACKEND=compiled but trapkit._speedups is not built"
            )
        return env
    return "compiled" if HAVE_COMPILED else "python"


_active = _initial()


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "compiled" and not HAVE_COMPILED:
        raise ImportError("compiled backend requested but trapkit._speedups is not built")
    _active = name


def eval_program_batch(prog: Program, points: np.ndarray) -> np.ndarray:
    """Evaluate a compiled program at every row of `points` ((N, dim) float64)."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array (N, dim)")
    if _active == "compiled" and prog.stack_size <= 64:
        return _speedups.eval_program(prog.codes, prog.operands, pts, prog.stack_size)
    return _pyexec.eval_program(prog, pts)
