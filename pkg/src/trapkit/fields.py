"""Extended-real payoff fields on R^n (n <= 3) and grid/ball plumbing.

A field value is an ordinary float that is either finite or +inf; -inf and
NaN never escape (undefined arithmetic and domain violations collapse to
+inf).  Points are finite float vectors of length 1..3.

Grids are uniform tensor grids over the enclosing box of a ball, filtered
to the ball, ordered lexicographically by coordinates; every argmin over a
grid in this package resolves ties to the lexicographically smallest point
by taking the first minimizing index.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from trapkit import _programs
from trapkit._programs import ParseError, Predicate, compile_ast, parse_expr, unparse
from trapkit.backend import eval_program_batch

__all__ = [
    "Ball",
    "GridSpec",
    "ParseError",
    "ScalarField",
    "DEFAULT_FD_STEP",
    "GRID_POINT_CAP",
    "as_point",
    "eval_field",
    "gradient",
    "parse_field",
    "unparse_field",
]

DEFAULT_FD_STEP = 1e-5
GRID_POINT_CAP = 10**6


def as_point(p, dim: int | None = None) -> np.ndarray:
    """Validate and normalize a point: finite floats, length 1..3."""
    arr = np.asarray(p, dtype=np.float64).reshape(-1)
    if arr.size not in (1, 2, 3):
        raise ValueError(f"points must have 1..3 coordinates, got {arr.size}")
    if dim is not None and arr.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball; the stand-in for 'a neighborhood of x'."""

    center: tuple
    radius: float

    def __post_init__(self):
        c = as_point(self.center)
        object.__setattr__(self, "center", tuple(float(v) for v in c))
        object.__setattr__(self, "radius", float(self.radius))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"ball radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid over a ball's enclosing box, filtered to the ball."""

    ball: Ball
    per_axis: int = 101
    cap: int = GRID_POINT_CAP

    def __post_init__(self):
        if self.per_axis < 3:
            raise ValueError(f"per_axis must be >= 3, got {self.per_axis}")
        if self.per_axis ** self.ball.dim > self.cap:
            raise ValueError(
                f"grid of {self.per_axis}^{self.ball.dim} points exceeds cap {self.cap}"
            )

    @property
    def step(self) -> float:
        return 2.0 * self.ball.radius / (self.per_axis - 1)

    def points(self) -> np.ndarray:
        """Grid points inside the ball, lexicographically ordered, shape (N, dim)."""
        c = np.asarray(self.ball.center)
        r = self.ball.radius
        axes = [np.linspace(ci - r, ci + r, self.per_axis) for ci in c]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
        d2 = np.sum((pts - c) ** 2, axis=1)
        keep = d2 <= r * r * (1 + 1e-12)
        return np.ascontiguousarray(pts[keep])


@dataclass(eq=False)
class ScalarField:
    """Payoff function given by an expression tree over x1..xn.

    `domain`, when present, is a closed-set predicate; points outside it
    evaluate to +inf.  `analytic_grad` optionally supplies the n partial
    derivatives as expression trees.
    """

    dim: int
    body: tuple
    domain: Predicate | None = None
    analytic_grad: tuple | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2, or 3, got {self.dim}")
        if self.analytic_grad is not None:
            grad = tuple(self.analytic_grad)
            if len(grad) != self.dim:
                raise ValueError(
                    f"analytic gradient has {len(grad)} components, expected {self.dim}"
                )
            object.__setattr__(self, "analytic_grad", grad)

    def _body_prog(self):
        prog = self._cache.get("body")
        if prog is None:
            prog = compile_ast(self.body)
            self._cache["body"] = prog
        return prog

    def _grad_progs(self):
        progs = self._cache.get("grad")
        if progs is None:
            progs = [compile_ast(g) for g in self.analytic_grad]
            self._cache["grad"] = progs
        return progs

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; rows outside the domain map to +inf."""
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(
                f"dimension mismatch: field has dim {self.dim}, points {pts.shape}"
            )
        vals = eval_program_batch(self._body_prog(), pts)
        if self.domain is not None:
            inside = self.domain_mask(pts)
            if not inside.all():
                vals = np.where(inside, vals, np.inf)
        return vals

    def value(self, point) -> float:
        p = as_point(point, self.dim)
        return float(self.eval_batch(p[None, :])[0])

    def domain_mask(self, points: np.ndarray) -> np.ndarray:
        if self.domain is None:
            return np.ones(points.shape[0], dtype=bool)
        mask = np.ones(points.shape[0], dtype=bool)
        for progL, cmp_code, progR in self.domain.conjuncts:
            lhs = eval_program_batch(progL, points)
            rhs = eval_program_batch(progR, points)
            if cmp_code == _programs.CMP_LE:
                mask &= lhs <= rhs
            else:
                mask &= lhs >= rhs
        return mask


def parse_field(
    text: str,
    dim: int,
    domain: str | None = None,
    grad: list[str] | None = None,
) -> ScalarField:
    """Parse an expression (and optional domain/gradient expressions)."""
    body = parse_expr(text, dim)
    dom = Predicate.parse(domain, dim) if domain else None
    g = tuple(parse_expr(gi, dim) for gi in grad) if grad is not None else None
    return ScalarField(dim=dim, body=body, domain=dom, analytic_grad=g)


def eval_field(f: ScalarField, p) -> float:
    """Field value at a point: finite float or +inf, never NaN or -inf."""
    return f.value(p)


def unparse_field(f: ScalarField) -> str:
    return unparse(f.body)


def gradient(f: ScalarField, p, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Gradient at a point: analytic components when present, else central
    finite differences with step h per axis.  Raises if any stencil or
    gradient value is non-finite."""
    p = as_point(p, f.dim)
    if f.analytic_grad is not None:
        pts = p[None, :]
        out = np.array(
            [float(eval_program_batch(prog, pts)[0]) for prog in f._grad_progs()]
        )
        if not np.all(np.isfinite(out)):
            raise ValueError(f"analytic gradient not finite at {tuple(p)}")
        return out
    if not (h > 0):
        raise ValueError(f"finite-difference step must be positive, got {h}")
    stencil = np.repeat(p[None, :], 2 * f.dim, axis=0)
    for i in range(f.dim):
        stencil[2 * i, i] += h
        stencil[2 * i + 1, i] -= h
    vals = f.eval_batch(stencil)
    if not np.all(np.isfinite(vals)):
        raise ValueError(
            f"non-finite field value within finite-difference stencil at {tuple(p)}"
        )
    return (vals[0::2] - vals[1::2]) / (2.0 * h)
