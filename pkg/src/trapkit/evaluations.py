"""Linear optimistic/pessimistic evaluations and their certificates.

An evaluation l(./xbar) anchored at xbar is optimistic for a payoff g when
l matches g at the anchor and overestimates it nearby (g <= l), pessimistic
when it underestimates (g >= l).  The linear case l(y) = g(xbar)
+ <rate, y - xbar> is the workhorse: its rate plays the role of an expected
per-unit gain, and certificates below tie rates to slope inequalities of
the payoff.

"Holds on a neighborhood" is operationalized as a radius-halving search:
the supplied grid radius r is tried first, then r/2, ..., r/2^10; the
verdict reports the largest radius whose grid points all satisfy the
inequality.  A radius level with no grid point other than the anchor
cannot certify anything and is skipped.

All grid inequalities use an absolute tolerance of 1e-9.
"""

import math
from dataclasses import dataclass

import numpy as np

from trapkit.fields import Ball, GridSpec, ScalarField, as_point, gradient

GRID_TOL = 1e-9
HALVING_LEVELS = 10

__all__ = [
    "GRID_TOL",
    "EvaluationVerdict",
    "LinearEvaluation",
    "check_optimistic",
    "check_pessimistic",
    "linear_estimate",
    "proximal_evaluation_check",
    "subgradient_optimistic_cert",
    "verify_support_function",
]


@dataclass(frozen=True)
class LinearEvaluation:
    """Linear advantage estimate <rate, y - anchor> with rate x*."""

    rate: tuple
    anchor: tuple

    def __post_init__(self):
        r = np.asarray(self.rate, dtype=np.float64).reshape(-1)
        a = as_point(self.anchor)
        if r.size != a.size:
            raise ValueError(
                f"rate has {r.size} components but anchor has {a.size}"
            )
        if not np.all(np.isfinite(r)):
            raise ValueError("rate entries must be finite")
        object.__setattr__(self, "rate", tuple(float(v) for v in r))
        object.__setattr__(self, "anchor", tuple(float(v) for v in a))


@dataclass
class EvaluationVerdict:
    """Outcome of a grid inequality check.

    worst_gap is the most violating margin observed (negative = violation);
    witness is the grid point attaining it; radius is the largest passing
    radius when a neighborhood search ran.
    """

    holds: bool
    worst_gap: float
    witness: tuple | None = None
    radius: float | None = None

    def __bool__(self) -> bool:
        return self.holds


def linear_estimate(le: LinearEvaluation, y) -> float:
    """E(y/anchor) = <rate, y - anchor>."""
    ya = as_point(y, len(le.anchor))
    return float(np.dot(np.asarray(le.rate), ya - np.asarray(le.anchor)))


def _eval_batch_callable(l, g: ScalarField, xbar: np.ndarray):
    """Normalize an evaluation object to a vectorized l(points) callable.

    Accepts a LinearEvaluation (induces l(y) = g(xbar) + E(y/xbar), which
    matches g at the anchor by construction), a ScalarField, or a scalar
    callable point -> value.
    """
    if isinstance(l, LinearEvaluation):
        g_anchor = g.value(xbar)
        if not math.isfinite(g_anchor):
            raise ValueError("payoff is not finite at the anchor")
        rate = np.asarray(l.rate)
        anchor = np.asarray(l.anchor)

        def ev(pts):
            return g_anchor + (pts - anchor) @ rate

        return ev, True
    if isinstance(l, ScalarField):
        return l.eval_batch, False
    if callable(l):
        return (lambda pts: np.array([float(l(p)) for p in pts])), False
    raise TypeError(f"cannot use {type(l).__name__} as an evaluation")


def _verdict_from_margins(margins: np.ndarray, pts: np.ndarray, tol: float) -> EvaluationVerdict:
    worst_idx = int(np.argmin(margins))
    worst = float(margins[worst_idx])
    holds = bool(worst >= -tol)
    witness = None if holds else tuple(float(v) for v in pts[worst_idx])
    return EvaluationVerdict(holds=holds, worst_gap=worst, witness=witness)


def check_optimistic(g: ScalarField, l, xbar, grid: GridSpec) -> EvaluationVerdict:
    """Does l overestimate g on the grid (g(y) <= l(y) with anchor equality)?"""
    xb = as_point(xbar, g.dim)
    ev, anchored = _eval_batch_callable(l, g, xb)
    if not anchored:
        mismatch = abs(float(ev(xb[None, :])[0]) - g.value(xb))
        if not (mismatch <= GRID_TOL):
            raise ValueError(
                f"anchor-value mismatch: |l(xbar) - g(xbar)| = {mismatch:.3e}"
            )
    pts = grid.points()
    gv = g.eval_batch(pts)
    lv = ev(pts)
    with np.errstate(invalid="ignore"):
        margins = lv - gv
    # inf <= inf holds in the extended reals; an all-inf pair gives margin 0
    both_inf = np.isinf(gv) & np.isinf(lv) & (gv > 0) & (lv > 0)
    margins = np.where(both_inf, 0.0, margins)
    return _verdict_from_margins(margins, pts, GRID_TOL)


def check_pessimistic(g: ScalarField, l, xbar, grid: GridSpec) -> EvaluationVerdict:
    """Does l underestimate g on the grid (g(y) >= l(y) with anchor equality)?"""
    xb = as_point(xbar, g.dim)
    ev, anchored = _eval_batch_callable(l, g, xb)
    if not anchored:
        mismatch = abs(float(ev(xb[None, :])[0]) - g.value(xb))
        if not (mismatch <= GRID_TOL):
            raise ValueError(
                f"anchor-value mismatch: |l(xbar) - g(xbar)| = {mismatch:.3e}"
            )
    pts = grid.points()
    gv = g.eval_batch(pts)
    lv = ev(pts)
    with np.errstate(invalid="ignore"):
        margins = gv - lv
    both_inf = np.isinf(gv) & np.isinf(lv) & (gv > 0) & (lv > 0)
    margins = np.where(both_inf, 0.0, margins)
    return _verdict_from_margins(margins, pts, GRID_TOL)


def subgradient_optimistic_cert(
    phi: ScalarField, xbar, xstar, grid: GridSpec
) -> EvaluationVerdict:
    """Check the subgradient inequality phi(x) - phi(xbar) >= <x*, x - xbar>
    on the grid; a pass certifies x* as a rate of change in a linear
    optimistic evaluation of the loss around xbar."""
    xb = as_point(xbar, phi.dim)
    rate = np.asarray(xstar, dtype=np.float64).reshape(-1)
    if rate.size != phi.dim:
        raise ValueError(f"rate has {rate.size} components, expected {phi.dim}")
    phi_xb = phi.value(xb)
    if not math.isfinite(phi_xb):
        raise ValueError("payoff is not finite at the anchor")
    pts = grid.points()
    margins = phi.eval_batch(pts) - phi_xb - (pts - xb) @ rate
    return _verdict_from_margins(margins, pts, GRID_TOL)


def neighborhood_search(
    margins: np.ndarray,
    dists: np.ndarray,
    radius: float,
    tol: float = GRID_TOL,
    levels: int = HALVING_LEVELS,
) -> EvaluationVerdict:
    """Largest radius in {r, r/2, ..., r/2^levels} whose points all have
    margin >= -tol.  Points at distance ~0 (the anchor itself) are exempt;
    a level without any non-anchor point cannot certify and is skipped."""
    anchor_like = dists <= 1e-15
    best_fail = None
    for k in range(levels + 1):
        r = radius / (2.0**k)
        sel = (dists <= r * (1 + 1e-12)) & ~anchor_like
        if not sel.any():
            continue
        m = margins[sel]
        worst_idx = int(np.argmin(m))
        worst = float(m[worst_idx])
        if worst >= -tol:
            return EvaluationVerdict(holds=True, worst_gap=worst, radius=r)
        best_fail = (worst, np.flatnonzero(sel)[worst_idx])
    if best_fail is None:
        return EvaluationVerdict(holds=False, worst_gap=math.inf)
    worst, idx = best_fail
    return EvaluationVerdict(holds=False, worst_gap=worst, witness=int(idx))


def proximal_evaluation_check(
    phi: ScalarField,
    xi: float,
    xbar,
    xstar,
    eps: float,
    grid: GridSpec,
    c=None,
) -> EvaluationVerdict:
    """Check phi(x) - phi(xbar) + xi*C(xbar, x) >= <x*, x - xbar> on a
    radius-halving neighborhood search over the grid.  Requires xi > eps."""
    from trapkit.moves import CostModel, unit_cost_model

    xi = float(xi)
    eps = float(eps)
    if not (eps >= 0):
        raise ValueError(f"slope slack must be >= 0, got {eps}")
    if not (xi > eps):
        raise ValueError(
            f"weight factor must exceed the slope slack (xi={xi}, eps={eps})"
        )
    if c is None:
        c = unit_cost_model(phi.dim)
    if not isinstance(c, CostModel):
        raise TypeError("c must be a CostModel or None")
    xb = as_point(xbar, phi.dim)
    rate = np.asarray(xstar, dtype=np.float64).reshape(-1)
    phi_xb = phi.value(xb)
    if not math.isfinite(phi_xb):
        raise ValueError("payoff is not finite at the anchor")
    eta = c.rate_at(xb)
    pts = grid.points()
    dists = np.linalg.norm(pts - xb, axis=1)
    margins = phi.eval_batch(pts) - phi_xb + xi * eta * dists - (pts - xb) @ rate
    verdict = neighborhood_search(margins, dists, grid.ball.radius)
    if not verdict.holds and isinstance(verdict.witness, int):
        verdict.witness = tuple(float(v) for v in pts[verdict.witness])
    return verdict


def verify_support_function(
    s: ScalarField, phi: ScalarField, xbar, xstar, grid: GridSpec
) -> EvaluationVerdict:
    """Verify a supplied support candidate s: s(xbar) = phi(xbar), s <= phi
    on the grid, and grad s(xbar) = x* within 1e-6."""
    xb = as_point(xbar, phi.dim)
    rate = np.asarray(xstar, dtype=np.float64).reshape(-1)
    phi_xb = phi.value(xb)
    s_xb = s.value(xb)
    anchored = math.isfinite(phi_xb) and abs(s_xb - phi_xb) <= GRID_TOL
    grad_ok = False
    if anchored:
        try:
            grad_ok = bool(np.all(np.abs(gradient(s, xb) - rate) <= 1e-6))
        except ValueError:
            grad_ok = False
    pts = grid.points()
    sv = s.eval_batch(pts)
    pv = phi.eval_batch(pts)
    with np.errstate(invalid="ignore"):
        margins = pv - sv
    both_inf = np.isinf(sv) & np.isinf(pv) & (sv > 0) & (pv > 0)
    margins = np.where(both_inf, 0.0, margins)
    verdict = _verdict_from_margins(margins, pts, GRID_TOL)
    verdict.holds = verdict.holds and anchored and grad_ok
    return verdict
