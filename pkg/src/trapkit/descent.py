"""Constructive distance-perturbed descent and its rate bounds.

Starting from a gamma-approximate trap xbar, the descent iterates

    x_{j+1} = argmin over feasible grid points of
                  theta(x) + (gamma/lam) * ||x - x_j||,

where theta(x) = L_xi(x/xbar) and the feasible set is the region grid
restricted to ||x - xbar|| <= lam (xbar itself is inserted into the grid).
Each accepted move strictly decreases theta, so the iteration terminates
on the finite grid.  The settled point x_gamma satisfies, up to grid
resolution and floating point:

    (a) theta(x_gamma) <= theta(xbar) = 0   (still a gamma-approximate trap),
    (b) ||x_gamma - xbar|| <= lam,
    (c) Q_xi(x_gamma/xbar) <= Q_xi(x/xbar) + (gamma/lam)*||x - x_gamma||
        for every grid point x of the region,

(c) holding on the full region because the telescoped descent inequality
bounds theta(x_gamma) + (gamma/lam)*||x_gamma - xbar|| by 0.

Claims are grid-relative; a failed numeric witness search at a fixed
resolution is reported as inconclusive, never as a refutation.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from trapkit.evaluations import GRID_TOL, EvaluationVerdict
from trapkit.fields import Ball, GridSpec, ScalarField, as_point, gradient
from trapkit.moves import CostModel, check_weight, unit_cost_model
from trapkit.subgrad import (
    DEFAULT_SCAN,
    ProbeSpec,
    eps_subdiff_interval_1d,
    one_sided_quotients_1d,
)
from trapkit.traps import TrapQuery, is_stationary_trap, loss_margins

__all__ = [
    "DescentTrace",
    "EkelandParams",
    "HypothesisError",
    "RateBoundRecord",
    "ekeland_descend",
    "rate_bound_check",
    "verify_perturbed_min",
]


class HypothesisError(ValueError):
    """The starting point is not a gamma-approximate trap on the region."""


@dataclass(frozen=True)
class EkelandParams:
    gamma: float
    lam: float
    region: Ball
    grid: GridSpec

    def __post_init__(self):
        if not (self.gamma > 0):
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not (self.lam > 0):
            raise ValueError(f"lam must be > 0, got {self.lam}")


@dataclass
class DescentTrace:
    iterates: list
    final: tuple
    objective_values: list


def _region_points(params: EkelandParams, xbar: np.ndarray) -> np.ndarray:
    """Region grid with xbar inserted, lexicographically ordered."""
    pts = params.grid.points()
    dists = np.linalg.norm(pts - np.asarray(params.region.center), axis=1)
    pts = pts[dists <= params.region.radius * (1 + 1e-12)]
    if not (np.linalg.norm(pts - xbar, axis=1) <= 1e-15).any():
        pts = np.vstack([pts, xbar])
    order = np.lexsort(tuple(pts[:, k] for k in reversed(range(pts.shape[1]))))
    return np.ascontiguousarray(pts[order])


def ekeland_descend(
    phi: ScalarField,
    xbar,
    xi: float,
    params: EkelandParams,
    cost: CostModel | None = None,
) -> tuple[tuple, DescentTrace]:
    """Run the perturbed descent; raises HypothesisError when xbar fails
    the gamma-approximate trap check on the region."""
    xb = as_point(xbar, phi.dim)
    xi = check_weight(xi)
    if cost is None:
        cost = unit_cost_model(phi.dim)

    hypothesis = is_stationary_trap(
        TrapQuery(
            phi=phi,
            xbar=tuple(xb),
            xi=xi,
            cost=cost,
            region=params.region,
            gamma=params.gamma,
        ),
        params.grid,
    )
    if not hypothesis:
        raise HypothesisError(
            "starting point is not a gamma-approximate trap on the region "
            f"(worst margin {hypothesis.worst_margin:.6g} < {-params.gamma:.6g})"
        )

    pts = _region_points(params, xb)
    theta = loss_margins(phi, cost, xi, xb, pts)
    feasible = np.linalg.norm(pts - xb, axis=1) <= params.lam * (1 + 1e-12)
    cand = pts[feasible]
    cand_theta = theta[feasible]
    slope = params.gamma / params.lam

    cur = int(np.flatnonzero(np.linalg.norm(cand - xb, axis=1) <= 1e-15)[0])
    iterates = [tuple(float(v) for v in cand[cur])]
    values = [float(cand_theta[cur])]
    for _ in range(cand.shape[0] + 1):
        perturbed = cand_theta + slope * np.linalg.norm(cand - cand[cur], axis=1)
        nxt = int(np.argmin(perturbed))
        if nxt == cur:
            break
        cur = nxt
        iterates.append(tuple(float(v) for v in cand[cur]))
        values.append(float(cand_theta[cur]))
    final = iterates[-1]
    return final, DescentTrace(iterates=iterates, final=final, objective_values=values)


def verify_perturbed_min(
    phi: ScalarField,
    xbar,
    xi: float,
    x_gamma,
    params: EkelandParams,
    cost: CostModel | None = None,
) -> EvaluationVerdict:
    """Independent grid scan of (c): Q_xi(x_gamma/xbar) <= Q_xi(x/xbar)
    + (gamma/lam)*||x - x_gamma|| over the whole region."""
    xb = as_point(xbar, phi.dim)
    xg = as_point(x_gamma, phi.dim)
    xi = check_weight(xi)
    if cost is None:
        cost = unit_cost_model(phi.dim)
    pts = _region_points(params, xb)
    theta = loss_margins(phi, cost, xi, xb, pts)
    theta_g = float(loss_margins(phi, cost, xi, xb, xg[None, :])[0])
    margins = theta + (params.gamma / params.lam) * np.linalg.norm(pts - xg, axis=1) - theta_g
    idx = int(np.argmin(margins))
    worst = float(margins[idx])
    holds = bool(worst >= -GRID_TOL)
    return EvaluationVerdict(
        holds=holds,
        worst_gap=worst,
        witness=None if holds else tuple(float(v) for v in pts[idx]),
    )


@dataclass
class RateBoundRecord:
    """Rate diagnostics at the settled point.

    interval is the bracket [d-, d+] of probe-accepted rates of the
    proximal loss at x_gamma (1-D); refined_rate its curvature-cancelling
    midpoint estimate; bound = gamma/lam.  intersects reports whether the
    bracket meets [-bound, bound] within one grid step of slack.
    decomposition_ok checks the bracket against slope(phi) + weighted norm
    slopes; smooth_rate is the one-term formula grad(phi) + xi*unit and
    smooth_rate_matches its agreement with refined_rate (None when not
    applicable)."""

    bound: float
    slack: float
    interval: tuple | None = None
    refined_rate: float | None = None
    witness_rate: float | None = None
    intersects: bool | None = None
    scan_intervals: list = field(default_factory=list)
    decomposition_ok: bool | None = None
    smooth_rate: float | tuple | None = None
    smooth_rate_matches: bool | None = None
    inconclusive: bool = False
    note: str = ""


def _local_probe(base: ProbeSpec, limit: float | None) -> ProbeSpec:
    if limit is None or limit <= 0:
        return base
    return ProbeSpec(
        r0=min(base.r0, limit),
        shells=base.shells,
        samples_per_shell=base.samples_per_shell,
        liminf_window=base.liminf_window,
    )


def rate_bound_check(
    phi: ScalarField,
    xbar,
    xi: float,
    x_gamma,
    params: EkelandParams,
    probe: ProbeSpec | None = None,
    scan=DEFAULT_SCAN,
) -> RateBoundRecord:
    """Check that some probe-accepted rate of Q_xi(./xbar) at x_gamma has
    norm <= gamma/lam (within one grid step), and cross-check the slope
    decomposition.  Exact-shape in 1-D; in higher dimension requires an
    analytic gradient and checks the one-term formula only."""
    xb = as_point(xbar, phi.dim)
    xg = as_point(x_gamma, phi.dim)
    xi = check_weight(xi)
    if probe is None:
        probe = ProbeSpec()
    bound = params.gamma / params.lam
    slack = params.grid.step
    at_anchor = bool(np.all(xg == xb))
    sep = float(np.linalg.norm(xg - xb))

    if phi.dim > 1:
        if phi.analytic_grad is None:
            raise ValueError(
                "rate bound in dimension > 1 requires an analytic gradient"
            )
        gphi = gradient(phi, xg)
        if at_anchor:
            # rate set = grad(phi) + xi * unit ball; minimal norm distance
            mindist = max(0.0, float(np.linalg.norm(gphi)) - xi)
            rate = tuple(float(v) for v in gphi)
        else:
            unit = (xg - xb) / sep
            vec = gphi + xi * unit
            mindist = float(np.linalg.norm(vec))
            rate = tuple(float(v) for v in vec)
        return RateBoundRecord(
            bound=bound,
            slack=slack,
            smooth_rate=rate,
            intersects=bool(mindist <= bound + slack),
            note="dimension > 1: one-term smooth formula only",
        )

    def q_eval(pts):
        return phi.eval_batch(pts) + xi * np.abs(pts[:, 0] - xb[0])

    local = _local_probe(probe, sep / 2.0 if not at_anchor else None)
    d_minus, d_plus, refined = one_sided_quotients_1d(q_eval, xg, local)
    interval = (d_minus, d_plus)
    witness = min(max(0.0, d_minus), d_plus)
    intersects = bool(d_minus <= bound + slack and d_plus >= -bound - slack)
    scan_intervals = eps_subdiff_interval_1d(q_eval, xg, 0.0, local, scan)

    pd_minus, pd_plus, p_refined = one_sided_quotients_1d(
        phi.eval_batch, xg, local
    )
    if at_anchor:
        lo, hi = pd_minus - xi, pd_plus + xi
    else:
        s = xi * math.copysign(1.0, xg[0] - xb[0])
        lo, hi = pd_minus + s, pd_plus + s
    dec_tol = 1e-6
    decomposition_ok = bool(d_minus >= lo - dec_tol and d_plus <= hi + dec_tol)

    smooth_rate = None
    smooth_matches = None
    width = pd_plus - pd_minus
    if not at_anchor and width <= 1e-4 and p_refined is not None:
        s = xi * math.copysign(1.0, xg[0] - xb[0])
        try:
            smooth_rate = float(gradient(phi, xg)[0]) + s
        except ValueError:
            smooth_rate = p_refined + s
        if refined is not None:
            smooth_matches = bool(abs(smooth_rate - refined) <= 1e-6)

    inconclusive = not intersects
    return RateBoundRecord(
        bound=bound,
        slack=slack,
        interval=interval,
        refined_rate=refined,
        witness_rate=witness,
        intersects=intersects,
        scan_intervals=scan_intervals,
        decomposition_ok=decomposition_ok,
        smooth_rate=smooth_rate,
        smooth_rate_matches=smooth_matches,
        inconclusive=inconclusive,
        note="no accepted rate within the bound at this resolution"
        if inconclusive
        else "",
    )
