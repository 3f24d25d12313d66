"""Stationary-trap detection and certificates.

A position xbar is a stationary trap for weight factor xi when the
not-worthwhile-to-change loss L_xi(x/xbar) = phi(x) - phi(xbar)
+ xi*C(xbar, x) stays nonnegative near xbar (>= -gamma for the
gamma-approximate version); it is then not worthwhile to quit.  Direct
detection scans a grid.  The certificate route is sufficient only: an
eps-subgradient x* whose linear estimate <x*, x - xbar> is nonnegative
(>= -gamma) on a neighborhood certifies a trap for every weight factor
xi > eps, reported as the open half-line xi_range = (eps, inf); the
endpoint xi = eps is never claimed.

Trap verdicts are grid-relative: a pass certifies the inequality on the
sampled points only, and the verdict records the grid step so callers can
tighten it.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from trapkit.evaluations import GRID_TOL
from trapkit.fields import GridSpec, ScalarField, as_point, Ball
from trapkit.moves import CostModel, check_weight, unit_cost_model
from trapkit.subgrad import (
    PROBE_TOL,
    ProbeSpec,
    SubgradientQuery,
    eps_subdiff_interval_1d,
    eps_subgrad_member,
    liminf_estimate,
    min_eps_factor,
)

STRICT_TOL = 1e-9

__all__ = [
    "TrapQuery",
    "TrapVerdict",
    "TrapClassification",
    "approx_trap_certificate",
    "classify_trap",
    "is_stationary_trap",
    "trap_certificate",
]


@dataclass
class TrapQuery:
    """Inputs of a direct trap check.  gamma = 0 means an exact trap;
    strict demands L_xi > 0 off-center and requires gamma = 0."""

    phi: ScalarField
    xbar: tuple
    xi: float = 0.0
    cost: CostModel | None = None
    region: Ball | None = None
    gamma: float = 0.0
    strict: bool = False
    whole_domain: bool = False

    def __post_init__(self):
        self.xbar = tuple(float(v) for v in as_point(self.xbar, self.phi.dim))
        self.xi = check_weight(self.xi)
        self.gamma = float(self.gamma)
        if not (self.gamma >= 0):
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.strict and self.gamma != 0.0:
            raise ValueError("a strict trap check requires gamma = 0")
        if self.cost is None:
            self.cost = unit_cost_model(self.phi.dim)


@dataclass
class TrapVerdict:
    is_trap: bool
    worst_margin: float
    witness: tuple | None = None
    xi_range: tuple | None = None  # (eps, inf): certified for all xi > eps
    scope: str = "local"
    grid_step: float | None = None
    flat_enough: bool | None = None
    subgrad_estimate: float | None = None

    def __bool__(self) -> bool:
        return self.is_trap


def loss_margins(
    phi: ScalarField, cost: CostModel, xi: float, xbar: np.ndarray, pts: np.ndarray
) -> np.ndarray:
    """L_xi(x/xbar) for every row of pts (vectorized; +inf propagates)."""
    phi_xb = phi.value(xbar)
    if not math.isfinite(phi_xb):
        raise ValueError("payoff is not finite at the anchor")
    eta = cost.rate_at(xbar)
    dists = np.linalg.norm(pts - xbar, axis=1)
    return phi.eval_batch(pts) - phi_xb + xi * eta * dists


def is_stationary_trap(q: TrapQuery, grid: GridSpec) -> TrapVerdict:
    """Grid check of L_xi(x/xbar) >= -gamma over the query region
    (strict: L_xi > 0 off-center, the center itself exempt)."""
    xb = np.asarray(q.xbar)
    region = q.region if q.region is not None else grid.ball
    pts = grid.points()
    dists_region = np.linalg.norm(pts - np.asarray(region.center), axis=1)
    pts = pts[dists_region <= region.radius * (1 + 1e-12)]
    if pts.shape[0] == 0:
        raise ValueError("no grid points fall inside the query region")
    margins = loss_margins(q.phi, q.cost, q.xi, xb, pts)
    off_center = np.linalg.norm(pts - xb, axis=1) > 1e-15
    scope = "global" if q.whole_domain else "local"
    if q.strict:
        m = margins[off_center]
        if m.size == 0:
            raise ValueError("strict check needs at least one off-center grid point")
        idx = int(np.argmin(m))
        worst = float(m[idx])
        ok = bool(worst > STRICT_TOL)
        witness = None if ok else tuple(float(v) for v in pts[off_center][idx])
        return TrapVerdict(ok, worst, witness, scope=scope, grid_step=grid.step)
    idx = int(np.argmin(margins))
    worst = float(margins[idx])
    ok = bool(worst >= -q.gamma - GRID_TOL)
    witness = None if ok else tuple(float(v) for v in pts[idx])
    return TrapVerdict(ok, worst, witness, scope=scope, grid_step=grid.step)


def trap_certificate(
    phi: ScalarField, xbar, eps: float, xstar, grid: GridSpec,
    probe: ProbeSpec | None = None,
) -> TrapVerdict:
    """Certificate: x* is an eps-subgradient at xbar and its linear
    estimate is >= 0 on the grid.  A pass certifies a stationary trap for
    every weight factor xi > eps."""
    if probe is None:
        probe = ProbeSpec()
    member = eps_subgrad_member(
        SubgradientQuery(phi, tuple(as_point(xbar, phi.dim)), tuple(np.atleast_1d(xstar)), eps),
        probe,
    )
    xb = as_point(xbar, phi.dim)
    rate = np.asarray(xstar, dtype=np.float64).reshape(-1)
    pts = grid.points()
    estimates = (pts - xb) @ rate
    idx = int(np.argmin(estimates))
    e_min = float(estimates[idx])
    ok = bool(member.member and e_min >= -GRID_TOL)
    return TrapVerdict(
        is_trap=ok,
        worst_margin=e_min,
        witness=None if e_min >= -GRID_TOL else tuple(float(v) for v in pts[idx]),
        xi_range=(float(eps), math.inf) if ok else None,
        grid_step=grid.step,
        subgrad_estimate=member.estimate,
    )


def approx_trap_certificate(
    phi: ScalarField,
    xbar,
    eps: float,
    xstar,
    gamma: float,
    grid: GridSpec,
    probe: ProbeSpec | None = None,
) -> TrapVerdict:
    """Certificate for a gamma-approximate trap: eps-subgradient membership
    plus linear estimate >= -gamma on the grid.  flat_enough records
    whether ||x*||*radius <= gamma already forces the estimate bound."""
    gamma = float(gamma)
    if not (gamma > 0):
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if probe is None:
        probe = ProbeSpec()
    member = eps_subgrad_member(
        SubgradientQuery(phi, tuple(as_point(xbar, phi.dim)), tuple(np.atleast_1d(xstar)), eps),
        probe,
    )
    xb = as_point(xbar, phi.dim)
    rate = np.asarray(xstar, dtype=np.float64).reshape(-1)
    pts = grid.points()
    estimates = (pts - xb) @ rate
    idx = int(np.argmin(estimates))
    e_min = float(estimates[idx])
    ok = bool(member.member and e_min >= -gamma - GRID_TOL)
    flat = bool(float(np.linalg.norm(rate)) * grid.ball.radius <= gamma + GRID_TOL)
    return TrapVerdict(
        is_trap=ok,
        worst_margin=e_min,
        witness=None if e_min >= -gamma - GRID_TOL else tuple(float(v) for v in pts[idx]),
        xi_range=(float(eps), math.inf) if ok else None,
        grid_step=grid.step,
        flat_enough=flat,
        subgrad_estimate=member.estimate,
    )


@dataclass
class TrapClassification:
    """Case taxonomy at a point: the flat route (is the zero rate an
    eps-subgradient for a scanned eps, and at which minimal eps), the
    minimizer route (xi = 0), and representative certified nonzero rates."""

    zero_rate_min_eps: float
    flat_at: float | None
    local_min: bool
    certified_rates: list = field(default_factory=list)


def classify_trap(
    phi: ScalarField,
    xbar,
    probe: ProbeSpec | None = None,
    eps_scan=tuple(round(0.1 * k, 1) for k in range(21)),
) -> TrapClassification:
    if probe is None:
        probe = ProbeSpec()
    xb = as_point(xbar, phi.dim)
    zero = np.zeros(phi.dim)
    eps_min = min_eps_factor(phi, tuple(xb), tuple(zero), probe)
    flat_at = None
    for e in eps_scan:
        if eps_min <= e + 1e-9:
            flat_at = float(e)
            break

    phi_xb = phi.value(xb)
    worst = math.inf
    for pts in probe.shell_points(xb, phi.dim):
        worst = min(worst, float(np.min(phi.eval_batch(pts))) - phi_xb)
    local_min = bool(worst >= -GRID_TOL)

    certified: list = []
    if phi.dim == 1:
        for lo, hi in eps_subdiff_interval_1d(phi, tuple(xb), 0.0, probe):
            for r in {lo, hi}:
                if abs(r) > 1e-12:
                    certified.append((float(r),))
        certified.sort()
    else:
        for axis in range(phi.dim):
            for mag in (-1.0, -0.5, 0.5, 1.0):
                rate = np.zeros(phi.dim)
                rate[axis] = mag
                if liminf_estimate(phi, xb, rate, probe, phi.dim) >= -PROBE_TOL:
                    certified.append(tuple(float(v) for v in rate))
    return TrapClassification(
        zero_rate_min_eps=float(eps_min),
        flat_at=flat_at,
        local_min=local_min,
        certified_rates=certified,
    )
