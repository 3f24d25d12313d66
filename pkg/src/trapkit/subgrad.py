"""Slope probes: epsilon-subgradients, proximal subgradients, and the
minimal slope slack, estimated by shrinking-shell sampling.

A rate x* is an epsilon-subgradient of phi at xbar when the difference
quotient

    q(x) = (phi(x) - phi(xbar) - <x*, x - xbar>) / ||x - xbar||

has liminf >= -eps as x -> xbar.  The probe discretizes the liminf with a
ladder of annular shells of halving radius around xbar; the estimate is
the minimum of per-shell minima over the innermost `liminf_window` shells,
so far-field behavior cannot contaminate the limit.  Estimates carry an
absolute acceptance tolerance of 1e-6.

The limiting-set sampler in this module is an under-approximation by
construction: it reports slope clusters it finds and guarantees nothing
about completeness.
"""

import math
from dataclasses import dataclass

import numpy as np

from trapkit.evaluations import neighborhood_search
from trapkit.fields import GridSpec, ScalarField, as_point

PROBE_TOL = 1e-6
DEFAULT_SCAN = (-10.0, 10.0, 0.01)

__all__ = [
    "PROBE_TOL",
    "DEFAULT_SCAN",
    "ProbeSpec",
    "ProbeVerdict",
    "SubgradientQuery",
    "eps_subdiff_interval_1d",
    "eps_subgrad_member",
    "limiting_subdiff_sample_1d",
    "min_eps_factor",
    "proximal_subgrad_member",
]

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class ProbeSpec:
    """Shrinking-shell sampling plan around a point.

    Shell k (k = 0..shells-1) covers distances [r0/2^(k+1), r0/2^k]; the
    liminf/limsup estimate uses the `liminf_window` innermost shells.
    """

    r0: float = 0.5
    shells: int = 12
    samples_per_shell: int = 64
    liminf_window: int = 3

    def __post_init__(self):
        if not (self.r0 > 0):
            raise ValueError(f"probe radius must be positive, got {self.r0}")
        if self.shells < 4:
            raise ValueError(f"need at least 4 shells, got {self.shells}")
        if self.samples_per_shell < 8:
            raise ValueError(
                f"need at least 8 samples per shell, got {self.samples_per_shell}"
            )
        if not (1 <= self.liminf_window <= self.shells):
            raise ValueError(
                f"liminf window must lie in [1, {self.shells}], got {self.liminf_window}"
            )

    def shell_radii(self) -> np.ndarray:
        return self.r0 / (2.0 ** np.arange(self.shells))

    def _directions(self, dim: int) -> np.ndarray:
        if dim == 1:
            return np.array([[1.0], [-1.0]])
        if dim == 2:
            theta = 2.0 * math.pi * np.arange(16) / 16.0
            return np.stack([np.cos(theta), np.sin(theta)], axis=1)
        n = 16
        i = np.arange(n)
        z = 1.0 - 2.0 * (i + 0.5) / n
        rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        ang = i * _GOLDEN_ANGLE
        return np.stack([rho * np.cos(ang), rho * np.sin(ang), z], axis=1)

    def shell_points(self, center, dim: int) -> list[np.ndarray]:
        """Deterministic sample points per shell, outer shell first."""
        c = as_point(center, dim)
        dirs = self._directions(dim)
        ndir = dirs.shape[0]
        ndist = max(2, self.samples_per_shell // ndir)
        shells = []
        for r in self.shell_radii():
            dists = np.linspace(r / 2.0, r, ndist)
            pts = (dists[:, None, None] * dirs[None, :, :]).reshape(-1, dim) + c
            shells.append(pts)
        return shells


@dataclass
class ProbeVerdict:
    """Membership verdict with the underlying liminf/limsup estimate."""

    member: bool
    estimate: float
    radius: float | None = None

    def __bool__(self) -> bool:
        return self.member


@dataclass
class SubgradientQuery:
    phi: ScalarField
    xbar: tuple
    xstar: tuple
    eps: float = 0.0

    def __post_init__(self):
        xb = as_point(self.xbar, self.phi.dim)
        self.xbar = tuple(float(v) for v in xb)
        rate = np.asarray(self.xstar, dtype=np.float64).reshape(-1)
        if rate.size != self.phi.dim:
            raise ValueError(
                f"rate has {rate.size} components, expected {self.phi.dim}"
            )
        self.xstar = tuple(float(v) for v in rate)
        self.eps = float(self.eps)
        if not (self.eps >= 0):
            raise ValueError(f"slope slack must be >= 0, got {self.eps}")


def _as_batch(fieldlike, dim: int):
    if isinstance(fieldlike, ScalarField):
        if fieldlike.dim != dim:
            raise ValueError(
                f"dimension mismatch: field has dim {fieldlike.dim}, expected {dim}"
            )
        return fieldlike.eval_batch
    if callable(fieldlike):
        return fieldlike
    raise TypeError(f"cannot evaluate {type(fieldlike).__name__} as a field")


def quotient_samples(fieldlike, xbar, probe: ProbeSpec, dim: int):
    """Per-shell quotient ingredients around xbar, outer shell first.

    Returns a list of (base, units, dists) with base = (phi(x) - phi(xbar))
    / ||x - xbar|| and units the unit displacement vectors.
    """
    xb = as_point(xbar, dim)
    ev = _as_batch(fieldlike, dim)
    phi_xb = float(ev(xb[None, :])[0])
    if not math.isfinite(phi_xb):
        raise ValueError(f"payoff is not finite at {tuple(xb)}")
    out = []
    for pts in probe.shell_points(xb, dim):
        delta = pts - xb
        dists = np.linalg.norm(delta, axis=1)
        units = delta / dists[:, None]
        base = (ev(pts) - phi_xb) / dists
        out.append((base, units, dists))
    return out


def _window(shell_data, m: int):
    return shell_data[-m:]


def liminf_estimate(fieldlike, xbar, xstar, probe: ProbeSpec, dim: int) -> float:
    rate = np.asarray(xstar, dtype=np.float64).reshape(-1)
    shells = quotient_samples(fieldlike, xbar, probe, dim)
    est = math.inf
    for base, units, _ in _window(shells, probe.liminf_window):
        est = min(est, float(np.min(base - units @ rate)))
    return est


def eps_subgrad_member(q: SubgradientQuery, probe: ProbeSpec | None = None) -> ProbeVerdict:
    """Is x* an eps-subgradient of phi at xbar, within probe resolution?"""
    if probe is None:
        probe = ProbeSpec()
    est = liminf_estimate(q.phi, q.xbar, q.xstar, probe, q.phi.dim)
    return ProbeVerdict(member=bool(est >= -q.eps - PROBE_TOL), estimate=est)


def min_eps_factor(phi, xbar, xstar, probe: ProbeSpec | None = None) -> float:
    """Smallest eps for which (xbar, x*) passes the membership probe."""
    if probe is None:
        probe = ProbeSpec()
    dim = phi.dim if isinstance(phi, ScalarField) else len(as_point(xbar))
    est = liminf_estimate(phi, xbar, xstar, probe, dim)
    if est == -math.inf:
        return math.inf
    return max(0.0, -est)


def _scan_lattice(scan) -> np.ndarray:
    lo, hi, step = (float(v) for v in scan)
    if not (step > 0) or hi < lo:
        raise ValueError(f"empty scan range {scan}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def eps_subdiff_interval_1d(
    phi, xbar, eps: float, probe: ProbeSpec | None = None, scan=DEFAULT_SCAN
) -> list[tuple[float, float]]:
    """Scan candidate rates on a 1-D lattice and merge the accepted ones
    into maximal closed intervals [lo, hi] (endpoints are lattice points)."""
    eps = float(eps)
    if not (eps >= 0):
        raise ValueError(f"slope slack must be >= 0, got {eps}")
    if probe is None:
        probe = ProbeSpec()
    dim = phi.dim if isinstance(phi, ScalarField) else 1
    if dim != 1:
        raise ValueError("rate-interval scan requires a 1-D field")
    shells = quotient_samples(phi, xbar, probe, 1)
    window = _window(shells, probe.liminf_window)
    base = np.concatenate([b for b, _, _ in window])
    units = np.concatenate([u[:, 0] for _, u, _ in window])
    xs = _scan_lattice(scan)
    ests = np.min(base[None, :] - xs[:, None] * units[None, :], axis=1)
    accepted = ests >= -eps - PROBE_TOL
    intervals = []
    i = 0
    n = xs.size
    while i < n:
        if accepted[i]:
            j = i
            while j + 1 < n and accepted[j + 1]:
                j += 1
            intervals.append((float(xs[i]), float(xs[j])))
            i = j + 1
        else:
            i += 1
    return intervals


def one_sided_quotients_1d(fieldlike, xbar, probe: ProbeSpec):
    """Bracket [d-, d+] of the rates accepted by the membership probe at
    eps = 0, plus a symmetric slope estimate from the innermost samples.

    d- is the largest left difference quotient (phi(xbar) - phi(x)) /
    (xbar - x) over the window, d+ the smallest right quotient; a rate
    passes the probe at eps = 0 iff it lies in [d- - tol, d+ + tol].
    """
    shells = quotient_samples(fieldlike, xbar, probe, 1)
    window = _window(shells, probe.liminf_window)
    d_minus = -math.inf
    d_plus = math.inf
    inner_base, inner_units, inner_dists = window[-1]
    for base, units, _ in window:
        right = base[units[:, 0] > 0]
        left = -base[units[:, 0] < 0]
        if right.size:
            d_plus = min(d_plus, float(np.min(right)))
        if left.size:
            d_minus = max(d_minus, float(np.max(left)))
    # symmetric estimate at the innermost sampled distance: the mean of the
    # matching left/right quotients cancels the curvature term
    k = int(np.argmin(inner_dists))
    d = inner_dists[k]
    match = np.isclose(inner_dists, d, rtol=1e-12)
    right_q = inner_base[match & (inner_units[:, 0] > 0)]
    left_q = -inner_base[match & (inner_units[:, 0] < 0)]
    refined = None
    if right_q.size and left_q.size:
        refined = float((right_q[0] + left_q[0]) / 2.0)
    return d_minus, d_plus, refined


def proximal_subgrad_member(
    phi: ScalarField, xbar, v, rho: float, grid: GridSpec
) -> ProbeVerdict:
    """Is v a proximal subgradient with curvature rho, i.e. does
    phi(x) >= phi(xbar) + <v, x - xbar> - (rho/2)||x - xbar||^2 hold near
    xbar?  Uses the radius-halving neighborhood search on the grid."""
    rho = float(rho)
    if not (rho >= 0):
        raise ValueError(f"curvature must be >= 0, got {rho}")
    xb = as_point(xbar, phi.dim)
    rate = np.asarray(v, dtype=np.float64).reshape(-1)
    phi_xb = phi.value(xb)
    if not math.isfinite(phi_xb):
        raise ValueError("payoff is not finite at the anchor")
    pts = grid.points()
    dists = np.linalg.norm(pts - xb, axis=1)
    margins = (
        phi.eval_batch(pts) - phi_xb - (pts - xb) @ rate + 0.5 * rho * dists**2
    )
    verdict = neighborhood_search(margins, dists, grid.ball.radius, tol=PROBE_TOL)
    return ProbeVerdict(
        member=verdict.holds, estimate=verdict.worst_gap, radius=verdict.radius
    )


def limiting_subdiff_sample_1d(
    phi,
    xbar,
    probe: ProbeSpec | None = None,
    eps_levels=(0.1, 0.05, 0.01),
    scan=DEFAULT_SCAN,
    cluster_gap: float = 0.05,
) -> list[float]:
    """Approximate slope-accumulation sampler (1-D).

    Protocol: for each slack level, scan rate intervals at xbar itself and
    at nearby shell points whose payoff value stays close to phi(xbar)
    (closeness gate sqrt(distance), which forces value convergence as the
    shells shrink), then cluster all collected interval endpoints.  The
    result is an under-approximation with no completeness guarantee.
    """
    if isinstance(phi, ScalarField) and phi.dim != 1:
        raise ValueError("the slope-accumulation sampler requires a 1-D field")
    if probe is None:
        probe = ProbeSpec()
    ev = _as_batch(phi, 1)
    xb = as_point(xbar, 1)
    phi_xb = float(ev(xb[None, :])[0])
    if not math.isfinite(phi_xb):
        raise ValueError("payoff is not finite at the anchor")

    candidates: list[tuple[float, float]] = [(float(xb[0]), 0.0)]  # (point, dist)
    shells = probe.shell_points(xb, 1)
    for pts in shells[-4:]:
        order = np.argsort(np.abs(pts[:, 0] - xb[0]))
        take = pts[order[:: max(1, len(order) // 4)]][:4]
        vals = ev(np.ascontiguousarray(take))
        for p, v in zip(take, vals):
            d = abs(float(p[0]) - float(xb[0]))
            if abs(float(v) - phi_xb) <= math.sqrt(d):
                candidates.append((float(p[0]), d))

    endpoints: list[float] = []
    for eps in eps_levels:
        for x, d in candidates:
            if d == 0.0:
                local = probe
            else:
                local = ProbeSpec(
                    r0=d / 2.0,
                    shells=8,
                    samples_per_shell=probe.samples_per_shell,
                    liminf_window=min(probe.liminf_window, 8),
                )
            for lo, hi in eps_subdiff_interval_1d(phi, [x], eps, local, scan):
                endpoints.extend((lo, hi))

    if not endpoints:
        return []
    endpoints.sort()
    clusters: list[float] = []
    start = 0
    for i in range(1, len(endpoints) + 1):
        if i == len(endpoints) or endpoints[i] - endpoints[i - 1] > cluster_gap:
            clusters.append(float(np.mean(endpoints[start:i])))
            start = i
    return clusters
