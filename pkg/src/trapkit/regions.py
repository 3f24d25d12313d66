"""Closed region sets, outward-rate probes, and two-set extremal witnesses.

A rate x* is an eps-normal to a set at xbar when the correlation quotient
<x*, x - xbar>/||x - xbar|| has limsup <= eps over set points approaching
xbar; the probe estimates the limsup over the innermost nonempty shells
restricted to the set.  Every region kind here is closed by construction
(predicate sets only admit non-strict comparisons).

The extremal witness search covers two-set systems in the plane with
antisymmetric rates x*_2 = -x*_1 of norm 1/2, scanning unit directions and
nearby in-set base points; the returned rates satisfy x*_1 + x*_2 = 0 and
||x*_1|| + ||x*_2|| = 1 exactly.  Search exhaustion is reported with the
best near-miss margins and is inconclusive at the scan resolution, never a
counterexample.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from trapkit._programs import CMP_LE, Predicate
from trapkit.evaluations import GRID_TOL
from trapkit.fields import Ball, GridSpec, as_point
from trapkit.subgrad import PROBE_TOL, ProbeSpec, ProbeVerdict
from trapkit.traps import TrapVerdict

__all__ = [
    "ExtremalWitness",
    "ExtremalityResult",
    "RegionSet",
    "WitnessSearchResult",
    "eps_normal_member",
    "extremal_witness",
    "is_locally_extremal",
    "trap_relative_check",
]


@dataclass(eq=False)
class RegionSet:
    """Closed subset of R^n with a decidable membership test."""

    kind: str
    dim: int
    params: dict

    @classmethod
    def halfspace(cls, normal, offset: float) -> "RegionSet":
        a = np.asarray(normal, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(a)) or not np.any(a):
            raise ValueError("halfspace normal must be finite and nonzero")
        return cls("halfspace", a.size, {"normal": a, "offset": float(offset)})

    @classmethod
    def ball(cls, center, radius: float) -> "RegionSet":
        b = Ball(tuple(center), radius)
        return cls("ball", b.dim, {"center": np.asarray(b.center), "radius": b.radius})

    @classmethod
    def box(cls, lo, hi) -> "RegionSet":
        lo = np.asarray(lo, dtype=np.float64).reshape(-1)
        hi = np.asarray(hi, dtype=np.float64).reshape(-1)
        if lo.size != hi.size or not np.all(lo <= hi):
            raise ValueError("box needs lo <= hi componentwise")
        return cls("box", lo.size, {"lo": lo, "hi": hi})

    @classmethod
    def predicate(cls, text: str, dim: int) -> "RegionSet":
        return cls("predicate", dim, {"pred": Predicate.parse(text, dim), "text": text})

    def contains_batch(self, points: np.ndarray) -> np.ndarray:
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(f"points must have shape (N, {self.dim})")
        if self.kind == "halfspace":
            return pts @ self.params["normal"] <= self.params["offset"] + 1e-15
        if self.kind == "ball":
            d = np.linalg.norm(pts - self.params["center"], axis=1)
            return d <= self.params["radius"] * (1 + 1e-12)
        if self.kind == "box":
            return np.all(pts >= self.params["lo"] - 1e-15, axis=1) & np.all(
                pts <= self.params["hi"] + 1e-15, axis=1
            )
        from trapkit.backend import eval_program_batch

        mask = np.ones(pts.shape[0], dtype=bool)
        for progL, cmp_code, progR in self.params["pred"].conjuncts:
            lhs = eval_program_batch(progL, pts)
            rhs = eval_program_batch(progR, pts)
            mask &= lhs <= rhs if cmp_code == CMP_LE else lhs >= rhs
        return mask

    def contains(self, point) -> bool:
        p = as_point(point, self.dim)
        return bool(self.contains_batch(p[None, :])[0])


def eps_normal_member(
    omega: RegionSet, xbar, xstar, eps: float, probe: ProbeSpec | None = None
) -> ProbeVerdict:
    """Estimate the outward-correlation limsup of x* over set points near
    xbar; member iff the estimate is <= eps + tolerance."""
    eps = float(eps)
    if not (eps >= 0):
        raise ValueError(f"eps must be >= 0, got {eps}")
    if probe is None:
        probe = ProbeSpec()
    xb = as_point(xbar, omega.dim)
    if not omega.contains(xb):
        raise ValueError(f"base point {tuple(xb)} is not in the set")
    rate = np.asarray(xstar, dtype=np.float64).reshape(-1)
    if rate.size != omega.dim:
        raise ValueError(f"rate has {rate.size} components, expected {omega.dim}")
    est = -math.inf
    used = 0
    for pts in reversed(probe.shell_points(xb, omega.dim)):  # inner first
        inside = omega.contains_batch(pts)
        if not inside.any():
            continue
        delta = pts[inside] - xb
        dists = np.linalg.norm(delta, axis=1)
        est = max(est, float(np.max((delta @ rate) / dists)))
        used += 1
        if used >= probe.liminf_window:
            break
    return ProbeVerdict(member=bool(est <= eps + PROBE_TOL), estimate=est)


def trap_relative_check(
    xstar, xi: float, xbar, omega: RegionSet, grid: GridSpec
) -> TrapVerdict:
    """Is xbar a stationary trap relative to the set under the linear
    utility <x*, .> with weight factor xi?  Checks the proximal-payoff
    inequality u(x) - xi*||x - xbar|| <= u(xbar) on grid points of the set
    and cross-checks the equivalent gain-vs-cost form."""
    xi = float(xi)
    if not (xi >= 0):
        raise ValueError(f"weight factor must be >= 0, got {xi}")
    xb = as_point(xbar, omega.dim)
    if not omega.contains(xb):
        raise ValueError(f"base point {tuple(xb)} is not in the set")
    rate = np.asarray(xstar, dtype=np.float64).reshape(-1)
    pts = grid.points()
    pts = pts[omega.contains_batch(pts)]
    if pts.shape[0] == 0:
        raise ValueError("no grid points fall inside the set")
    dists = np.linalg.norm(pts - xb, axis=1)
    u_xb = float(xb @ rate)
    # payoff form: P(xbar) - P(x) with P(x) = u(x) - xi*d(x)
    margins = u_xb - (pts @ rate - xi * dists)
    # gain-vs-cost form: xi*C(xbar, x) - A(x/xbar)
    margins_alt = xi * dists - (pts @ rate - u_xb)
    scale = 1.0 + np.abs(margins)
    if not np.all(np.abs(margins - margins_alt) <= 1e-12 * scale):
        raise AssertionError("payoff and gain-vs-cost forms disagree")
    idx = int(np.argmin(margins))
    worst = float(margins[idx])
    ok = bool(worst >= -GRID_TOL)
    return TrapVerdict(
        is_trap=ok,
        worst_margin=worst,
        witness=None if ok else tuple(float(v) for v in pts[idx]),
        grid_step=grid.step,
    )


@dataclass
class ExtremalityResult:
    extremal: bool
    per_shift: list
    cutoff_index: int | None
    shift_norms: list
    shifts_vanish: bool

    def __bool__(self) -> bool:
        return self.extremal


def is_locally_extremal(
    omega1: RegionSet,
    omega2: RegionSet,
    xbar,
    shifts,
    region: Ball,
    grid: GridSpec,
) -> ExtremalityResult:
    """Do the supplied shift pairs eventually pull the sets apart inside
    the region?  For each pair (a1, a2) the grid is scanned for a point
    lying in both shifted sets (x in Omega_i - a_i iff x + a_i in Omega_i);
    extremal requires an empty intersection from some cutoff index onward
    covering at least the last half of the shifts, with vanishing shifts
    (final norm at most half the maximum)."""
    xb = as_point(xbar, omega1.dim)
    if not (omega1.contains(xb) and omega2.contains(xb)):
        raise ValueError(f"{tuple(xb)} is not a common point of the sets")
    if not shifts:
        raise ValueError("need at least one shift pair")
    pts = grid.points()
    dists = np.linalg.norm(pts - np.asarray(region.center), axis=1)
    pts = pts[dists <= region.radius * (1 + 1e-12)]
    per_shift = []
    norms = []
    for a1, a2 in shifts:
        a1 = np.asarray(a1, dtype=np.float64).reshape(-1)
        a2 = np.asarray(a2, dtype=np.float64).reshape(-1)
        overlap = omega1.contains_batch(pts + a1) & omega2.contains_batch(pts + a2)
        per_shift.append(bool(not overlap.any()))
        norms.append(float(max(np.linalg.norm(a1), np.linalg.norm(a2))))
    cutoff = None
    for k in range(len(per_shift)):
        if all(per_shift[k:]):
            cutoff = k
            break
    vanish = bool(norms[-1] <= 0.5 * max(norms) + 1e-15)
    extremal = cutoff is not None and cutoff <= len(per_shift) // 2 and vanish
    return ExtremalityResult(
        extremal=extremal,
        per_shift=per_shift,
        cutoff_index=cutoff,
        shift_norms=norms,
        shifts_vanish=vanish,
    )


def _snap_half_norm(v: np.ndarray) -> np.ndarray:
    """Rescale a nonzero 2-vector so that hypot(v) == 0.5 exactly."""
    v = v.astype(np.float64)
    for _ in range(4):
        h = math.hypot(v[0], v[1])
        if h == 0.5:
            return v
        v = v * (0.5 / h)
    # ulp search around the rescaled vector
    base = v.copy()
    for i in range(-24, 25):
        for j in range(-24, 25):
            cand = np.array(
                [
                    _nudge(base[0], i),
                    _nudge(base[1], j),
                ]
            )
            if math.hypot(cand[0], cand[1]) == 0.5:
                return cand
    raise ArithmeticError("could not snap rate to exact norm 1/2")


def _nudge(x: float, ulps: int) -> float:
    for _ in range(abs(ulps)):
        x = math.nextafter(x, math.inf if ulps > 0 else -math.inf)
    return x


@dataclass
class ExtremalWitness:
    """Two base points and antisymmetric rates certifying near-extremality.

    Invariants (exact): rates[1] == -rates[0] componentwise and
    ||rates[0]|| + ||rates[1]|| == 1."""

    points: tuple
    rates: tuple
    eps: float

    def __post_init__(self):
        r1 = np.asarray(self.rates[0])
        r2 = np.asarray(self.rates[1])
        if not np.array_equal(r1, -r2):
            raise ValueError("witness rates must be exactly antisymmetric")
        if math.hypot(*r1) + math.hypot(*r2) != 1.0:
            raise ValueError("witness rate norms must sum to exactly 1")


@dataclass
class WitnessSearchResult:
    found: bool
    witness: ExtremalWitness | None = None
    margins: tuple | None = None
    angle_deg: float | None = None
    certifications: list = field(default_factory=list)
    best_near_miss: dict | None = None

    def __bool__(self) -> bool:
        return self.found


def _normal_margins_for_directions(
    omega: RegionSet, base_points: list[np.ndarray], dirs: np.ndarray, probe: ProbeSpec
) -> np.ndarray:
    """margins[i, j] = limsup estimate for rate dirs[j]/2 at base point i."""
    margins = np.full((len(base_points), dirs.shape[0]), -math.inf)
    for i, bp in enumerate(base_points):
        units = []
        used = 0
        for pts in reversed(probe.shell_points(bp, omega.dim)):
            inside = omega.contains_batch(pts)
            if not inside.any():
                continue
            delta = pts[inside] - bp
            units.append(delta / np.linalg.norm(delta, axis=1)[:, None])
            used += 1
            if used >= probe.liminf_window:
                break
        if units:
            u = np.vstack(units)
            margins[i] = np.max(u @ dirs.T, axis=0) / 2.0
    return margins


def extremal_witness(
    omega1: RegionSet,
    omega2: RegionSet,
    xbar,
    eps: float,
    probe: ProbeSpec | None = None,
    scan: int = 720,
) -> WitnessSearchResult:
    """Search for base points x_i in Omega_i within eps of xbar and an
    antisymmetric rate pair (d/2, -d/2) over `scan` unit directions such
    that each rate passes the eps-normal probe for its set.  Among passing
    combinations the one with the smallest worst margin wins (ties: the
    smallest direction angle, then the base-point order, which sorts by
    distance from xbar and then lexicographically).  On success each base
    point is also certified as a trap relative to its set for sampled
    weight factors above eps."""
    eps = float(eps)
    if not (eps > 0):
        raise ValueError(f"eps must be > 0, got {eps}")
    if probe is None:
        probe = ProbeSpec()
    if omega1.dim != 2 or omega2.dim != 2:
        raise ValueError("the witness search covers two-set systems in the plane")
    xb = as_point(xbar, 2)
    if not (omega1.contains(xb) and omega2.contains(xb)):
        raise ValueError(f"{tuple(xb)} is not a common point of the sets")

    def candidates(omega: RegionSet) -> list[np.ndarray]:
        cands = [xb]
        seen = {tuple(xb)}
        for pts in reversed(probe.shell_points(xb, 2)):
            dist = np.linalg.norm(pts - xb, axis=1)
            keep = (dist <= eps) & omega.contains_batch(pts)
            for p in pts[keep]:
                t = tuple(p)
                if t not in seen:
                    seen.add(t)
                    cands.append(p)
        cands.sort(key=lambda p: (float(np.linalg.norm(p - xb)), tuple(p)))
        return cands[:24]

    cands1 = candidates(omega1)
    cands2 = candidates(omega2)
    theta = 2.0 * math.pi * np.arange(scan) / scan
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)

    m1 = _normal_margins_for_directions(omega1, cands1, dirs, probe)
    m2 = _normal_margins_for_directions(omega2, cands2, -dirs, probe)
    i1 = np.argmin(m1, axis=0)
    i2 = np.argmin(m2, axis=0)
    best1 = m1[i1, np.arange(scan)]
    best2 = m2[i2, np.arange(scan)]
    worst = np.maximum(best1, best2)

    feasible = worst <= eps + PROBE_TOL
    if not feasible.any():
        j = int(np.argmin(worst))
        return WitnessSearchResult(
            found=False,
            best_near_miss={
                "angle_deg": float(math.degrees(theta[j])),
                "margins": (float(best1[j]), float(best2[j])),
                "threshold": eps + PROBE_TOL,
            },
        )
    feas_idx = np.flatnonzero(feasible)
    j = int(feas_idx[np.argmin(worst[feas_idx])])

    rate1 = _snap_half_norm(dirs[j] / 2.0)
    rate2 = -rate1
    x1 = cands1[int(i1[j])]
    x2 = cands2[int(i2[j])]
    witness = ExtremalWitness(
        points=(tuple(float(v) for v in x1), tuple(float(v) for v in x2)),
        rates=(tuple(float(v) for v in rate1), tuple(float(v) for v in rate2)),
        eps=eps,
    )

    certs = []
    for omega, bp, rate in ((omega1, x1, rate1), (omega2, x2, rate2)):
        for xi in (eps + 0.1, eps + 1.0):
            entry = {"xi": float(xi), "holds": False, "radius": None}
            for k in range(11):
                r = probe.r0 / (2.0**k)
                verdict = trap_relative_check(
                    rate, xi, bp, omega, GridSpec(Ball(tuple(bp), r), 41)
                )
                if verdict.is_trap:
                    entry = {"xi": float(xi), "holds": True, "radius": r}
                    break
            certs.append(entry)

    return WitnessSearchResult(
        found=True,
        witness=witness,
        margins=(float(best1[j]), float(best2[j])),
        angle_deg=float(math.degrees(theta[j])),
        certifications=certs,
    )
