"""Shell-probe membership, rate intervals, and the accumulation sampler."""

import math

import numpy as np
import pytest

from trapkit import Ball, GridSpec, parse_field
from trapkit.subgrad import (
    PROBE_TOL,
    ProbeSpec,
    SubgradientQuery,
    eps_subdiff_interval_1d,
    eps_subgrad_member,
    limiting_subdiff_sample_1d,
    min_eps_factor,
    one_sided_quotients_1d,
    proximal_subgrad_member,
)

PROBE = ProbeSpec()
VEE = parse_field("abs(x1)", 1)
CAP = parse_field("-abs(x1)", 1)
BOWL = parse_field("x1^2", 1)


def test_probe_spec_validation():
    with pytest.raises(ValueError):
        ProbeSpec(r0=0.0)
    with pytest.raises(ValueError):
        ProbeSpec(shells=3)
    with pytest.raises(ValueError):
        ProbeSpec(samples_per_shell=4)
    with pytest.raises(ValueError):
        ProbeSpec(liminf_window=0)
    with pytest.raises(ValueError):
        ProbeSpec(liminf_window=13)


def test_shell_points_live_in_annuli():
    for dim in (1, 2, 3):
        shells = PROBE.shell_points([0.0] * dim, dim)
        assert len(shells) == PROBE.shells
        for r, pts in zip(PROBE.shell_radii(), shells):
            d = np.linalg.norm(pts, axis=1)
            assert np.all(d <= r * (1 + 1e-12))
            assert np.all(d >= r / 2 * (1 - 1e-12))


def test_membership_boundary_case_vee():
    v = eps_subgrad_member(SubgradientQuery(VEE, (0.0,), (1.5,), 0.5), PROBE)
    assert v.member
    assert v.estimate == pytest.approx(-0.5, abs=1e-12)


def test_membership_smooth_gradient():
    v = eps_subgrad_member(SubgradientQuery(BOWL, (1.0,), (2.0,), 0.0), PROBE)
    assert v.member
    assert abs(v.estimate) <= 1e-3


def test_membership_rejects_cap_zero_rate():
    v = eps_subgrad_member(SubgradientQuery(CAP, (0.0,), (0.0,), 0.0), PROBE)
    assert not v.member
    assert v.estimate == pytest.approx(-1.0, abs=1e-12)


def test_membership_requires_finite_anchor_value():
    pole = parse_field("1/x1", 1)
    with pytest.raises(ValueError, match="not finite"):
        eps_subgrad_member(SubgradientQuery(pole, (0.0,), (0.0,), 0.0), PROBE)


def test_interval_oracle_vee():
    for eps in (0.0, 0.25, 0.5, 1.0):
        intervals = eps_subdiff_interval_1d(VEE, [0.0], eps, PROBE)
        assert len(intervals) == 1
        lo, hi = intervals[0]
        assert abs(lo + (1 + eps)) <= 0.02
        assert abs(hi - (1 + eps)) <= 0.02


def test_interval_smooth_singleton():
    # anchors chosen so the derivative sits on the scan lattice
    cases = [
        (BOWL, 1.0, 2.0),
        (parse_field("0.5*x1^2 + x1", 1), 0.0, 1.0),
        (parse_field("x1^4", 1), 1.0, 4.0),
    ]
    for phi, anchor, deriv in cases:
        intervals = eps_subdiff_interval_1d(phi, [anchor], 0.0, PROBE)
        assert len(intervals) == 1
        lo, hi = intervals[0]
        assert hi - lo <= 2 * 0.01 + 1e-12
        assert lo - 0.01 - 1e-4 <= deriv <= hi + 0.01 + 1e-4


def test_interval_empty_scan_rejected():
    with pytest.raises(ValueError, match="empty scan"):
        eps_subdiff_interval_1d(VEE, [0.0], 0.0, PROBE, scan=(1.0, -1.0, 0.01))
    with pytest.raises(ValueError, match="empty scan"):
        eps_subdiff_interval_1d(VEE, [0.0], 0.0, PROBE, scan=(-1.0, 1.0, 0.0))


def test_membership_monotone_in_eps():
    rng = np.random.default_rng(13)
    fields = [VEE, CAP, BOWL, parse_field("abs(x1) + 0.3*x1^2 - x1", 1)]
    for _ in range(60):
        phi = fields[rng.integers(len(fields))]
        anchor = float(rng.uniform(-0.5, 0.5))
        rate = float(rng.uniform(-3, 3))
        e1, e2 = sorted(rng.uniform(0, 2, 2))
        m1 = eps_subgrad_member(SubgradientQuery(phi, (anchor,), (rate,), e1), PROBE)
        m2 = eps_subgrad_member(SubgradientQuery(phi, (anchor,), (rate,), e2), PROBE)
        if m1.member:
            assert m2.member


def test_min_eps_examples():
    assert min_eps_factor(VEE, [0.0], [1.5], PROBE) == pytest.approx(0.5, abs=1e-12)
    assert min_eps_factor(BOWL, [1.0], [2.0], PROBE) == pytest.approx(0.0, abs=1e-3)
    assert min_eps_factor(CAP, [0.0], [0.0], PROBE) == pytest.approx(1.0, abs=1e-12)


def test_proximal_member_examples():
    grid = GridSpec(Ball((0.0,), 1.0), 201)
    assert proximal_subgrad_member(VEE, [0.0], [1.0], 0.0, grid).member
    cup = parse_field("-(x1^2)", 1)
    assert proximal_subgrad_member(cup, [0.0], [0.0], 2.0, grid).member
    for rho in (0.0, 1.0, 5.0, 10.0):
        assert not proximal_subgrad_member(CAP, [0.0], [0.0], rho, grid).member


def test_proximal_member_rho_validated():
    grid = GridSpec(Ball((0.0,), 1.0), 101)
    with pytest.raises(ValueError):
        proximal_subgrad_member(VEE, [0.0], [0.0], -1.0, grid)


def test_proximal_at_rho_zero_implies_regular_membership():
    grid = GridSpec(Ball((0.0,), 1.0), 401)
    cases = [
        (VEE, 0.0, 1.0),
        (VEE, 0.0, -0.5),
        (BOWL, 1.0, 2.0),
        (parse_field("abs(x1) + x1^2", 1), 0.0, 0.7),
    ]
    for phi, anchor, rate in cases:
        prox = proximal_subgrad_member(phi, [anchor], [rate], 0.0,
                                       GridSpec(Ball((anchor,), 1.0), 401))
        assert prox.member
        reg = eps_subgrad_member(SubgradientQuery(phi, (anchor,), (rate,), 0.0), PROBE)
        assert reg.member, (anchor, rate)


def test_one_sided_bracket_matches_membership_acceptance():
    d_minus, d_plus, refined = one_sided_quotients_1d(VEE.eval_batch, [0.0], PROBE)
    assert d_minus == pytest.approx(-1.0, abs=1e-12)
    assert d_plus == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(17)
    for rate in rng.uniform(-2, 2, 40):
        member = eps_subgrad_member(SubgradientQuery(VEE, (0.0,), (float(rate),), 0.0), PROBE)
        expected = d_minus - PROBE_TOL <= rate <= d_plus + PROBE_TOL
        assert member.member == expected


def test_limiting_sampler_vee_covers_unit_interval():
    clusters = limiting_subdiff_sample_1d(VEE, [0.0], PROBE)
    assert clusters
    assert min(clusters) <= -0.95
    assert max(clusters) >= 0.95
    assert all(-1.2 <= c <= 1.2 for c in clusters)


def test_limiting_sampler_smooth_single_cluster():
    clusters = limiting_subdiff_sample_1d(BOWL, [1.0], PROBE)
    assert len(clusters) == 1
    assert clusters[0] == pytest.approx(2.0, abs=0.15)


def test_limiting_sampler_oscillating_derivative():
    # x^2 sin(1/x) extended by 0: gradient 0 at the origin, slope
    # accumulation spanning [-1, 1]
    def wiggle(pts):
        x = pts[:, 0]
        out = np.zeros_like(x)
        nz = x != 0
        out[nz] = x[nz] ** 2 * np.sin(1.0 / x[nz])
        return out

    clusters = limiting_subdiff_sample_1d(wiggle, [0.0], PROBE)
    assert clusters
    assert min(clusters) <= -0.8
    assert max(clusters) >= 0.8
    assert any(abs(c) <= 0.15 for c in clusters)


def test_limiting_sampler_requires_dim_1():
    f2 = parse_field("x1 + x2", 2)
    with pytest.raises(ValueError):
        limiting_subdiff_sample_1d(f2, [0.0, 0.0], PROBE)
