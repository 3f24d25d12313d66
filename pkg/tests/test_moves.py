"""Advantage/cost/proximal-payoff calculus and its algebraic identities."""

import math

import numpy as np
import pytest

from helpers import POLYNOMIAL_CATALOG
from trapkit import (
    CostModel,
    advantage,
    cost,
    gradient,
    inconvenience,
    is_worthwhile_change,
    not_worthwhile_loss,
    parse_field,
    proximal_payoff_dec,
    proximal_payoff_inc,
    tilt_perturb,
    worthwhile_gain,
)

G = parse_field("x1 - 0.5*x1^2", 1)
UNIT = CostModel.constant(1.0, 1)


def test_advantage_examples():
    assert advantage(G, [0.5], [1.0]) == pytest.approx(0.125, abs=1e-15)
    assert advantage(G, [0.7], [0.7]) == 0.0
    assert advantage(G, [1.5], [1.0]) == pytest.approx(0.125, abs=1e-15)


def test_advantage_rejects_infinite_payoff():
    f = parse_field("1/x1", 1)
    with pytest.raises(ValueError, match="not finite"):
        advantage(f, [0.0], [1.0])


def test_cost_examples():
    two = CostModel.constant(2.0, 1)
    assert cost(two, [0.0], [3.0]) == 6.0
    assert cost(two, [1.7], [1.7]) == 0.0
    speed = CostModel(eta=parse_field("abs(x1) + 1", 1))
    assert cost(speed, [1.0], [0.0]) == 2.0
    assert cost(speed, [0.0], [1.0]) == 1.0  # asymmetric: rate at departure


def test_cost_stay_move_is_exactly_zero():
    rng = np.random.default_rng(3)
    speed = CostModel(eta=parse_field("x1^2 + 0.25", 1))
    for x in rng.uniform(-5, 5, 50):
        assert cost(speed, [x], [x]) == 0.0


def test_negative_rate_rejected():
    bad = CostModel(eta=parse_field("-1", 1))
    with pytest.raises(ValueError, match="negative"):
        cost(bad, [0.0], [1.0])
    with pytest.raises(ValueError):
        CostModel.constant(-2.0, 1)


def test_inconvenience_examples():
    assert inconvenience(UNIT, [0.0], [2.0]) == 2.0
    assert inconvenience(UNIT, [1.0], [1.0]) == 0.0
    half = CostModel.constant(0.5, 2)
    assert inconvenience(half, [0.0, 0.0], [3.0, 4.0]) == 2.5


def test_inconvenience_nonnegative():
    rng = np.random.default_rng(4)
    speed = CostModel(eta=parse_field("abs(x1)", 1))
    for _ in range(100):
        x, y = rng.uniform(-3, 3, 2)
        assert inconvenience(speed, [x], [y]) >= 0.0


def test_proximal_payoff_examples():
    bowl = parse_field("x1^2", 1)
    assert proximal_payoff_dec(bowl, UNIT, 2.0, [0.0], [0.0]) == 0.0
    assert proximal_payoff_dec(bowl, UNIT, 2.0, [0.0], [1.0]) == 3.0
    assert proximal_payoff_dec(bowl, UNIT, 0.0, [0.0], [1.0]) == 1.0
    assert proximal_payoff_dec(bowl, UNIT, 2.0, [0.7], [0.7]) == bowl.value([0.7])


def test_proximal_payoff_propagates_inf():
    f = parse_field("1/x1", 1)
    assert proximal_payoff_dec(f, UNIT, 1.0, [1.0], [0.0]) == math.inf
    assert proximal_payoff_inc(f, UNIT, 1.0, [1.0], [0.0]) == math.inf


def test_worthwhile_gain_examples():
    lin = parse_field("x1", 1)
    assert worthwhile_gain(lin, UNIT, 2.0, [0.3], [0.3]) == 0.0
    assert worthwhile_gain(lin, UNIT, 2.0, [0.0], [1.0]) == -1.0
    assert worthwhile_gain(lin, UNIT, 0.5, [0.0], [1.0]) == 0.5


def test_is_worthwhile_change_examples():
    lin = parse_field("x1", 1)
    assert is_worthwhile_change(lin, UNIT, 2.0, [0.4], [0.4]) is True
    assert is_worthwhile_change(lin, UNIT, 2.0, [0.0], [1.0]) is False
    assert is_worthwhile_change(lin, UNIT, 0.5, [0.0], [1.0]) is True


def test_not_worthwhile_loss_examples():
    neg = parse_field("-x1", 1)
    assert not_worthwhile_loss(neg, UNIT, 2.0, [0.1], [0.1]) == 0.0
    assert not_worthwhile_loss(neg, UNIT, 2.0, [0.0], [1.0]) == 1.0


def _random_setting(rng):
    expr, grads, dim = POLYNOMIAL_CATALOG[rng.integers(len(POLYNOMIAL_CATALOG))]
    g = parse_field(expr, dim)
    eta = CostModel.constant(float(rng.uniform(0.0, 3.0)), dim)
    xi = float(rng.uniform(0.0, 4.0))
    x = rng.uniform(-2.0, 2.0, dim)
    y = rng.uniform(-2.0, 2.0, dim)
    return g, eta, xi, x, y


def test_gain_equals_proximal_payoff_difference():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        g, c, xi, x, y = _random_setting(rng)
        lhs = worthwhile_gain(g, c, xi, x, y)
        rhs = proximal_payoff_inc(g, c, xi, x, y) - proximal_payoff_inc(g, c, xi, x, x)
        assert abs(lhs - rhs) <= 1e-12


def test_loss_equals_proximal_payoff_difference():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        phi, c, xi, x, y = _random_setting(rng)
        lhs = not_worthwhile_loss(phi, c, xi, x, y)
        rhs = proximal_payoff_dec(phi, c, xi, x, y) - proximal_payoff_dec(phi, c, xi, x, x)
        assert abs(lhs - rhs) <= 1e-12


def test_loss_is_negated_gain_under_payoff_flip():
    from trapkit import unparse_field

    rng = np.random.default_rng(9)
    for _ in range(1000):
        g, c, xi, x, y = _random_setting(rng)
        phi = parse_field(f"-({unparse_field(g)})", g.dim)
        assert abs(not_worthwhile_loss(phi, c, xi, x, y) + worthwhile_gain(g, c, xi, x, y)) <= 1e-12


def test_tilt_zero_is_identity():
    f = parse_field("x1^2 + x2", 2)
    t = tilt_perturb(f, [0.0, 0.0])
    rng = np.random.default_rng(11)
    pts = rng.uniform(-2, 2, (50, 2))
    assert np.array_equal(f.eval_batch(pts), t.eval_batch(pts))


def test_tilt_moves_parabola_minimizer():
    f = parse_field("x1^2", 1, grad=["2*x1"])
    t = tilt_perturb(f, [2.0])
    assert gradient(t, [1.0])[0] == 0.0  # analytic grad carried over: 2x - 2
    xs = np.linspace(-3, 3, 601)[:, None]
    vals = t.eval_batch(xs)
    assert abs(xs[int(np.argmin(vals)), 0] - 1.0) <= 0.01


def test_tilt_keeps_vee_minimizer_at_zero():
    f = parse_field("abs(x1)", 1)
    t = tilt_perturb(f, [0.5])
    xs = np.linspace(-1, 1, 401)[:, None]
    vals = t.eval_batch(xs)
    assert np.all(vals >= -1e-12)
    assert np.all(vals[np.abs(xs[:, 0]) > 1e-9] > 0)


def test_tilt_dimension_mismatch():
    f = parse_field("x1", 1)
    with pytest.raises(ValueError):
        tilt_perturb(f, [1.0, 2.0])
