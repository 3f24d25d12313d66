"""Worthwhile-move calculus: advantages, costs, and proximal payoffs.

Conventions.  A "to be increased" payoff g measures satisfaction; its "to
be decreased" twin is phi = -g.  Moving from x to y earns the advantage
A(y/x) = g(y) - g(x) and incurs the cost C(x, y) = eta(x) * ||y - x||,
with the per-unit rate eta read at the departure point (so costs are
asymmetric in general).  Inconvenience I(y/x) equals C(x, y) since staying
is free, and motivation/resistance are taken linear, so the worthwhile-to-
change gain is A_xi(y/x) = A(y/x) - xi * I(y/x) for a weight factor
xi >= 0.  Proximal payoffs fold the weighted cost into the payoff itself:
P_xi(y/x) = g(y) - xi*C(x,y) and Q_xi(y/x) = phi(y) + xi*C(x,y).

Trap-side operations elsewhere in the package take phi; callers holding g
supply phi = -g.
"""

import math
from dataclasses import dataclass

import numpy as np

from trapkit.fields import ScalarField, as_point, parse_field

__all__ = [
    "CostModel",
    "advantage",
    "check_weight",
    "cost",
    "inconvenience",
    "is_worthwhile_change",
    "not_worthwhile_loss",
    "proximal_payoff_dec",
    "proximal_payoff_inc",
    "tilt_perturb",
    "worthwhile_gain",
]


@dataclass(eq=False)
class CostModel:
    """Linear cost of changing with per-unit rate eta(x) at the departure point."""

    eta: ScalarField

    @classmethod
    def constant(cls, value: float, dim: int) -> "CostModel":
        if value < 0:
            raise ValueError(f"cost rate must be >= 0, got {value}")
        return cls(eta=parse_field(repr(float(value)), dim))

    def rate_at(self, x) -> float:
        r = self.eta.value(x)
        if not math.isfinite(r):
            raise ValueError(f"cost rate is not finite at {tuple(as_point(x))}")
        if r < 0:
            raise ValueError(f"cost rate is negative ({r}) at {tuple(as_point(x))}")
        return r


def unit_cost_model(dim: int) -> CostModel:
    return CostModel.constant(1.0, dim)


def check_weight(xi: float) -> float:
    xi = float(xi)
    if not (xi >= 0 and math.isfinite(xi)):
        raise ValueError(f"weight factor must be a finite value >= 0, got {xi}")
    return xi


def _finite_value(f: ScalarField, p, name: str) -> float:
    v = f.value(p)
    if not math.isfinite(v):
        raise ValueError(f"{name} is not finite at {tuple(as_point(p, f.dim))}")
    return v


def advantage(g: ScalarField, x, y) -> float:
    """A(y/x) = g(y) - g(x); negative values are disadvantages to change."""
    gx = _finite_value(g, x, "payoff")
    gy = _finite_value(g, y, "payoff")
    return gy - gx


def cost(c: CostModel, x, y) -> float:
    """C(x, y) = eta(x) * ||y - x||; exactly zero for the stay move."""
    xa = as_point(x, c.eta.dim)
    ya = as_point(y, c.eta.dim)
    return c.rate_at(xa) * float(np.linalg.norm(ya - xa))


def inconvenience(c: CostModel, x, y) -> float:
    """I(y/x) = C(x, y) - C(x, x) = C(x, y) >= 0."""
    return cost(c, x, y)


def proximal_payoff_dec(phi: ScalarField, c: CostModel, xi: float, xbar, x) -> float:
    """Q_xi(x/xbar) = phi(x) + xi * C(xbar, x); propagates +inf."""
    xi = check_weight(xi)
    v = phi.value(x)
    if xi == 0.0:
        return v
    return v + xi * cost(c, xbar, x)


def proximal_payoff_inc(g: ScalarField, c: CostModel, xi: float, xbar, x) -> float:
    """P_xi(x/xbar) = g(x) - xi * C(xbar, x); propagates +inf."""
    xi = check_weight(xi)
    v = g.value(x)
    if xi == 0.0:
        return v
    return v - xi * cost(c, xbar, x)


def worthwhile_gain(g: ScalarField, c: CostModel, xi: float, x, y) -> float:
    """A_xi(y/x) = A(y/x) - xi * I(y/x), the net gain of the move."""
    xi = check_weight(xi)
    return advantage(g, x, y) - xi * inconvenience(c, x, y)


def not_worthwhile_loss(phi: ScalarField, c: CostModel, xi: float, x, y) -> float:
    """L_xi(y/x) = (phi(y) - phi(x)) + xi * I(y/x), the net loss of the move."""
    xi = check_weight(xi)
    px = _finite_value(phi, x, "payoff")
    py = _finite_value(phi, y, "payoff")
    return (py - px) + xi * inconvenience(c, x, y)


def is_worthwhile_change(g: ScalarField, c: CostModel, xi: float, x, y) -> bool:
    """True iff A(y/x) >= xi * I(y/x), i.e. the net gain is nonnegative."""
    return worthwhile_gain(g, c, xi, x, y) >= 0.0


def tilt_perturb(phi: ScalarField, v) -> ScalarField:
    """The field x -> phi(x) - <v, x>; gradient and domain carry over."""
    vv = np.asarray(v, dtype=np.float64).reshape(-1)
    if vv.size != phi.dim:
        raise ValueError(f"tilt vector has {vv.size} components, expected {phi.dim}")
    linear = None
    for i, vi in enumerate(vv):
        term = ("mul", ("num", float(vi)), ("var", i))
        linear = term if linear is None else ("add", linear, term)
    body = ("sub", phi.body, linear)
    grad = None
    if phi.analytic_grad is not None:
        grad = tuple(
            ("sub", gi, ("num", float(vi)))
            for gi, vi in zip(phi.analytic_grad, vv)
        )
    return ScalarField(dim=phi.dim, body=body, domain=phi.domain, analytic_grad=grad)
