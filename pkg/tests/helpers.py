"""Shared fixtures: the polynomial catalog, seeded instance generators for
the certificate-soundness and descent suites, and small oracles."""

import numpy as np

from trapkit import Ball, GridSpec, parse_field
from trapkit.descent import EkelandParams
from trapkit.traps import TrapQuery, is_stationary_trap

# Polynomials with hand-written analytic gradients (dims 1..3).
POLYNOMIAL_CATALOG = [
    ("x1^2", ["2*x1"], 1),
    ("x1 - 0.5*x1^2", ["1 - x1"], 1),
    ("x1^3 - 2*x1", ["3*x1^2 - 2"], 1),
    ("0.25*x1^4 + x1^2 - 3*x1 + 1", ["x1^3 + 2*x1 - 3"], 1),
    ("x1^2 + x2^2", ["2*x1", "2*x2"], 2),
    ("x1*x2 - x1^2 + 0.5*x2^3", ["x2 - 2*x1", "x1 + 1.5*x2^2"], 2),
    ("(x1 - x2)^2 + x1*x3", ["2*(x1 - x2) + x3", "-(2*(x1 - x2))", "x1"], 3),
    (
        "x1^2*x2 + x2^2*x3 + x3^2*x1",
        ["2*x1*x2 + x3^2", "x1^2 + 2*x2*x3", "x2^2 + 2*x3*x1"],
        3,
    ),
]

# Convex 1-D pieces with known one-sided derivatives at the anchor.
CONVEX_PIECES = [
    ("abs(x1)", 0.0, -1.0, 1.0),
    ("x1^2", 1.0, 2.0, 2.0),
    ("abs(x1) + x1^2", 0.0, -1.0, 1.0),
    ("max(x1, 2*x1)", 0.0, 1.0, 2.0),
]


def catalog_fields():
    return [
        (parse_field(expr, dim, grad=grads), expr, dim)
        for expr, grads, dim in POLYNOMIAL_CATALOG
    ]


def kink_instance(rng, dim=1):
    """Seeded field a*||x - c|| + b*||x - c||^2 + <t, x - c> with its
    exact slope data.  Returns (field, center, a, b, t)."""
    a = float(np.round(rng.uniform(0.0, 2.0), 3))
    b = float(np.round(rng.uniform(0.2, 1.0), 3))
    c = np.round(rng.uniform(-1.0, 1.0, size=dim), 2)
    t = np.round(rng.uniform(-1.5, 1.5, size=dim), 3)
    if dim == 1:
        d = f"(x1 - {c[0]!r})"
        expr = f"{a!r}*abs{d} + {b!r}*{d}^2 + {t[0]!r}*{d}"
    else:
        sq = " + ".join(f"(x{i+1} - {c[i]!r})^2" for i in range(dim))
        lin = " + ".join(f"{t[i]!r}*(x{i+1} - {c[i]!r})" for i in range(dim))
        expr = f"{a!r}*sqrt({sq}) + {b!r}*({sq}) + {lin}"
    return parse_field(expr, dim), c, a, b, t


def smooth_instance(rng, dim):
    """Seeded smooth field b*||x - c||^2 + <t, x - c> with analytic grad."""
    b = float(np.round(rng.uniform(0.2, 1.0), 3))
    c = np.round(rng.uniform(-1.0, 1.0, size=dim), 2)
    t = np.round(rng.uniform(-0.8, 0.8, size=dim), 3)
    sq = " + ".join(f"(x{i+1} - {c[i]!r})^2" for i in range(dim))
    lin = " + ".join(f"{t[i]!r}*(x{i+1} - {c[i]!r})" for i in range(dim))
    expr = f"{b!r}*({sq}) + ({lin})"
    grads = [
        f"2*{b!r}*(x{i+1} - {c[i]!r}) + {t[i]!r}" for i in range(dim)
    ]
    return parse_field(expr, dim, grad=grads), c, b, t


def descent_instance(rng, dim=1):
    """Seeded instance for the perturbed-descent suite whose hypothesis
    check passes by construction (gamma derived from the grid minimum)."""
    if dim == 1:
        phi, c, a, b, t = kink_instance(rng, 1)
    else:
        phi, c, b, t = smooth_instance(rng, dim)
    radius = 1.0
    per_axis = 201 if dim == 1 else 61
    region = Ball(tuple(c), radius)
    grid = GridSpec(region, per_axis)
    xi = float(np.round(rng.uniform(0.0, 0.5), 2))
    lam = float(np.round(rng.uniform(0.4, 1.0), 2))
    # hypothesis margin from the actual grid minimum of the loss
    probe_grid = grid.points()
    xb = np.asarray(c, dtype=float)
    from trapkit.traps import loss_margins
    from trapkit.moves import unit_cost_model

    theta = loss_margins(phi, unit_cost_model(dim), xi, xb, probe_grid)
    gamma = float(max(0.05, -float(np.min(theta)) + 0.05))
    params = EkelandParams(gamma=gamma, lam=lam, region=region, grid=grid)
    return phi, tuple(c), xi, params


def strip_wall_time(obj):
    if isinstance(obj, dict):
        return {k: strip_wall_time(v) for k, v in obj.items() if k != "wall_time_s"}
    if isinstance(obj, list):
        return [strip_wall_time(v) for v in obj]
    return obj
