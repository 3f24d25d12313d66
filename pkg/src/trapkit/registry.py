"""Operation registry: every dispatchable operation with its argument
schema, the binding logic from scenario JSON values to Python objects, and
serialization of results into JSON-friendly records."""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from trapkit import descent, evaluations, fields, moves, regions, subgrad, traps
from trapkit.evaluations import LinearEvaluation
from trapkit.fields import Ball, GridSpec, ScalarField, parse_field, unparse_field
from trapkit.moves import CostModel
from trapkit.regions import RegionSet
from trapkit.subgrad import ProbeSpec, SubgradientQuery

__all__ = ["OPS", "ScenarioEnv", "bind_and_call", "list_operations", "to_jsonable"]


@dataclass
class ScenarioEnv:
    functions: dict
    costs: dict
    sets: dict

    @classmethod
    def from_scenario(cls, doc: dict) -> "ScenarioEnv":
        functions = {
            name: parse_field(
                spec["expr"], spec["dim"], domain=spec.get("domain"), grad=spec.get("grad")
            )
            for name, spec in doc.get("functions", {}).items()
        }
        costs = {
            name: CostModel(eta=parse_field(spec["eta"], spec["dim"]))
            for name, spec in doc.get("costs", {}).items()
        }
        sets = {name: _build_set(spec) for name, spec in doc.get("sets", {}).items()}
        return cls(functions=functions, costs=costs, sets=sets)


def _build_set(spec: dict) -> RegionSet:
    kind = spec["kind"]
    if kind == "halfspace":
        return RegionSet.halfspace(spec["normal"], spec["offset"])
    if kind == "ball":
        return RegionSet.ball(spec["center"], spec["radius"])
    if kind == "box":
        return RegionSet.box(spec["lo"], spec["hi"])
    return RegionSet.predicate(spec["expr"], spec["dim"])


class BindingError(ValueError):
    pass


def _resolve(kind: str, value, env: ScenarioEnv):
    if kind == "field":
        if isinstance(value, str):
            if value not in env.functions:
                raise BindingError(f"unknown function {value!r}")
            return env.functions[value]
        if isinstance(value, dict):
            return parse_field(
                value["expr"], value["dim"], domain=value.get("domain"), grad=value.get("grad")
            )
        raise BindingError(f"expected a function name or inline definition, got {value!r}")
    if kind == "cost":
        if value is None:
            return None
        if isinstance(value, str):
            if value not in env.costs:
                raise BindingError(f"unknown cost model {value!r}")
            return env.costs[value]
        if isinstance(value, dict):
            return CostModel(eta=parse_field(value["eta"], value["dim"]))
        raise BindingError(f"expected a cost name or inline definition, got {value!r}")
    if kind == "set":
        if isinstance(value, str):
            if value not in env.sets:
                raise BindingError(f"unknown set {value!r}")
            return env.sets[value]
        if isinstance(value, dict):
            return _build_set(value)
        raise BindingError(f"expected a set name or inline definition, got {value!r}")
    if kind in ("point", "vector"):
        if not isinstance(value, (list, tuple)):
            raise BindingError(f"expected a coordinate list, got {value!r}")
        return [float(v) for v in value]
    if kind == "real":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise BindingError(f"expected a number, got {value!r}")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise BindingError(f"expected an integer, got {value!r}")
        return int(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise BindingError(f"expected a boolean, got {value!r}")
        return value
    if kind == "ball":
        return Ball(tuple(value["center"]), float(value["radius"]))
    if kind == "grid":
        ball = Ball(tuple(value["center"]), float(value["radius"]))
        return GridSpec(ball, int(value.get("per_axis", 101)))
    if kind == "probe":
        if value is None:
            return ProbeSpec()
        return ProbeSpec(
            r0=float(value.get("r0", 0.5)),
            shells=int(value.get("shells", 12)),
            samples_per_shell=int(value.get("samples_per_shell", 64)),
            liminf_window=int(value.get("liminf_window", 3)),
        )
    if kind == "ekeland":
        region = Ball(tuple(value["region"]["center"]), float(value["region"]["radius"]))
        g = value["grid"]
        grid = GridSpec(
            Ball(tuple(g["center"]), float(g["radius"])), int(g.get("per_axis", 101))
        )
        return descent.EkelandParams(
            gamma=float(value["gamma"]), lam=float(value["lambda"]), region=region, grid=grid
        )
    if kind == "scan3":
        lo, hi, step = value
        return (float(lo), float(hi), float(step))
    if kind == "shifts":
        return [
            ([float(v) for v in a1], [float(v) for v in a2]) for a1, a2 in value
        ]
    if kind == "evaluation":
        if isinstance(value, dict) and "rate" in value:
            return LinearEvaluation(rate=tuple(value["rate"]), anchor=tuple(value["anchor"]))
        return _resolve("field", value, env)
    raise BindingError(f"unknown binding kind {kind!r}")  # pragma: no cover


@dataclass(frozen=True)
class Param:
    name: str
    kind: str
    required: bool = True


@dataclass(frozen=True)
class Op:
    name: str
    summary: str
    params: tuple
    call: object  # callable(**kwargs)


def _op(name, summary, params, call):
    return Op(name=name, summary=summary, params=tuple(Param(*p) for p in params), call=call)


def _eps_subgrad_member(phi, xbar, xstar, eps, probe=None):
    return subgrad.eps_subgrad_member(SubgradientQuery(phi, tuple(xbar), tuple(xstar), eps), probe)


def _is_stationary_trap(phi, xbar, grid, xi=0.0, gamma=0.0, strict=False,
                        whole_domain=False, region=None, cost=None):
    q = traps.TrapQuery(
        phi=phi, xbar=tuple(xbar), xi=xi, cost=cost, region=region,
        gamma=gamma, strict=strict, whole_domain=whole_domain,
    )
    return traps.is_stationary_trap(q, grid)


def _ekeland_descend(phi, xbar, xi, params, cost=None):
    x_gamma, trace = descent.ekeland_descend(phi, xbar, xi, params, cost=cost)
    return {"x_gamma": x_gamma, "trace": trace}


OPS: dict = {}
for op in [
    # fields
    _op("eval_field", "evaluate a payoff field at a point",
        [("f", "field"), ("p", "point")], fields.eval_field),
    _op("gradient", "gradient at a point (analytic or central differences)",
        [("f", "field"), ("p", "point"), ("h", "real", False)], fields.gradient),
    # moves
    _op("advantage", "payoff advantage of the move x -> y",
        [("g", "field"), ("x", "point"), ("y", "point")], moves.advantage),
    _op("cost", "linear cost of changing with the departure-point rate",
        [("c", "cost"), ("x", "point"), ("y", "point")], moves.cost),
    _op("inconvenience", "inconvenience of the move (equals its cost)",
        [("c", "cost"), ("x", "point"), ("y", "point")], moves.inconvenience),
    _op("proximal_payoff_dec", "loss-side proximal payoff Q_xi(x/xbar)",
        [("phi", "field"), ("c", "cost"), ("xi", "real"), ("xbar", "point"), ("x", "point")],
        moves.proximal_payoff_dec),
    _op("proximal_payoff_inc", "gain-side proximal payoff P_xi(x/xbar)",
        [("g", "field"), ("c", "cost"), ("xi", "real"), ("xbar", "point"), ("x", "point")],
        moves.proximal_payoff_inc),
    _op("worthwhile_gain", "net gain A - xi*I of the move",
        [("g", "field"), ("c", "cost"), ("xi", "real"), ("x", "point"), ("y", "point")],
        moves.worthwhile_gain),
    _op("not_worthwhile_loss", "net loss -A + xi*I of the move",
        [("phi", "field"), ("c", "cost"), ("xi", "real"), ("x", "point"), ("y", "point")],
        moves.not_worthwhile_loss),
    _op("is_worthwhile_change", "is the net gain of the move nonnegative",
        [("g", "field"), ("c", "cost"), ("xi", "real"), ("x", "point"), ("y", "point")],
        moves.is_worthwhile_change),
    _op("tilt_perturb", "subtract a linear functional from a payoff",
        [("phi", "field"), ("v", "vector")], moves.tilt_perturb),
    # evaluations
    _op("linear_estimate", "linear advantage estimate <rate, y - anchor>",
        [("le", "evaluation"), ("y", "point")], evaluations.linear_estimate),
    _op("check_optimistic", "does the evaluation overestimate the payoff on the grid",
        [("g", "field"), ("l", "evaluation"), ("xbar", "point"), ("grid", "grid")],
        evaluations.check_optimistic),
    _op("check_pessimistic", "does the evaluation underestimate the payoff on the grid",
        [("g", "field"), ("l", "evaluation"), ("xbar", "point"), ("grid", "grid")],
        evaluations.check_pessimistic),
    _op("subgradient_optimistic_cert", "grid check of the subgradient inequality",
        [("phi", "field"), ("xbar", "point"), ("xstar", "vector"), ("grid", "grid")],
        evaluations.subgradient_optimistic_cert),
    _op("proximal_evaluation_check",
        "proximal-loss vs linear-estimate inequality on a shrinking neighborhood",
        [("phi", "field"), ("xi", "real"), ("xbar", "point"), ("xstar", "vector"),
         ("eps", "real"), ("grid", "grid"), ("c", "cost", False)],
        evaluations.proximal_evaluation_check),
    _op("verify_support_function", "verify a smooth minorant candidate",
        [("s", "field"), ("phi", "field"), ("xbar", "point"), ("xstar", "vector"),
         ("grid", "grid")], evaluations.verify_support_function),
    # subgradient probes
    _op("eps_subgrad_member", "is the rate an eps-subgradient (probe liminf)",
        [("phi", "field"), ("xbar", "point"), ("xstar", "vector"), ("eps", "real"),
         ("probe", "probe", False)], _eps_subgrad_member),
    _op("eps_subdiff_interval_1d", "accepted-rate intervals from a 1-D lattice scan",
        [("phi", "field"), ("xbar", "point"), ("eps", "real"), ("probe", "probe", False),
         ("scan", "scan3", False)], subgrad.eps_subdiff_interval_1d),
    _op("proximal_subgrad_member", "proximal subgradient membership with curvature rho",
        [("phi", "field"), ("xbar", "point"), ("v", "vector"), ("rho", "real"),
         ("grid", "grid")], subgrad.proximal_subgrad_member),
    _op("limiting_subdiff_sample_1d", "approximate slope-accumulation clusters (1-D)",
        [("phi", "field"), ("xbar", "point"), ("probe", "probe", False)],
        subgrad.limiting_subdiff_sample_1d),
    _op("min_eps_factor", "smallest eps accepting the rate as an eps-subgradient",
        [("phi", "field"), ("xbar", "point"), ("xstar", "vector"), ("probe", "probe", False)],
        subgrad.min_eps_factor),
    # traps
    _op("is_stationary_trap", "direct grid check of the trap inequality",
        [("phi", "field"), ("xbar", "point"), ("grid", "grid"), ("xi", "real", False),
         ("gamma", "real", False), ("strict", "bool", False),
         ("whole_domain", "bool", False), ("region", "ball", False), ("cost", "cost", False)],
        _is_stationary_trap),
    _op("trap_certificate", "subgradient certificate for an exact trap (xi > eps)",
        [("phi", "field"), ("xbar", "point"), ("eps", "real"), ("xstar", "vector"),
         ("grid", "grid"), ("probe", "probe", False)], traps.trap_certificate),
    _op("approx_trap_certificate", "subgradient certificate for an approximate trap",
        [("phi", "field"), ("xbar", "point"), ("eps", "real"), ("xstar", "vector"),
         ("gamma", "real"), ("grid", "grid"), ("probe", "probe", False)],
        traps.approx_trap_certificate),
    _op("classify_trap", "flat/minimizer/rate classification at a point",
        [("phi", "field"), ("xbar", "point"), ("probe", "probe", False)],
        traps.classify_trap),
    # descent
    _op("ekeland_descend", "distance-perturbed descent to a settled point",
        [("phi", "field"), ("xbar", "point"), ("xi", "real"), ("params", "ekeland"),
         ("cost", "cost", False)], _ekeland_descend),
    _op("verify_perturbed_min", "independent scan of the perturbed-minimality inequality",
        [("phi", "field"), ("xbar", "point"), ("xi", "real"), ("x_gamma", "point"),
         ("params", "ekeland"), ("cost", "cost", False)], descent.verify_perturbed_min),
    _op("rate_bound_check", "settled-point rate bracket vs the gamma/lambda bound",
        [("phi", "field"), ("xbar", "point"), ("xi", "real"), ("x_gamma", "point"),
         ("params", "ekeland"), ("probe", "probe", False), ("scan", "scan3", False)],
        descent.rate_bound_check),
    # regions
    _op("eps_normal_member", "is the rate an eps-normal to the set (probe limsup)",
        [("omega", "set"), ("xbar", "point"), ("xstar", "vector"), ("eps", "real"),
         ("probe", "probe", False)], regions.eps_normal_member),
    _op("trap_relative_check", "trap relative to a set under a linear utility",
        [("xstar", "vector"), ("xi", "real"), ("xbar", "point"), ("omega", "set"),
         ("grid", "grid")], regions.trap_relative_check),
    _op("is_locally_extremal", "do the shift pairs pull the sets apart locally",
        [("omega1", "set"), ("omega2", "set"), ("xbar", "point"), ("shifts", "shifts"),
         ("region", "ball"), ("grid", "grid")], regions.is_locally_extremal),
    _op("extremal_witness", "antisymmetric normal-rate witness for a two-set system",
        [("omega1", "set"), ("omega2", "set"), ("xbar", "point"), ("eps", "real"),
         ("probe", "probe", False), ("scan", "int", False)], regions.extremal_witness),
]:
    OPS[op.name] = op


def bind_and_call(op_name: str, args: dict, env: ScenarioEnv):
    if op_name not in OPS:
        raise BindingError(f"unknown operation {op_name!r}")
    op = OPS[op_name]
    kwargs = {}
    known = {p.name for p in op.params}
    for key in args:
        if key not in known:
            raise BindingError(f"operation {op_name!r} has no parameter {key!r}")
    for p in op.params:
        if p.name in args:
            kwargs[p.name] = _resolve(p.kind, args[p.name], env)
        elif p.required:
            raise BindingError(f"operation {op_name!r} missing parameter {p.name!r}")
    return op.call(**kwargs)


def list_operations() -> list[dict]:
    return [
        {
            "op": op.name,
            "summary": op.summary,
            "params": [
                {"name": p.name, "kind": p.kind, "required": p.required}
                for p in op.params
            ],
        }
        for op in OPS.values()
    ]


def to_jsonable(obj):
    """Convert results to JSON-friendly structures.  Non-finite floats are
    encoded as the strings "inf" / "-inf" so reports stay strict JSON."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        if math.isnan(obj):  # pragma: no cover - NaN never escapes eval
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, (np.floating, np.integer)):
        return to_jsonable(obj.item())
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, ScalarField):
        return {"dim": obj.dim, "expr": unparse_field(obj)}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {}
        for f in dataclasses.fields(obj):
            if f.name.startswith("_"):
                continue
            out[f.name] = to_jsonable(getattr(obj, f.name))
        return out
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    raise TypeError(f"cannot serialize {type(obj).__name__}")
