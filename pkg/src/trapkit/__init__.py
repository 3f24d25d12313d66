"""trapkit: desk-scale calculus for worthwhile moves and stationary traps.

Payoff fields live on R^1..R^3.  The toolkit evaluates advantages, costs,
and proximal payoffs of candidate moves; probes slopes (epsilon-subgradients,
epsilon-normals) by shrinking-shell sampling; detects exact and approximate
stationary traps on grids and certifies them; runs a constructive distance-
perturbed descent to nearby perturbed minimizers; and searches for
extremal-system witness rates for two-set systems.  A scenario-driven CLI
(`trapkit run`) emits machine-readable reports.
"""

__version__ = "0.1.0"

from trapkit.backend import HAVE_COMPILED, active_backend, set_backend
from trapkit.fields import (
    Ball,
    GridSpec,
    ParseError,
    ScalarField,
    eval_field,
    gradient,
    parse_field,
    unparse_field,
)
from trapkit.moves import (
    CostModel,
    advantage,
    cost,
    inconvenience,
    is_worthwhile_change,
    not_worthwhile_loss,
    proximal_payoff_dec,
    proximal_payoff_inc,
    tilt_perturb,
    worthwhile_gain,
)
from trapkit.evaluations import (
    EvaluationVerdict,
    LinearEvaluation,
    check_optimistic,
    check_pessimistic,
    linear_estimate,
    proximal_evaluation_check,
    subgradient_optimistic_cert,
    verify_support_function,
)
from trapkit.subgrad import (
    ProbeSpec,
    ProbeVerdict,
    SubgradientQuery,
    eps_subdiff_interval_1d,
    eps_subgrad_member,
    limiting_subdiff_sample_1d,
    min_eps_factor,
    proximal_subgrad_member,
)
from trapkit.traps import (
    TrapQuery,
    TrapVerdict,
    approx_trap_certificate,
    classify_trap,
    is_stationary_trap,
    trap_certificate,
)
from trapkit.descent import (
    DescentTrace,
    EkelandParams,
    HypothesisError,
    ekeland_descend,
    rate_bound_check,
    verify_perturbed_min,
)
from trapkit.regions import (
    ExtremalWitness,
    RegionSet,
    eps_normal_member,
    extremal_witness,
    is_locally_extremal,
    trap_relative_check,
)

__all__ = [
    "__version__",
    "HAVE_COMPILED",
    "active_backend",
    "set_backend",
    "Ball",
    "GridSpec",
    "ParseError",
    "ScalarField",
    "eval_field",
    "gradient",
    "parse_field",
    "unparse_field",
    "CostModel",
    "advantage",
    "cost",
    "inconvenience",
    "is_worthwhile_change",
    "not_worthwhile_loss",
    "proximal_payoff_dec",
    "proximal_payoff_inc",
    "tilt_perturb",
    "worthwhile_gain",
    "EvaluationVerdict",
    "LinearEvaluation",
    "check_optimistic",
    "check_pessimistic",
    "linear_estimate",
    "proximal_evaluation_check",
    "subgradient_optimistic_cert",
    "verify_support_function",
    "ProbeSpec",
    "ProbeVerdict",
    "SubgradientQuery",
    "eps_subdiff_interval_1d",
    "eps_subgrad_member",
    "limiting_subdiff_sample_1d",
    "min_eps_factor",
    "proximal_subgrad_member",
    "TrapQuery",
    "TrapVerdict",
    "approx_trap_certificate",
    "classify_trap",
    "is_stationary_trap",
    "trap_certificate",
    "DescentTrace",
    "EkelandParams",
    "HypothesisError",
    "ekeland_descend",
    "rate_bound_check",
    "verify_perturbed_min",
    "ExtremalWitness",
    "RegionSet",
    "eps_normal_member",
    "extremal_witness",
    "is_locally_extremal",
    "trap_relative_check",
]
