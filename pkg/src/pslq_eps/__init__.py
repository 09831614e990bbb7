"""Arbitrary-precision integer relation detection with certified error
control for empirical (error-bounded) input data."""

__version__ = "0.1.0"

from .error_control import ErrorPlan, InfeasiblePlanError, iteration_bound, plan
from .hyperplane import (
    HyperplaneMatrix,
    TrivialRelationFound,
    UnitVector,
    build_h,
    normalize_and_permute,
)
from .ingest import (
    VectorSpec,
    algebraic_power_vector,
    brute_force_relation,
    perturb,
    read_vector,
    verify_relation,
)
from .estimator import IntegerRelationFinder
from .numerics import PrecisionContext, eval_constant, nearest_int, with_precision
from .pslq_core import (
    RelationResult,
    Status,
    run_pslq_epsilon,
    run_pslq_exact,
)

__all__ = [
    "__version__",
    "ErrorPlan",
    "InfeasiblePlanError",
    "iteration_bound",
    "plan",
    "HyperplaneMatrix",
    "TrivialRelationFound",
    "UnitVector",
    "build_h",
    "normalize_and_permute",
    "VectorSpec",
    "algebraic_power_vector",
    "brute_force_relation",
    "perturb",
    "read_vector",
    "verify_relation",
    "IntegerRelationFinder",
    "PrecisionContext",
    "eval_constant",
    "nearest_int",
    "with_precision",
    "RelationResult",
    "Status",
    "run_pslq_epsilon",
    "run_pslq_exact",
]


def find_relation(values, eps, coeff_bound, **kw):
    """Convenience one-shot search; see cli_report.run_search for options."""
    from .cli_report import run_search
    from .ingest import VectorSpec

    exprs = [x if isinstance(x, str) else str(x) for x in values]
    return run_search(VectorSpec("constant_list", exprs=exprs), eps, coeff_bound, **kw)
