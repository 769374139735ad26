"""Height growth and orbit counting for semigroups of rational maps on P^1 over Q."""

from .errors import InvalidInputError, InvariantError, ResourceLimitError
from .orbit_engine import (
    SemigroupSystem,
    estimate_beta,
    is_preperiodic,
    log_cutoff,
    orbit_census,
    predict_function_count,
)
from .p1_arith import ProjPointQ, RationalMapQ, check_generic_set, critical_values, height, point
from .weight_census import classify, count_exact, solve_rho

__version__ = "0.1.0"
