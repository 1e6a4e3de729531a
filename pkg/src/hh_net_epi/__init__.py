"""Households-on-a-random-network SIR epidemics: asymptotics and simulation."""

from hh_net_epi.analytics import (
    ModelParams,
    PgfPair,
    backward_pgfs,
    critical_lambda_g,
    expected_relative_final_size,
    forward_pgfs,
    global_contact_prob,
    major_outbreak_prob,
    r_star,
    smallest_fixed_point,
    summarize,
)
from hh_net_epi.degree_dist import (
    Constant,
    DegreeDistribution,
    Geometric,
    Poisson,
    PowerLaw,
    PowerLawCutoff,
)
from hh_net_epi.errors import (
    ConditioningError,
    ConfigError,
    DegenerateDistributionError,
    NonConvergenceError,
)
from hh_net_epi.infectious_period import Exponential, Fixed, InfectiousPeriod, ZeroOrInfinite
from hh_net_epi.network import Network, build_network, imperfection_stats
from hh_net_epi.simulator import BatchSummary, EpidemicOutcome, classify_major, run_batch, run_epidemic

__version__ = "0.1.0"

__all__ = [
    "BatchSummary",
    "ConditioningError",
    "ConfigError",
    "Constant",
    "DegenerateDistributionError",
    "DegreeDistribution",
    "EpidemicOutcome",
    "Exponential",
    "Fixed",
    "Geometric",
    "InfectiousPeriod",
    "ModelParams",
    "Network",
    "NonConvergenceError",
    "PgfPair",
    "Poisson",
    "PowerLaw",
    "PowerLawCutoff",
    "ZeroOrInfinite",
    "backward_pgfs",
    "build_network",
    "classify_major",
    "critical_lambda_g",
    "expected_relative_final_size",
    "forward_pgfs",
    "global_contact_prob",
    "imperfection_stats",
    "major_outbreak_prob",
    "r_star",
    "run_batch",
    "run_epidemic",
    "smallest_fixed_point",
    "summarize",
]
