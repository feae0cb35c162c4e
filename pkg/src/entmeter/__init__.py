"""Semidefinite-programming entanglement measures for bipartite states and channels."""

from .channels import BipartiteChannel, CPMap, compose, identity_channel, is_cpptp, replacer
from .channel_measures import (
    amortized_kappa_gap,
    amortized_max_rains_gap,
    kappa_entanglement_channel,
    log_negativity_channel,
    max_rains_channel,
    max_rains_channel_divergence,
    min_rains_channel_lower,
)
from .divergences import max_relative_entropy, relative_entropy, sandwiched_renyi
from .operators import DensityOperator, HermitianOperator, SystemLayout, partial_trace, partial_transpose
from .sdp import SdpProblem, SdpSolution, SolverError, solve
from .state_measures import (
    MeasureReport,
    is_ppt,
    is_ppt_prime,
    kappa_entanglement_state,
    log_negativity_state,
    max_rains_state,
    min_rains_state,
    one_shot_exact_distillable,
)

__version__ = "0.1.0"
