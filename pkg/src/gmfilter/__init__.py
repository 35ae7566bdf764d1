"""Graph-matching matched filters for locating a noisy template inside a larger network."""

from .assign import AssignmentProblem, linear_assignment, project_to_injection, solve
from .faq import FaqConfig, FaqResult, FaqTrace, gmp_objective, objective, relaxed_objective, run_faq
from .filter import FilterConfig, MatchResult, front_seeds, pair_frequencies, rank_by_objective, run_filter
from .graph import Graph, Injection, SeedSet, TransportPlan, correct_matches, edge_errors
from .models import (
    CorrErParams,
    RdpgParams,
    adversarial_naive_lambda,
    homogeneous_params,
    planted_partition_params,
    sample_corr_er,
    sample_rdpg_pair,
)
from .oracle import EnumerationBudget, brute_force_gmp
from .padding import PaddedMatrix, Scheme, pad, parse_scheme

__version__ = "0.1.0"

__all__ = [
    "AssignmentProblem",
    "CorrErParams",
    "EnumerationBudget",
    "FaqConfig",
    "FaqResult",
    "FaqTrace",
    "FilterConfig",
    "Graph",
    "Injection",
    "MatchResult",
    "PaddedMatrix",
    "RdpgParams",
    "Scheme",
    "SeedSet",
    "TransportPlan",
    "adversarial_naive_lambda",
    "brute_force_gmp",
    "correct_matches",
    "edge_errors",
    "front_seeds",
    "gmp_objective",
    "homogeneous_params",
    "linear_assignment",
    "objective",
    "pad",
    "pair_frequencies",
    "parse_scheme",
    "planted_partition_params",
    "project_to_injection",
    "rank_by_objective",
    "relaxed_objective",
    "run_faq",
    "run_filter",
    "sample_corr_er",
    "sample_rdpg_pair",
    "solve",
]
