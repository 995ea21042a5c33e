"""Chi-squared information in spin synchronization versus bond percolation."""

from .budget import Budget, BudgetError, get_budget, parse_budget
from .channels import AWGN, BSC, ERASED, ChannelError, EdgeChannel, Erasure, awgn_f, parse_channel
from .exact import (
    ImpossibleObservationError,
    InfoResult,
    SyncModel,
    exact_joint_chi2,
    exact_pairwise_chi2,
    exact_pairwise_kl,
    exact_set_chi2,
    posterior_pair_mean,
)
from .graphs import Graph, make_complete, make_er, make_grid_box, make_path, make_regular_tree
from .montecarlo import McConfig, mc_pairwise_chi2, mc_set_chi2
from .percolation import (
    PercolationSpec,
    ProbResult,
    exact_connection_prob,
    mc_connection_prob,
    path_union_bound,
)
from .verify import check_bound, random_bound_suite

__all__ = [
    "AWGN",
    "BSC",
    "Budget",
    "BudgetError",
    "ChannelError",
    "ERASED",
    "EdgeChannel",
    "Erasure",
    "Graph",
    "ImpossibleObservationError",
    "InfoResult",
    "McConfig",
    "PercolationSpec",
    "ProbResult",
    "SyncModel",
    "awgn_f",
    "check_bound",
    "exact_connection_prob",
    "exact_joint_chi2",
    "exact_pairwise_chi2",
    "exact_pairwise_kl",
    "exact_set_chi2",
    "get_budget",
    "make_complete",
    "make_er",
    "make_grid_box",
    "make_path",
    "make_regular_tree",
    "mc_connection_prob",
    "mc_pairwise_chi2",
    "mc_set_chi2",
    "parse_budget",
    "parse_channel",
    "path_union_bound",
    "posterior_pair_mean",
    "random_bound_suite",
]
