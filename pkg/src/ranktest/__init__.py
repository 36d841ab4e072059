"""Two-sample testing for pairwise-comparison and ranking data."""

from .core import (ModelClass, PairwiseDataset, PartialRanking, ProbabilityMatrix,
                   RankingDataset, Setting, ValidationReport, aggregate, frobenius_separation,
                   validate_model)
from .permutation import (PermutationConfig, Smoothing, pairwise_permutation_test,
                          permute_pairwise_once, ranking_permutation_test)
from .rankbreak import (BreakMethod, RankBreaker, break_complete, break_deterministic_disjoint,
                        break_random_disjoint, round_robin)
from .teststat import (FixedTestConfig, StatisticValue, TestReport, fixed_test, majority_test,
                       oracle_conditional_mean, oracle_variance_bound, statistic, threshold)

__version__ = "0.1.0"

__all__ = [
    "BreakMethod", "FixedTestConfig", "ModelClass", "PairwiseDataset", "PartialRanking",
    "PermutationConfig", "ProbabilityMatrix", "RankBreaker", "RankingDataset", "Setting",
    "Smoothing", "StatisticValue", "TestReport", "ValidationReport", "aggregate",
    "break_complete", "break_deterministic_disjoint", "break_random_disjoint", "fixed_test",
    "frobenius_separation", "majority_test", "oracle_conditional_mean", "oracle_variance_bound",
    "pairwise_permutation_test", "permute_pairwise_once", "ranking_permutation_test",
    "round_robin", "statistic", "threshold", "validate_model",
]
