"""Case-control heritability estimation from genetic relationship matrices."""

from ._herit import (
    DegenerateDesign,
    InvalidDesign,
    NotPositiveDefinite,
    StudyDesign,
    bvn_rect,
    constant_c,
    design_from_prevalences,
    estimate_first_order,
    estimate_second_order,
    exact_pair_expectation,
    first_order_pair_expectation,
    grm,
    offdiag_square_mean,
    second_order_objective,
    second_order_pair_expectation,
    simulate_study,
    std_normal_cdf,
    std_normal_quantile,
)

__all__ = [
    "DegenerateDesign",
    "InvalidDesign",
    "NotPositiveDefinite",
    "StudyDesign",
    "bvn_rect",
    "constant_c",
    "design_from_prevalences",
    "estimate_first_order",
    "estimate_second_order",
    "exact_pair_expectation",
    "first_order_pair_expectation",
    "grm",
    "offdiag_square_mean",
    "second_order_objective",
    "second_order_pair_expectation",
    "simulate_study",
    "std_normal_cdf",
    "std_normal_quantile",
]
