"""Exchangeable Gibbs partitions of type alpha and their group Chinese restaurant construction."""

from .crp import (
    GroupOutcome,
    check_conjecture8,
    deletion_conditional_eppf,
    expected_kstar,
    expected_s,
    group_outcome_prob,
    joint_kstar_s,
    new_sizes_marginal,
    pmf_kstar,
    pmf_s,
    pmf_s_given_kstar,
    prob_all_new,
    prob_all_old,
    prob_avoid_tables,
    sample_group,
    sample_next,
)
from .gibbs import (
    DirichletProcess,
    ExplicitTable,
    GibbsModel,
    InvalidTableError,
    PartitionState,
    PitmanYor,
    eppf,
    load_table,
    predictive,
    validate_backward_recursion,
    v_weight,
)
from .numerics import Pmf, SignedLogValue, log_sum, rising_factorial
from .stirling import (
    StirlingTable,
    bell_polynomial,
    factorial_coefficient,
    noncentral_stirling,
    stirling,
    stirling_table,
)

__version__ = "0.1.0"
