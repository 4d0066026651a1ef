//! Bounds for robust optimal stopping when only the law of the maximum offer
//! is known.
//!
//! The adversary may correlate the `n` offers arbitrarily as long as their
//! maximum follows a given distribution `F_max`. This crate computes the
//! monopoly-price threshold, the adversary's best responses to threshold
//! policies, certified lower and upper bounds on the minimax value, the
//! mean-variance prophet bound, and a Monte Carlo engine that checks the
//! closed forms.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > y)` also rejects NaN

pub mod adversary;
pub mod bounds;
pub mod dist;
pub mod error;
pub mod monopoly;
pub mod numeric;
pub mod policy;
pub mod prophet;
pub mod sim;

pub use adversary::{
    brute_force_adversary, grid_policy_lower_bound, instance_against_deterministic,
    instance_against_finite_random, instance_against_uniform, min_payoff_finite_random,
    min_payoff_uniform, worst_tuple_uniform, WorstCaseInstance,
};
pub use bounds::{
    beta_cutoff, bound_report, count_iterations, lower_bound_uniform, partition_bound,
    partition_value, upper_bound_partition, upper_bound_universal, BoundMeta, BoundReport,
    PartitionBound,
};
pub use dist::{DistKind, DistSpec, MaxDistribution};
pub use error::{Error, Result};
pub use monopoly::{c_constant, revenue, solve_monopoly, MonopolyResult};
pub use policy::{epsilon_grid_policy, PolicySpec, ThresholdPolicy};
pub use prophet::{
    explicit_log_bound, explicit_log_bound_at_alpha, solve_worst_ratio, worst_case_distribution,
    ProphetSolution,
};
pub use sim::{simulate_policy_vs_instance, SimConfig, SimResult};
