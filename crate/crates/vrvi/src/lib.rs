//! Randomized value-iteration solvers for tabular Markov decision
//! processes.
//!
//! The crate covers the full pipeline: exact operators and oracles
//! ([`mdp`], [`exact`]), constant-time transition sampling and sampled
//! Bellman backups with variance-reduction offsets ([`sampling`]), the
//! randomized solver stack with its monotone variants ([`solvers`]),
//! finite-horizon backward induction ([`finite_horizon`]), the LP and
//! ℓ1-regression reformulations ([`lp`]), seeded instance generators
//! ([`gen`]) and the instance/solution file formats ([`io`]).
//!
//! All randomness flows through counter-based streams keyed by
//! (round, state, action), so solver runs are bit-reproducible per seed
//! and parallel fan-out matches sequential execution.

pub mod error;
pub mod exact;
pub mod finite_horizon;
pub mod gen;
pub mod io;
pub mod lp;
pub mod mdp;
pub mod sampling;
pub mod solvers;

pub use error::{Error, Result};
pub use exact::{
    brute_force_optimal, exact_value_iteration, optimal_oracle, policy_values,
};
pub use finite_horizon::{
    evaluate_nonstationary, exact_backward_induction, plan_suboptimality,
    randomized_finite_horizon_vi, solve_fh, tuned_block_len,
    variance_reduced_finite_horizon_vi, FhAlgorithm, FhOutcome, FiniteHorizonMdp,
    NonStationaryPolicy,
};
pub use gen::{generate_dmdp, generate_finite_horizon, Family, GeneratorSpec};
pub use io::{
    read_instance, read_solution, write_instance, write_solution, Instance, SolutionBody,
    SolutionFile,
};
pub use lp::{
    build_l1, build_lp, certify_l1_to_lp, check_lp_solution, policy_from_lp, DmdpLp,
    L1Problem, LpCheckReport,
};
pub use mdp::{
    bellman_backup, greedy_policy, policy_operator, q_value, value_operator, Dmdp, MdpModel,
    Policy, Transition, Values,
};
pub use sampling::{
    apx_mon_val, apx_trans, apx_val, derive_seed, exact_offsets, hoeffding_sample_count,
    sampled_offsets, ApxValResult, KernelOptions, OffsetTable, RngStream, SamplingStrategy,
    SeedSource, StreamKey, TransitionSampler,
};
pub use solvers::{
    attach_oracle_metrics, halving_schedule, high_precision_random_vi, oracle_metrics,
    policy_from_values, randomized_vi, rounds_for_initial_error, sampled_randomized_mon_vi,
    sampled_randomized_vi, solve, sublinear_random_mon_vi, sublinear_random_vi, Algorithm,
    OracleMetrics, SolveConfig, SolveOutcome, SolveReport,
};
