//! Randomized value-iteration solvers.
//!
//! The stack builds up in layers: `randomized_vi` applies the sampled
//! backup for a fixed number of rounds against exact offsets;
//! `sampled_randomized_vi` replaces the offsets with sampled estimates;
//! `high_precision_random_vi` / `sublinear_random_vi` wrap either in an
//! error-halving outer loop that re-anchors the offsets at each phase; the
//! `*_mon_*` variants keep every iterate an increasing underestimate so the
//! final policy is as good as the final values.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_value_iteration, optimal_oracle, policy_values};
use crate::mdp::{greedy_policy, policy_operator, Dmdp, MdpModel, Policy, Values};
use crate::sampling::{
    apx_mon_val, apx_val, exact_offsets, sampled_offsets, KernelOptions, OffsetTable,
    SamplingStrategy, SeedSource, TransitionSampler,
};

/// Shared solver configuration.
///
/// The meaning of `epsilon` depends on the entry point: for the round-based
/// solvers (`randomized_vi`, `sampled_randomized_mon_vi`, ...) it is the
/// per-round backup accuracy, for the halving drivers and [`solve`] it is
/// the final ℓ∞ target.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub epsilon: f64,
    /// Total failure probability budget for the call.
    pub delta: f64,
    pub seed: u64,
    /// Forces the inner round count (the `L` / `T` of the round-based
    /// solvers) instead of the formula default.
    pub rounds_override: Option<usize>,
    /// Forces the outer phase count of the halving drivers.
    pub phases_override: Option<usize>,
    /// Fan the per-(state, action) sampling out over threads; results are
    /// identical to the sequential order.
    pub parallel: bool,
    pub sampling: SamplingStrategy,
    /// Record every inner iterate (values and policy) in the outcome.
    pub record_trace: bool,
}

impl SolveConfig {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Self {
        SolveConfig {
            epsilon,
            delta,
            seed,
            rounds_override: None,
            phases_override: None,
            parallel: false,
            sampling: SamplingStrategy::Auto,
            record_trace: false,
        }
    }

    pub(crate) fn kernel_options(&self) -> KernelOptions {
        KernelOptions {
            parallel: self.parallel,
            strategy: self.sampling,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                requirement: "positive and finite",
            });
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: self.delta,
                requirement: "inside (0, 1)",
            });
        }
        Ok(())
    }

    fn derived(&self, epsilon: f64, delta: f64, seed: u64) -> SolveConfig {
        SolveConfig {
            epsilon,
            delta,
            seed,
            rounds_override: None,
            phases_override: None,
            ..self.clone()
        }
    }
}

/// Per-run telemetry. `samples_per_outer` holds one entry per outer unit of
/// the algorithm: rounds for the round-based solvers, phases for the
/// halving drivers, horizon steps for the finite-horizon solvers. Offset
/// construction counts toward `total_samples` and toward the phase that
/// paid for it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub algorithm: String,
    pub iterations: u64,
    pub total_samples: u64,
    pub samples_per_outer: Vec<u64>,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy_suboptimality: Option<f64>,
}

impl SolveReport {
    fn new(algorithm: &str) -> Self {
        SolveReport {
            algorithm: algorithm.to_string(),
            iterations: 0,
            total_samples: 0,
            samples_per_outer: Vec::new(),
            wall_ms: 0.0,
            value_error: None,
            policy_suboptimality: None,
        }
    }
}

/// Final values and policy plus telemetry. `trace` holds the per-round
/// iterates when the config asked for them.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub values: Values,
    pub policy: Policy,
    pub report: SolveReport,
    pub trace: Vec<(Values, Policy)>,
}

/// Phase and round counts of the halving drivers:
/// `K = ⌈log2(M / (ε(1−γ)))⌉` and `L = ⌈ln(4/(1−γ)) / (1−γ)⌉`.
pub fn halving_schedule(reward_bound: f64, epsilon: f64, discount: f64) -> (usize, usize) {
    let ratio = reward_bound / (epsilon * (1.0 - discount));
    let k = ratio.log2().ceil().max(1.0) as usize;
    (k, halving_rounds(discount))
}

fn halving_rounds(discount: f64) -> usize {
    (((4.0 / (1.0 - discount)).ln() / (1.0 - discount)).ceil()).max(1.0) as usize
}

/// Round count sufficient to shrink an initial distance `initial_dist` to
/// the `4εγ/(1−γ)` floor, with the extra round needed for the policy
/// quality bound: `1 + ⌈ln(D / (2εγ)) / (1−γ)⌉`.
pub fn rounds_for_initial_error(initial_dist: f64, eps: f64, discount: f64) -> usize {
    let ratio = initial_dist / (2.0 * eps * discount);
    if !(ratio > 1.0) {
        return 1;
    }
    1 + (ratio.ln() / (1.0 - discount)).ceil() as usize
}

fn check_rounds(rounds: usize) -> Result<()> {
    if rounds == 0 {
        return Err(Error::InvalidParameter {
            name: "rounds",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    Ok(())
}

/// `L` rounds of the sampled backup against exact offsets anchored at
/// `v0`. With probability `1 − delta` the result satisfies
/// `‖v_L − v*‖∞ <= 2εγ/(1−γ) + e^{−L(1−γ)}·‖v0 − v*‖∞`.
///
/// `cfg.epsilon` is the per-round backup accuracy `ε`.
pub fn randomized_vi(
    d: &Dmdp,
    sampler: &TransitionSampler,
    v0: &Values,
    rounds: usize,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    cfg.check()?;
    check_rounds(rounds)?;
    v0.assert_finite()?;
    let x = exact_offsets(d, v0)?;
    let seeds = SeedSource::new(cfg.seed);
    run_rounds(
        d, sampler, v0, &x, 0, rounds, cfg.delta, &seeds, cfg, start, "randomized-vi",
    )
}

/// Like [`randomized_vi`] but the offsets themselves are sampled to
/// accuracy `cfg.epsilon`. The failure budget is split evenly between the
/// offset table and the `L` rounds.
pub fn sampled_randomized_vi(
    d: &Dmdp,
    sampler: &TransitionSampler,
    v0: &Values,
    rounds: usize,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    cfg.check()?;
    check_rounds(rounds)?;
    v0.assert_finite()?;
    let seeds = SeedSource::new(cfg.seed);
    let (x, offset_samples) = sampled_offsets(
        d,
        sampler,
        v0,
        cfg.epsilon,
        cfg.delta / 2.0,
        &seeds,
        0,
        &cfg.kernel_options(),
    )?;
    run_rounds(
        d,
        sampler,
        v0,
        &x,
        offset_samples,
        rounds,
        cfg.delta / 2.0,
        &seeds,
        cfg,
        start,
        "sampled-randomized-vi",
    )
}

#[allow(clippy::too_many_arguments)]
fn run_rounds(
    d: &Dmdp,
    sampler: &TransitionSampler,
    v0: &Values,
    x: &OffsetTable,
    offset_samples: u64,
    rounds: usize,
    rounds_delta: f64,
    seeds: &SeedSource,
    cfg: &SolveConfig,
    start: Instant,
    name: &str,
) -> Result<SolveOutcome> {
    let opts = cfg.kernel_options();
    let per_round_delta = rounds_delta / rounds as f64;
    let mut v = v0.clone();
    let mut policy = Policy::zeros(d.num_states());
    let mut per_outer = Vec::with_capacity(rounds);
    let mut trace = Vec::new();
    for l in 1..=rounds {
        let r = apx_val(
            d,
            sampler,
            &v,
            v0,
            x,
            cfg.epsilon,
            per_round_delta,
            seeds,
            l as u64,
            &opts,
        )?;
        v = r.values;
        policy = r.policy;
        per_outer.push(r.samples);
        if cfg.record_trace {
            trace.push((v.clone(), policy.clone()));
        }
    }
    let mut report = SolveReport::new(name);
    report.iterations = rounds as u64;
    report.total_samples = offset_samples + per_outer.iter().sum::<u64>();
    report.samples_per_outer = per_outer;
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SolveOutcome {
        values: v,
        policy,
        report,
        trace,
    })
}

/// `T` rounds of the monotone backup against sampled offsets.
///
/// Requires `T_{π0}(v0) >= v0` entry-wise. Offsets are sampled at accuracy
/// `cfg.epsilon / 2` (matching the accuracy the monotone backup assumes of
/// them) with half the failure budget; the rounds share the other half.
/// Iterates never decrease, and with probability `1 − delta` every round
/// keeps `T_{π_t}(v_t) >= v_t` and approximates the value operator to
/// `2γ·ε` per round.
pub fn sampled_randomized_mon_vi(
    d: &Dmdp,
    sampler: &TransitionSampler,
    v0: &Values,
    pi0: &Policy,
    rounds: usize,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    cfg.check()?;
    check_rounds(rounds)?;
    v0.assert_finite()?;
    let seeds = SeedSource::new(cfg.seed);
    let opts = cfg.kernel_options();
    let half_eps = cfg.epsilon / 2.0;
    let (x, offset_samples) =
        sampled_offsets(d, sampler, v0, half_eps, cfg.delta / 2.0, &seeds, 0, &opts)?;
    let per_round_delta = cfg.delta / 2.0 / rounds as f64;
    let mut v = v0.clone();
    let mut policy = pi0.clone();
    let mut per_outer = Vec::with_capacity(rounds);
    let mut trace = Vec::new();
    for t in 1..=rounds {
        let r = apx_mon_val(
            d,
            sampler,
            &v,
            &policy,
            v0,
            &x,
            half_eps,
            per_round_delta,
            &seeds,
            t as u64,
            &opts,
        )?;
        v = r.values;
        policy = r.policy;
        per_outer.push(r.samples);
        if cfg.record_trace {
            trace.push((v.clone(), policy.clone()));
        }
    }
    let mut report = SolveReport::new("sampled-randomized-mon-vi");
    report.iterations = rounds as u64;
    report.total_samples = offset_samples + per_outer.iter().sum::<u64>();
    report.samples_per_outer = per_outer;
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SolveOutcome {
        values: v,
        policy,
        report,
        trace,
    })
}

enum Halving {
    ExactOffsets,
    SampledOffsets,
    Monotone,
}

/// Error-halving driver over exact offsets: phase `k` runs
/// [`randomized_vi`] re-anchored at the previous phase's output with target
/// `ε_k = ε_{k−1}/2`. Returns values within `cfg.epsilon` of `v*` with
/// probability `1 − cfg.delta`; `cfg.epsilon` is the final target.
pub fn high_precision_random_vi(
    d: &Dmdp,
    sampler: &TransitionSampler,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    run_halving(d, sampler, cfg, Halving::ExactOffsets, "high-precision")
}

/// Error-halving driver over sampled offsets. Runs entirely through the
/// sampling interface and returns `ε`-optimal values with probability
/// `1 − δ`.
pub fn sublinear_random_vi(
    d: &Dmdp,
    sampler: &TransitionSampler,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    run_halving(d, sampler, cfg, Halving::SampledOffsets, "sublinear")
}

/// Monotone error-halving driver: starts from the all `−M/(1−γ)` vector
/// (so any initial policy satisfies `T_π(v0) >= v0`), keeps iterates
/// increasing, and returns a policy whose exact values are within `ε` of
/// `v*` with probability `1 − δ` — no extra `1/(1−γ)` loss on the policy.
pub fn sublinear_random_mon_vi(
    d: &Dmdp,
    sampler: &TransitionSampler,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    run_halving(d, sampler, cfg, Halving::Monotone, "sublinear-mon")
}

fn run_halving(
    d: &Dmdp,
    sampler: &TransitionSampler,
    cfg: &SolveConfig,
    variant: Halving,
    name: &str,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    cfg.check()?;
    let gamma = d.discount();
    let span = d.reward_bound() / (1.0 - gamma);
    if cfg.epsilon >= span {
        // ‖0 − v*‖∞ <= M/(1−γ) already meets the target.
        let values = Values::zeros(d.num_states());
        let policy = greedy_policy(d, &values)?;
        let mut report = SolveReport::new(name);
        report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        return Ok(SolveOutcome {
            values,
            policy,
            report,
            trace: Vec::new(),
        });
    }

    // The monotone variant starts one halving step further out because its
    // starting point is −M/(1−γ)·1, twice as far from v* as 0.
    let (mut eps_k, default_phases) = match variant {
        Halving::Monotone => {
            let ratio = 2.0 * d.reward_bound() / (cfg.epsilon * (1.0 - gamma));
            (2.0 * span, ratio.log2().ceil().max(1.0) as usize)
        }
        _ => (span, halving_schedule(d.reward_bound(), cfg.epsilon, gamma).0),
    };
    let phases = cfg.phases_override.unwrap_or(default_phases);
    let rounds = cfg.rounds_override.unwrap_or_else(|| halving_rounds(gamma));
    if phases == 0 {
        return Err(Error::InvalidParameter {
            name: "phases",
            value: 0.0,
            requirement: "at least 1",
        });
    }

    let seeds = SeedSource::new(cfg.seed);
    let mut v = match variant {
        Halving::Monotone => Values::constant(d.num_states(), -span),
        _ => Values::zeros(d.num_states()),
    };
    let mut policy = Policy::zeros(d.num_states());
    let mut per_outer = Vec::with_capacity(phases);
    let mut trace = Vec::new();
    let mut iterations = 0u64;
    for k in 1..=phases {
        eps_k /= 2.0;
        let inner_eps = (1.0 - gamma) * eps_k / (4.0 * gamma);
        let inner_cfg = cfg.derived(
            inner_eps,
            cfg.delta / phases as f64,
            seeds.child(k as u64).master(),
        );
        let out = match variant {
            Halving::ExactOffsets => randomized_vi(d, sampler, &v, rounds, &inner_cfg)?,
            Halving::SampledOffsets => sampled_randomized_vi(d, sampler, &v, rounds, &inner_cfg)?,
            Halving::Monotone => {
                sampled_randomized_mon_vi(d, sampler, &v, &policy, rounds, &inner_cfg)?
            }
        };
        v = out.values;
        policy = out.policy;
        per_outer.push(out.report.total_samples);
        iterations += out.report.iterations;
        trace.extend(out.trace);
    }

    let mut report = SolveReport::new(name);
    report.iterations = iterations;
    report.total_samples = per_outer.iter().sum();
    report.samples_per_outer = per_outer;
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SolveOutcome {
        values: v,
        policy,
        report,
        trace,
    })
}

/// Runs [`randomized_vi`] from `v0` with the round count from
/// [`rounds_for_initial_error`] (using the a-priori distance bound
/// `‖v0‖∞ + M/(1−γ)`) and returns the last round's policy. At per-round
/// accuracy `ε` the policy is `16ε/(1−γ)²`-optimal with probability
/// `1 − δ`.
pub fn policy_from_values(
    d: &Dmdp,
    sampler: &TransitionSampler,
    v0: &Values,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    cfg.check()?;
    v0.assert_finite()?;
    let dist_bound = v0.inf_norm() + d.reward_bound() / (1.0 - d.discount());
    let rounds = cfg
        .rounds_override
        .unwrap_or_else(|| rounds_for_initial_error(dist_bound, cfg.epsilon, d.discount()));
    let mut out = randomized_vi(d, sampler, v0, rounds, cfg)?;
    out.report.algorithm = "policy-from-values".to_string();
    Ok(out)
}

/// Discounted-MDP solver selection for the command-line surface; all
/// variants take the final ℓ∞ target as `cfg.epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    ExactVi,
    RandomizedVi,
    HighPrecision,
    Sublinear,
    SublinearMon,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::ExactVi,
        Algorithm::RandomizedVi,
        Algorithm::HighPrecision,
        Algorithm::Sublinear,
        Algorithm::SublinearMon,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::ExactVi => "exact-vi",
            Algorithm::RandomizedVi => "randomized-vi",
            Algorithm::HighPrecision => "high-precision",
            Algorithm::Sublinear => "sublinear",
            Algorithm::SublinearMon => "sublinear-mon",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL
            .iter()
            .find(|a| a.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// Solves to an `ε`-optimal value vector (policy quality depends on the
/// algorithm; the monotone variant guarantees an `ε`-optimal policy).
pub fn solve(
    d: &Dmdp,
    sampler: &TransitionSampler,
    algorithm: Algorithm,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    match algorithm {
        Algorithm::ExactVi => {
            let start = Instant::now();
            cfg.check()?;
            let (values, iters) =
                exact_value_iteration(d, &Values::zeros(d.num_states()), cfg.epsilon)?;
            let policy = greedy_policy(d, &values)?;
            let mut report = SolveReport::new("exact-vi");
            report.iterations = iters as u64;
            report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(SolveOutcome {
                values,
                policy,
                report,
                trace: Vec::new(),
            })
        }
        Algorithm::RandomizedVi => {
            // One-shot calibration from zero initial values and zero
            // offsets: per-round accuracy (1−γ)ε/(4γ) over enough rounds to
            // beat the M/(1−γ) initial distance.
            let start = Instant::now();
            cfg.check()?;
            let gamma = d.discount();
            let span = d.reward_bound() / (1.0 - gamma);
            let inner_eps = (1.0 - gamma) * cfg.epsilon / (4.0 * gamma);
            let rounds = cfg
                .rounds_override
                .unwrap_or_else(|| rounds_for_initial_error(span, inner_eps, gamma));
            let inner = cfg.derived(inner_eps, cfg.delta, cfg.seed);
            let mut out = randomized_vi(d, sampler, &Values::zeros(d.num_states()), rounds, &inner)?;
            out.report.algorithm = "randomized-vi".to_string();
            out.report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(out)
        }
        Algorithm::HighPrecision => high_precision_random_vi(d, sampler, cfg),
        Algorithm::Sublinear => sublinear_random_vi(d, sampler, cfg),
        Algorithm::SublinearMon => sublinear_random_mon_vi(d, sampler, cfg),
    }
}

/// Measured errors against the exact oracle at tolerance `tol`:
/// `‖values − v*‖∞` and `max_i (v*_i − v_π(i))`.
#[derive(Debug, Clone, Copy)]
pub struct OracleMetrics {
    pub value_error: f64,
    pub policy_suboptimality: f64,
}

pub fn oracle_metrics(
    d: &Dmdp,
    values: &Values,
    policy: &Policy,
    tol: f64,
) -> Result<OracleMetrics> {
    let (v_star, _) = optimal_oracle(d, tol)?;
    let value_error = values.inf_dist(&v_star);
    let v_pi = policy_values(d, policy, tol)?;
    let policy_suboptimality = -v_pi.min_gap(&v_star);
    Ok(OracleMetrics {
        value_error,
        policy_suboptimality,
    })
}

/// Computes [`oracle_metrics`] and stores them in the outcome's report.
pub fn attach_oracle_metrics(d: &Dmdp, outcome: &mut SolveOutcome, tol: f64) -> Result<()> {
    let m = oracle_metrics(d, &outcome.values, &outcome.policy, tol)?;
    outcome.report.value_error = Some(m.value_error);
    outcome.report.policy_suboptimality = Some(m.policy_suboptimality);
    Ok(())
}

/// Entry check used by the monotone solvers' callers in tests: the pair
/// `(v0, π0)` must satisfy `T_{π0}(v0) >= v0` entry-wise.
pub fn monotone_precondition_holds(d: &Dmdp, v0: &Values, pi0: &Policy) -> Result<bool> {
    let t = policy_operator(d, pi0, v0)?;
    Ok(t.min_gap(v0) >= -1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::tests::random_dmdp;
    use crate::mdp::Transition;

    fn single(r: f64, gamma: f64) -> (Dmdp, TransitionSampler) {
        let d = Dmdp::new(
            1,
            1,
            vec![vec![Transition::new(0, 1.0)]],
            vec![r],
            gamma,
            1.0,
        )
        .unwrap();
        let s = TransitionSampler::build(&d).unwrap();
        (d, s)
    }

    #[test]
    fn halving_schedule_matches_worked_example() {
        // M = 1, ε = 0.01, γ = 0.9: K = ⌈log2 1000⌉ = 10, L = ⌈10·ln 40⌉ = 37.
        assert_eq!(halving_schedule(1.0, 0.01, 0.9), (10, 37));
    }

    #[test]
    fn randomized_vi_single_state_meets_quality_bound() {
        let (d, s) = single(1.0, 0.5);
        let cfg = SolveConfig::new(0.01, 0.1, 42);
        let out = randomized_vi(&d, &s, &Values::zeros(1), 40, &cfg).unwrap();
        // 2εγ/(1−γ) + e^{−L(1−γ)}·‖v0 − v*‖∞ with v* = 2.
        let bound = 2.0 * 0.01 * 0.5 / 0.5 + (-40.0f64 * 0.5).exp() * 2.0;
        assert!((out.values[0] - 2.0).abs() <= bound);
        assert_eq!(out.report.iterations, 40);
    }

    #[test]
    fn randomized_vi_from_oracle_start_keeps_floor() {
        let d = random_dmdp(10, 3, 0.9, 50);
        let s = TransitionSampler::build(&d).unwrap();
        let (v_star, _) = optimal_oracle(&d, 1e-10).unwrap();
        let cfg = SolveConfig::new(0.05, 0.1, 7);
        let out = randomized_vi(&d, &s, &v_star, 5, &cfg).unwrap();
        let floor = 2.0 * 0.05 * 0.9 / 0.1;
        assert!(out.values.inf_dist(&v_star) <= floor);
    }

    #[test]
    fn sampled_randomized_vi_equals_plain_at_zero_anchor() {
        // At v0 = 0 the sampled offsets are exactly zero with zero samples,
        // so both variants follow identical streams.
        let d = random_dmdp(8, 2, 0.9, 51);
        let s = TransitionSampler::build(&d).unwrap();
        let v0 = Values::zeros(8);
        let plain = {
            let cfg = SolveConfig::new(0.1, 0.2, 9);
            randomized_vi(&d, &s, &v0, 6, &cfg).unwrap()
        };
        let sampled = {
            // Halved round budget δ/2 must match the plain call's δ to make
            // the two runs draw identical sample counts.
            let cfg = SolveConfig::new(0.1, 0.4, 9);
            sampled_randomized_vi(&d, &s, &v0, 6, &cfg).unwrap()
        };
        assert_eq!(plain.values, sampled.values);
        assert_eq!(plain.policy, sampled.policy);
        assert_eq!(plain.report.total_samples, sampled.report.total_samples);
    }

    #[test]
    fn high_precision_returns_zeros_for_loose_target() {
        let d = random_dmdp(6, 2, 0.5, 52);
        let s = TransitionSampler::build(&d).unwrap();
        let cfg = SolveConfig::new(2.0, 0.1, 1); // ε >= M/(1−γ) = 2
        let out = high_precision_random_vi(&d, &s, &cfg).unwrap();
        assert!(out.values.iter().all(|&v| v == 0.0));
        assert_eq!(out.report.total_samples, 0);
    }

    #[test]
    fn high_precision_single_state_hits_target() {
        let (d, s) = single(1.0, 0.9);
        let cfg = SolveConfig::new(0.01, 0.1, 3);
        let out = high_precision_random_vi(&d, &s, &cfg).unwrap();
        assert!((out.values[0] - 10.0).abs() <= 0.01);
    }

    #[test]
    fn sublinear_single_state_hits_target() {
        let (d, s) = single(1.0, 0.5);
        let cfg = SolveConfig::new(0.01, 0.1, 4);
        let out = sublinear_random_vi(&d, &s, &cfg).unwrap();
        assert!((out.values[0] - 2.0).abs() <= 0.01);
    }

    #[test]
    fn monotone_precondition_holds_at_lower_corner() {
        let d = random_dmdp(9, 3, 0.9, 53);
        let span = 1.0 / (1.0 - 0.9);
        let v0 = Values::constant(9, -span);
        for a in 0..3 {
            let pi = Policy::from_vec(vec![a; 9]);
            assert!(monotone_precondition_holds(&d, &v0, &pi).unwrap());
        }
    }

    #[test]
    fn monotone_solver_single_state() {
        let (d, s) = single(1.0, 0.5);
        let cfg = SolveConfig::new(0.01, 0.1, 5);
        let out = sublinear_random_mon_vi(&d, &s, &cfg).unwrap();
        assert_eq!(out.policy.as_slice(), &[0]);
        assert!((out.values[0] - 2.0).abs() <= 0.01);
    }

    #[test]
    fn monotone_iterates_never_decrease() {
        let d = random_dmdp(10, 3, 0.9, 54);
        let s = TransitionSampler::build(&d).unwrap();
        let mut cfg = SolveConfig::new(0.2, 0.1, 6);
        cfg.record_trace = true;
        let out = sublinear_random_mon_vi(&d, &s, &cfg).unwrap();
        let mut prev = Values::constant(10, -10.0);
        for (v, _) in &out.trace {
            assert!(v.min_gap(&prev) >= 0.0);
            prev = v.clone();
        }
    }

    #[test]
    fn solve_is_deterministic_per_seed() {
        let d = random_dmdp(8, 2, 0.9, 55);
        let s = TransitionSampler::build(&d).unwrap();
        for algo in Algorithm::ALL {
            let cfg = SolveConfig::new(0.3, 0.2, 11);
            let a = solve(&d, &s, algo, &cfg).unwrap();
            let b = solve(&d, &s, algo, &cfg).unwrap();
            assert_eq!(a.values, b.values, "{algo}");
            assert_eq!(a.policy, b.policy, "{algo}");
            assert_eq!(a.report.total_samples, b.report.total_samples, "{algo}");
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for algo in Algorithm::ALL {
            assert_eq!(algo.name().parse::<Algorithm>().unwrap(), algo);
        }
        assert!("q-learning".parse::<Algorithm>().is_err());
    }

    #[test]
    fn sample_accounting_sums_per_outer() {
        let d = random_dmdp(6, 2, 0.9, 56);
        let s = TransitionSampler::build(&d).unwrap();
        let cfg = SolveConfig::new(0.1, 0.1, 12);
        let out = randomized_vi(&d, &s, &Values::zeros(6), 5, &cfg).unwrap();
        assert_eq!(
            out.report.total_samples,
            out.report.samples_per_outer.iter().sum::<u64>()
        );
    }
}
