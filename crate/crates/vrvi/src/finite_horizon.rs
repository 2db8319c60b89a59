//! Finite-horizon MDPs: exact backward induction, sampled backward
//! induction, and the variance-reduced blocked variant that re-anchors its
//! offsets every `L` steps.
//!
//! Backups are undiscounted (effective discount 1).

use std::time::Instant;

use crate::error::{Error, Result};
use crate::mdp::{
    bellman_backup, q_value, validate_table, MdpModel, Policy, Transition, Values,
};
use crate::sampling::{apx_val, exact_offsets, SeedSource, TransitionSampler};
use crate::solvers::{SolveConfig, SolveOutcome, SolveReport};

/// Finite-horizon MDP: the discounted model minus the discount, plus a
/// horizon `H >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteHorizonMdp {
    num_states: usize,
    num_actions: usize,
    rows: Vec<Vec<Transition>>,
    rewards: Vec<f64>,
    horizon: usize,
    reward_bound: f64,
}

impl FiniteHorizonMdp {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        rows: Vec<Vec<Transition>>,
        rewards: Vec<f64>,
        horizon: usize,
        reward_bound: f64,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(Error::InvalidParameter {
                name: "num_states/num_actions",
                value: 0.0,
                requirement: "at least one state and one action",
            });
        }
        if horizon == 0 {
            return Err(Error::InvalidHorizon);
        }
        let pairs = num_states * num_actions;
        if rows.len() != pairs || rewards.len() != pairs {
            return Err(Error::DimensionMismatch {
                expected: pairs,
                actual: rows.len().min(rewards.len()),
            });
        }
        let fh = FiniteHorizonMdp {
            num_states,
            num_actions,
            rows,
            rewards,
            horizon,
            reward_bound,
        };
        fh.validate()?;
        Ok(fh)
    }

    pub fn validate(&self) -> Result<()> {
        validate_table(
            self.num_states,
            self.num_actions,
            &self.rows,
            &self.rewards,
            self.reward_bound,
        )
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

impl MdpModel for FiniteHorizonMdp {
    fn num_states(&self) -> usize {
        self.num_states
    }
    fn num_actions(&self) -> usize {
        self.num_actions
    }
    fn discount(&self) -> f64 {
        1.0
    }
    fn reward_bound(&self) -> f64 {
        self.reward_bound
    }
    fn reward(&self, state: usize, action: usize) -> f64 {
        self.rewards[state * self.num_actions + action]
    }
    fn row(&self, state: usize, action: usize) -> &[Transition] {
        &self.rows[state * self.num_actions + action]
    }
}

/// Time-dependent plan: `actions[h]` is the policy at step `h` for
/// `h ∈ [0, H)` and `values[h]` the corresponding value-to-go vectors,
/// with `values[H]` the terminal vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NonStationaryPolicy {
    pub actions: Vec<Policy>,
    pub values: Vec<Values>,
}

impl NonStationaryPolicy {
    pub fn horizon(&self) -> usize {
        self.actions.len()
    }
}

/// Finite-horizon solver result.
#[derive(Debug, Clone)]
pub struct FhOutcome {
    pub plan: NonStationaryPolicy,
    pub report: SolveReport,
}

fn check_terminal(fh: &FiniteHorizonMdp, terminal: &Values) -> Result<()> {
    if terminal.len() != fh.num_states {
        return Err(Error::DimensionMismatch {
            expected: fh.num_states,
            actual: terminal.len(),
        });
    }
    terminal.assert_finite()
}

/// Exact backward induction from `values[H] = terminal` down to step 0,
/// recording per-step greedy actions (lowest index on ties).
pub fn exact_backward_induction(
    fh: &FiniteHorizonMdp,
    terminal: &Values,
) -> Result<NonStationaryPolicy> {
    check_terminal(fh, terminal)?;
    let hh = fh.horizon;
    let mut values = vec![Values::zeros(fh.num_states); hh + 1];
    let mut actions = vec![Policy::zeros(fh.num_states); hh];
    values[hh] = terminal.clone();
    for h in (0..hh).rev() {
        let (v, pi) = bellman_backup(fh, &values[h + 1])?;
        values[h] = v;
        actions[h] = pi;
    }
    Ok(NonStationaryPolicy { actions, values })
}

/// Exact value-to-go vectors of a fixed non-stationary policy.
pub fn evaluate_nonstationary(
    fh: &FiniteHorizonMdp,
    actions: &[Policy],
    terminal: &Values,
) -> Result<Vec<Values>> {
    check_terminal(fh, terminal)?;
    if actions.len() != fh.horizon {
        return Err(Error::DimensionMismatch {
            expected: fh.horizon,
            actual: actions.len(),
        });
    }
    let hh = fh.horizon;
    let mut values = vec![Values::zeros(fh.num_states); hh + 1];
    values[hh] = terminal.clone();
    for h in (0..hh).rev() {
        values[h] = crate::mdp::policy_operator(fh, &actions[h], &values[h + 1])?;
    }
    Ok(values)
}

/// Sampled backward induction: exact offsets at the terminal anchor, then
/// one sampled backup per step at accuracy `ε/(2H)` with failure budget
/// `δ/H`. Returns an `ε`-optimal non-stationary policy with probability
/// `1 − δ`; `cfg.epsilon` is the total policy error budget.
pub fn randomized_finite_horizon_vi(
    fh: &FiniteHorizonMdp,
    sampler: &TransitionSampler,
    terminal: &Values,
    cfg: &SolveConfig,
) -> Result<FhOutcome> {
    run_blocks(fh, sampler, terminal, fh.horizon, cfg, "fh-randomized")
}

/// Blocked variant: processes the horizon in blocks of `block_len` steps,
/// re-anchoring the value vector (and recomputing exact offsets) at every
/// block boundary. Inside a block the sampled differences stay within the
/// block's reward growth, which keeps per-step sample counts small. With
/// `block_len == H` this reproduces [`randomized_finite_horizon_vi`]
/// bit-for-bit at matched seeds. Starts from a zero terminal vector.
pub fn variance_reduced_finite_horizon_vi(
    fh: &FiniteHorizonMdp,
    sampler: &TransitionSampler,
    block_len: usize,
    cfg: &SolveConfig,
) -> Result<FhOutcome> {
    let terminal = Values::zeros(fh.num_states);
    if block_len == 0 || block_len > fh.horizon {
        return Err(Error::InvalidParameter {
            name: "block_len",
            value: block_len as f64,
            requirement: "between 1 and the horizon",
        });
    }
    run_blocks(
        fh,
        sampler,
        &terminal,
        block_len,
        cfg,
        "fh-variance-reduced",
    )
}

/// Block length equilibrating offset recomputation against sampling:
/// `L = clamp(⌊(ε²·|S| / (H²·M²))^{1/3}⌋, 1, H)`.
pub fn tuned_block_len(epsilon: f64, num_states: usize, horizon: usize, reward_bound: f64) -> usize {
    let cubed = epsilon * epsilon * num_states as f64
        / (horizon as f64 * horizon as f64 * reward_bound * reward_bound);
    let l = cubed.cbrt().floor() as usize;
    l.clamp(1, horizon)
}

fn run_blocks(
    fh: &FiniteHorizonMdp,
    sampler: &TransitionSampler,
    terminal: &Values,
    block_len: usize,
    cfg: &SolveConfig,
    name: &str,
) -> Result<FhOutcome> {
    let start = Instant::now();
    if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: cfg.epsilon,
            requirement: "positive and finite",
        });
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: cfg.delta,
            requirement: "inside (0, 1)",
        });
    }
    check_terminal(fh, terminal)?;

    let hh = fh.horizon;
    let eps_step = cfg.epsilon / (2.0 * hh as f64);
    let delta_step = cfg.delta / hh as f64;
    let seeds = SeedSource::new(cfg.seed);
    let opts = cfg.kernel_options();

    let mut values = vec![Values::zeros(fh.num_states); hh + 1];
    let mut actions = vec![Policy::zeros(fh.num_states); hh];
    let mut per_step = vec![0u64; hh];
    values[hh] = terminal.clone();

    let mut hi = hh;
    while hi > 0 {
        let lo = hi.saturating_sub(block_len);
        let anchor = values[hi].clone();
        let x = exact_offsets(fh, &anchor)?;
        for h in (lo..hi).rev() {
            let r = apx_val(
                fh,
                sampler,
                &values[h + 1],
                &anchor,
                &x,
                eps_step,
                delta_step,
                &seeds,
                h as u64,
                &opts,
            )?;
            values[h] = r.values;
            actions[h] = r.policy;
            per_step[h] = r.samples;
        }
        hi = lo;
    }

    let mut report = SolveReport::new(name);
    report.iterations = hh as u64;
    report.total_samples = per_step.iter().sum();
    report.samples_per_outer = per_step;
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(FhOutcome {
        plan: NonStationaryPolicy { actions, values },
        report,
    })
}

/// Finite-horizon solver selection for the command-line surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FhAlgorithm {
    ExactBackwardInduction,
    Randomized,
    VarianceReduced,
}

impl FhAlgorithm {
    pub fn name(&self) -> &'static str {
        match self {
            FhAlgorithm::ExactBackwardInduction => "exact-vi",
            FhAlgorithm::Randomized => "fh-randomized",
            FhAlgorithm::VarianceReduced => "fh-variance-reduced",
        }
    }
}

/// Dispatcher mirroring [`crate::solvers::solve`] for finite-horizon
/// instances. `block_len` applies to the variance-reduced variant and
/// defaults to [`tuned_block_len`].
pub fn solve_fh(
    fh: &FiniteHorizonMdp,
    sampler: &TransitionSampler,
    algorithm: FhAlgorithm,
    cfg: &SolveConfig,
    block_len: Option<usize>,
) -> Result<FhOutcome> {
    match algorithm {
        FhAlgorithm::ExactBackwardInduction => {
            let start = Instant::now();
            let plan = exact_backward_induction(fh, &Values::zeros(fh.num_states))?;
            let mut report = SolveReport::new("exact-vi");
            report.iterations = fh.horizon as u64;
            report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(FhOutcome { plan, report })
        }
        FhAlgorithm::Randomized => {
            randomized_finite_horizon_vi(fh, sampler, &Values::zeros(fh.num_states), cfg)
        }
        FhAlgorithm::VarianceReduced => {
            let l = block_len.unwrap_or_else(|| {
                tuned_block_len(cfg.epsilon, fh.num_states, fh.horizon, fh.reward_bound)
            });
            variance_reduced_finite_horizon_vi(fh, sampler, l, cfg)
        }
    }
}

/// Worst suboptimality of a plan over start states:
/// `max_i (v*_0(i) − v^π_0(i))` with both sides computed exactly.
pub fn plan_suboptimality(fh: &FiniteHorizonMdp, plan: &NonStationaryPolicy) -> Result<f64> {
    let terminal = plan
        .values
        .last()
        .cloned()
        .unwrap_or_else(|| Values::zeros(fh.num_states));
    let exact = exact_backward_induction(fh, &terminal)?;
    let achieved = evaluate_nonstationary(fh, &plan.actions, &terminal)?;
    Ok(-achieved[0].min_gap(&exact.values[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_state_two_actions(horizon: usize) -> FiniteHorizonMdp {
        FiniteHorizonMdp::new(
            1,
            2,
            vec![
                vec![Transition::new(0, 1.0)],
                vec![Transition::new(0, 1.0)],
            ],
            vec![0.0, 1.0],
            horizon,
            1.0,
        )
        .unwrap()
    }

    fn random_fh(s: usize, a: usize, horizon: usize, seed: u64) -> FiniteHorizonMdp {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut rewards = Vec::new();
        for _ in 0..s * a {
            let weights: Vec<f64> = (0..s).map(|_| 1.0 - rng.random::<f64>()).collect();
            let total: f64 = weights.iter().sum();
            rows.push(
                weights
                    .iter()
                    .enumerate()
                    .map(|(j, w)| Transition::new(j, w / total))
                    .collect(),
            );
            rewards.push(rng.random_range(-1.0..=1.0));
        }
        FiniteHorizonMdp::new(s, a, rows, rewards, horizon, 1.0).unwrap()
    }

    /// Memo-free recursion over the full decision tree; independent of the
    /// array-based induction it checks.
    fn tree_value(fh: &FiniteHorizonMdp, h: usize, i: usize, terminal: &Values) -> f64 {
        if h == fh.horizon() {
            return terminal[i];
        }
        let mut best = f64::NEG_INFINITY;
        for a in 0..fh.num_actions() {
            let mut q = fh.reward(i, a);
            for t in fh.row(i, a) {
                q += t.prob * tree_value(fh, h + 1, t.next, terminal);
            }
            best = best.max(q);
        }
        best
    }

    #[test]
    fn horizon_one_takes_best_reward() {
        let fh = one_state_two_actions(1);
        let plan = exact_backward_induction(&fh, &Values::zeros(1)).unwrap();
        assert_eq!(plan.values[0].as_slice(), &[1.0]);
        assert_eq!(plan.actions[0].as_slice(), &[1]);
    }

    #[test]
    fn horizon_two_adds_rewards() {
        let fh = one_state_two_actions(2);
        let plan = exact_backward_induction(&fh, &Values::zeros(1)).unwrap();
        assert_eq!(plan.values[0].as_slice(), &[2.0]);
    }

    #[test]
    fn backward_induction_matches_tree_recursion() {
        let fh = random_fh(6, 3, 4, 61);
        let terminal = Values::zeros(6);
        let plan = exact_backward_induction(&fh, &terminal).unwrap();
        for i in 0..6 {
            let tv = tree_value(&fh, 0, i, &terminal);
            assert!((plan.values[0][i] - tv).abs() <= 1e-9, "state {i}");
        }
    }

    #[test]
    fn randomized_single_state_is_exact() {
        let fh = one_state_two_actions(5);
        let s = TransitionSampler::build(&fh).unwrap();
        let cfg = SolveConfig::new(0.5, 0.1, 1);
        let out = randomized_finite_horizon_vi(&fh, &s, &Values::zeros(1), &cfg).unwrap();
        // Single state: sampled differences are constant, so every backup is
        // exact.
        assert_eq!(out.plan.values[0].as_slice(), &[5.0]);
    }

    #[test]
    fn per_step_error_stays_within_budget() {
        let fh = random_fh(8, 2, 6, 62);
        let s = TransitionSampler::build(&fh).unwrap();
        let exact = exact_backward_induction(&fh, &Values::zeros(8)).unwrap();
        let eps = 0.6;
        let mut good = 0;
        for rep in 0..100u64 {
            let cfg = SolveConfig::new(eps, 0.1, 7000 + rep);
            let out = randomized_finite_horizon_vi(&fh, &s, &Values::zeros(8), &cfg).unwrap();
            let ok = (0..=6).all(|h| {
                let t = (6 - h) as f64;
                out.plan.values[h].inf_dist(&exact.values[h]) <= t * eps / 6.0 + 1e-12
            });
            if ok {
                good += 1;
            }
        }
        assert!(good >= 90, "good {good}/100");
    }

    #[test]
    fn full_block_reproduces_unblocked_run() {
        let fh = random_fh(7, 2, 5, 63);
        let s = TransitionSampler::build(&fh).unwrap();
        let cfg = SolveConfig::new(0.5, 0.1, 17);
        let unblocked =
            randomized_finite_horizon_vi(&fh, &s, &Values::zeros(7), &cfg).unwrap();
        let blocked = variance_reduced_finite_horizon_vi(&fh, &s, 5, &cfg).unwrap();
        assert_eq!(unblocked.plan, blocked.plan);
        assert_eq!(
            unblocked.report.total_samples,
            blocked.report.total_samples
        );
    }

    #[test]
    fn single_step_blocks_reanchor_every_step() {
        let fh = random_fh(6, 2, 4, 64);
        let s = TransitionSampler::build(&fh).unwrap();
        let cfg = SolveConfig::new(0.8, 0.1, 18);
        let out = variance_reduced_finite_horizon_vi(&fh, &s, 1, &cfg).unwrap();
        // With one-step blocks each sampled difference is a single backup
        // step, so its range is at most 2M.
        for h in 0..4 {
            let gap = out.plan.values[h].sub(&out.plan.values[h + 1]).inf_norm();
            assert!(gap <= 2.0 * 1.0 + 1e-9);
        }
        assert_eq!(out.plan.actions.len(), 4);
    }

    #[test]
    fn tuned_block_len_worked_example() {
        // ε = 1, |S| = 1000, H = 10, M = 1 → ⌊10^{1/3}⌋ = 2.
        assert_eq!(tuned_block_len(1.0, 1000, 10, 1.0), 2);
        assert_eq!(tuned_block_len(1e-6, 10, 10, 1.0), 1);
        assert_eq!(tuned_block_len(100.0, 100_000, 4, 1.0), 4);
    }

    #[test]
    fn plan_suboptimality_zero_for_exact_plan() {
        let fh = random_fh(6, 3, 4, 65);
        let plan = exact_backward_induction(&fh, &Values::zeros(6)).unwrap();
        let sub = plan_suboptimality(&fh, &plan).unwrap();
        assert!(sub.abs() <= 1e-12);
    }

    #[test]
    fn rejects_zero_horizon() {
        let err = FiniteHorizonMdp::new(
            1,
            1,
            vec![vec![Transition::new(0, 1.0)]],
            vec![0.0],
            0,
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidHorizon));
    }
}
