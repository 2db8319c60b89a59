//! Sampled Bellman backups with variance reduction.
//!
//! `apx_trans` estimates `p_a(i)ᵀu` by averaging sampled entries of `u`,
//! with the Hoeffding-calibrated sample count `m = ⌈2M²/ε² · ln(2/δ)⌉`.
//! `apx_val` adds a precomputed offset `x_a(i) ≈ p_a(i)ᵀv₀` to a sampled
//! estimate of `p_a(i)ᵀ(u − v₀)`; the anchored difference has a smaller
//! range than `u` itself, which is what cuts the sample count.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mdp::{policy_operator, MdpModel, Policy, Values};
use crate::sampling::alias::TransitionSampler;
use crate::sampling::stream::{RngStream, SeedSource, StreamKey};

/// How `apx_trans` realizes its `m` draws.
///
/// `PerDraw` walks the alias table once per sample. `Binned` draws the
/// per-support-entry counts of the same `m` categorical samples from the
/// exact multinomial distribution in O(support) time, which makes large
/// sample counts affordable; the estimator's distribution is identical.
/// `Auto` switches to binned counts once `m` clearly exceeds the support
/// size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingStrategy {
    #[default]
    Auto,
    PerDraw,
    Binned,
}

impl std::str::FromStr for SamplingStrategy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(SamplingStrategy::Auto),
            "per-draw" => Ok(SamplingStrategy::PerDraw),
            "binned" => Ok(SamplingStrategy::Binned),
            other => Err(format!("unknown sampling strategy `{other}`")),
        }
    }
}

/// Execution options shared by the sampled kernel operations.
#[derive(Debug, Clone, Copy, Default)]
pub struct KernelOptions {
    /// Fan the (state, action) loop out over threads. Results are identical
    /// to sequential execution because every pair owns a keyed stream.
    pub parallel: bool,
    pub strategy: SamplingStrategy,
}

/// Number of samples needed for `|mean − p·u| <= eps` with probability
/// `1 − delta` when the sampled entries lie in `[-bound, bound]`.
pub fn hoeffding_sample_count(bound: f64, eps: f64, delta: f64) -> u64 {
    if bound == 0.0 {
        return 0;
    }
    let m = (2.0 * bound * bound / (eps * eps)) * (2.0 / delta).ln();
    if m >= u64::MAX as f64 {
        u64::MAX
    } else {
        m.ceil() as u64
    }
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
            requirement: "positive and finite",
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            requirement: "inside (0, 1)",
        });
    }
    Ok(())
}

/// Result of one sampled inner-product estimate. `samples` is the `m`
/// prescribed by the Hoeffding bound; it is what sample accounting tallies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransEstimate {
    pub value: f64,
    pub samples: u64,
}

/// Estimates `p_a(i)ᵀ diff` to accuracy `eps` with failure probability
/// `delta`, assuming `‖diff‖∞ <= bound`.
///
/// A `bound` of zero short-circuits to an exact 0 with no samples. If the
/// support of the row sees only one distinct value of `diff`, every draw
/// would return that value, so it is returned exactly.
pub fn apx_trans(
    diff: &[f64],
    bound: f64,
    state: usize,
    action: usize,
    eps: f64,
    delta: f64,
    sampler: &TransitionSampler,
    rng: &mut RngStream,
    strategy: SamplingStrategy,
) -> Result<TransEstimate> {
    check_eps_delta(eps, delta)?;
    if !(bound >= 0.0 && bound.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "bound",
            value: bound,
            requirement: "non-negative and finite",
        });
    }
    debug_assert!(
        diff.iter().all(|x| x.abs() <= bound * (1.0 + 1e-12)),
        "‖diff‖∞ exceeds the declared bound"
    );
    let m = hoeffding_sample_count(bound, eps, delta);
    if m == 0 {
        return Ok(TransEstimate {
            value: 0.0,
            samples: 0,
        });
    }

    let support = sampler.support(state, action);
    let n = support.len();

    let first = diff[support[0]];
    if support.iter().all(|&j| diff[j] == first) {
        return Ok(TransEstimate {
            value: first,
            samples: m,
        });
    }

    let binned = match strategy {
        SamplingStrategy::PerDraw => false,
        SamplingStrategy::Binned => true,
        SamplingStrategy::Auto => m >= 64 && m >= 4 * n as u64,
    };

    let counts = if binned {
        multinomial_counts(sampler.row_probs(state, action), m, rng)
    } else {
        let mut counts = vec![0u64; n];
        for _ in 0..m {
            counts[sampler.sample_slot(state, action, rng)] += 1;
        }
        counts
    };

    let mut sum = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        if c > 0 {
            sum += c as f64 * diff[support[k]];
        }
    }
    Ok(TransEstimate {
        value: sum / m as f64,
        samples: m,
    })
}

/// Draws the occupancy counts of `m` categorical samples by sequential
/// conditional binomials. The joint law is the multinomial of `m` draws
/// from `probs`.
fn multinomial_counts(probs: &[f64], m: u64, rng: &mut RngStream) -> Vec<u64> {
    let n = probs.len();
    let mut counts = vec![0u64; n];
    let mut remaining = m;
    let mut rem_p = 1.0f64;
    for k in 0..n {
        if remaining == 0 {
            break;
        }
        if k == n - 1 {
            counts[k] = remaining;
            break;
        }
        let p = (probs[k] / rem_p).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, p)
            .expect("conditional probability within [0, 1]")
            .sample(rng);
        counts[k] = draw;
        remaining -= draw;
        rem_p = (rem_p - probs[k]).max(f64::MIN_POSITIVE);
    }
    counts
}

/// Precomputed estimates of `p_a(i)ᵀ v₀`, the variance-reduction anchor.
#[derive(Debug, Clone)]
pub struct OffsetTable {
    values: Vec<f64>,
    num_actions: usize,
    accuracy: f64,
    anchor: Values,
}

impl OffsetTable {
    #[inline]
    pub fn value(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.num_actions + action]
    }

    /// Promised bound on `|x_a(i) − p_a(i)ᵀv₀|`; zero for exact tables.
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    /// The value vector the offsets were computed against.
    pub fn anchor(&self) -> &Values {
        &self.anchor
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_values_len(m: &impl MdpModel, u: &Values) -> Result<()> {
    if u.len() != m.num_states() {
        return Err(Error::DimensionMismatch {
            expected: m.num_states(),
            actual: u.len(),
        });
    }
    Ok(())
}

/// Exact offsets: `x_a(i) = p_a(i)ᵀ v₀` via sparse dot products.
pub fn exact_offsets(m: &impl MdpModel, v0: &Values) -> Result<OffsetTable> {
    check_values_len(m, v0)?;
    v0.assert_finite()?;
    let mut values = Vec::with_capacity(m.num_pairs());
    for i in 0..m.num_states() {
        for a in 0..m.num_actions() {
            values.push(crate::mdp::row_dot(m, i, a, v0.as_slice()));
        }
    }
    Ok(OffsetTable {
        values,
        num_actions: m.num_actions(),
        accuracy: 0.0,
        anchor: v0.clone(),
    })
}

/// Sampled offsets: every entry estimated by [`apx_trans`] on `v₀` with a
/// per-pair failure budget of `delta / (|S||A|)`, so the whole table is
/// `eps`-accurate with probability at least `1 − delta`. Also returns the
/// total number of samples.
pub fn sampled_offsets(
    m: &impl MdpModel,
    sampler: &TransitionSampler,
    v0: &Values,
    eps: f64,
    delta: f64,
    seeds: &SeedSource,
    anchor_round: u64,
    opts: &KernelOptions,
) -> Result<(OffsetTable, u64)> {
    check_eps_delta(eps, delta)?;
    check_values_len(m, v0)?;
    v0.assert_finite()?;
    let bound = v0.inf_norm();
    let pair_delta = delta / m.num_pairs() as f64;
    let per_state = fan_out(m.num_states(), opts.parallel, |i| {
        let mut row = Vec::with_capacity(m.num_actions());
        let mut samples = 0u64;
        for a in 0..m.num_actions() {
            let mut rng = seeds.stream(StreamKey::offsets(anchor_round, i, a));
            let est = apx_trans(
                v0.as_slice(),
                bound,
                i,
                a,
                eps,
                pair_delta,
                sampler,
                &mut rng,
                opts.strategy,
            )?;
            row.push(est.value);
            samples += est.samples;
        }
        Ok((row, samples))
    })?;
    let mut values = Vec::with_capacity(m.num_pairs());
    let mut samples = 0u64;
    for (row, s) in per_state {
        values.extend(row);
        samples += s;
    }
    Ok((
        OffsetTable {
            values,
            num_actions: m.num_actions(),
            accuracy: eps,
            anchor: v0.clone(),
        },
        samples,
    ))
}

/// Output of one sampled backup: values, the maximizing policy, and the
/// total number of samples prescribed across all (state, action) pairs.
#[derive(Debug, Clone)]
pub struct ApxValResult {
    pub values: Values,
    pub policy: Policy,
    pub samples: u64,
}

/// One sampled approximate Bellman backup.
///
/// For each pair, `S̃_a(i) = x_a(i) + apx_trans(u − v₀)` with per-pair
/// failure budget `delta/(|S||A|)`, then `Q̃_a(i) = r_a(i) + γ·S̃_a(i)` and
/// per state the maximum and lowest-index argmax. With offsets accurate to
/// `ε_x`, the result satisfies `‖ṽ − T(u)‖∞ <= γ(eps + ε_x)` and
/// `‖ṽ − T_π(u)‖∞ <= γ(eps + ε_x)` with probability `1 − delta`; callers
/// here always use `ε_x <= eps`, giving the `2γ·eps` contract.
#[allow(clippy::too_many_arguments)]
pub fn apx_val(
    m: &impl MdpModel,
    sampler: &TransitionSampler,
    u: &Values,
    v0: &Values,
    offsets: &OffsetTable,
    eps: f64,
    delta: f64,
    seeds: &SeedSource,
    round: u64,
    opts: &KernelOptions,
) -> Result<ApxValResult> {
    check_eps_delta(eps, delta)?;
    check_values_len(m, u)?;
    check_values_len(m, v0)?;
    u.assert_finite()?;
    if offsets.len() != m.num_pairs() {
        return Err(Error::DimensionMismatch {
            expected: m.num_pairs(),
            actual: offsets.len(),
        });
    }
    debug_assert_eq!(
        offsets.anchor().as_slice(),
        v0.as_slice(),
        "offset table anchored at a different v0"
    );

    let diff = u.sub(v0);
    let bound = diff.inf_norm();
    let gamma = m.discount();
    let pair_delta = delta / m.num_pairs() as f64;

    let per_state = fan_out(m.num_states(), opts.parallel, |i| {
        let mut best = f64::NEG_INFINITY;
        let mut best_a = 0usize;
        let mut samples = 0u64;
        for a in 0..m.num_actions() {
            let mut rng = seeds.stream(StreamKey::backup(round, i, a));
            let est = apx_trans(
                diff.as_slice(),
                bound,
                i,
                a,
                eps,
                pair_delta,
                sampler,
                &mut rng,
                opts.strategy,
            )?;
            samples += est.samples;
            let s_tilde = offsets.value(i, a) + est.value;
            let q = m.reward(i, a) + gamma * s_tilde;
            if q > best {
                best = q;
                best_a = a;
            }
        }
        Ok((best, best_a, samples))
    })?;

    let mut values = Vec::with_capacity(m.num_states());
    let mut actions = Vec::with_capacity(m.num_states());
    let mut samples = 0u64;
    for (v, a, s) in per_state {
        values.push(v);
        actions.push(a);
        samples += s;
    }
    Ok(ApxValResult {
        values: Values::from_vec(values),
        policy: Policy::from_vec(actions),
        samples,
    })
}

/// Monotone variant of [`apx_val`].
///
/// Requires `T_π(u) >= u` entry-wise from the caller (checked in debug
/// builds). Runs `apx_val`, shifts its values down by `2γ·eps` to obtain
/// underestimates, and keeps a state's previous value and action whenever
/// the shifted value does not improve on it. The output always satisfies
/// `ṽ >= u` entry-wise; with probability `1 − delta` it also satisfies
/// `u <= ṽ <= T_π̃(u) <= T_π̃(ṽ)` and `‖ṽ − T(u)‖∞ <= 4γ·eps`.
#[allow(clippy::too_many_arguments)]
pub fn apx_mon_val(
    m: &impl MdpModel,
    sampler: &TransitionSampler,
    u: &Values,
    pi: &Policy,
    v0: &Values,
    offsets: &OffsetTable,
    eps: f64,
    delta: f64,
    seeds: &SeedSource,
    round: u64,
    opts: &KernelOptions,
) -> Result<ApxValResult> {
    #[cfg(debug_assertions)]
    {
        let tpu = policy_operator(m, pi, u)?;
        debug_assert!(
            tpu.min_gap(u) >= -1e-10,
            "apx_mon_val precondition T_π(u) >= u violated by {}",
            -tpu.min_gap(u)
        );
    }
    if pi.len() != m.num_states() {
        return Err(Error::DimensionMismatch {
            expected: m.num_states(),
            actual: pi.len(),
        });
    }

    let base = apx_val(m, sampler, u, v0, offsets, eps, delta, seeds, round, opts)?;
    let margin = 2.0 * m.discount() * eps;
    let mut values = Vec::with_capacity(m.num_states());
    let mut actions = Vec::with_capacity(m.num_states());
    for i in 0..m.num_states() {
        let shifted = base.values[i] - margin;
        if shifted > u[i] {
            values.push(shifted);
            actions.push(base.policy[i]);
        } else {
            values.push(u[i]);
            actions.push(pi[i]);
        }
    }
    Ok(ApxValResult {
        values: Values::from_vec(values),
        policy: Policy::from_vec(actions),
        samples: base.samples,
    })
}

fn fan_out<T: Send>(
    num_states: usize,
    parallel: bool,
    f: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    if parallel {
        (0..num_states).into_par_iter().map(f).collect()
    } else {
        (0..num_states).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::tests::{random_dmdp, random_values};
    use crate::mdp::{row_dot, value_operator, Dmdp, Transition};

    fn seeds(master: u64) -> SeedSource {
        SeedSource::new(master)
    }

    #[test]
    fn sample_count_matches_formula() {
        // ⌈200 · ln 200⌉ = ⌈1059.66…⌉
        assert_eq!(hoeffding_sample_count(1.0, 0.1, 0.01), 1060);
        assert_eq!(hoeffding_sample_count(0.0, 0.1, 0.01), 0);
    }

    #[test]
    fn apx_trans_zero_bound_is_free_and_exact() {
        let d = random_dmdp(6, 2, 0.9, 1);
        let s = TransitionSampler::build(&d).unwrap();
        let diff = vec![0.0; 6];
        let mut rng = seeds(9).stream(StreamKey::backup(0, 0, 0));
        let est = apx_trans(
            &diff,
            0.0,
            0,
            0,
            0.1,
            0.1,
            &s,
            &mut rng,
            SamplingStrategy::Auto,
        )
        .unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.samples, 0);
    }

    #[test]
    fn apx_trans_constant_vector_is_exact() {
        let d = random_dmdp(6, 2, 0.9, 2);
        let s = TransitionSampler::build(&d).unwrap();
        let diff = vec![0.3; 6];
        for strategy in [
            SamplingStrategy::Auto,
            SamplingStrategy::PerDraw,
            SamplingStrategy::Binned,
        ] {
            let mut rng = seeds(10).stream(StreamKey::backup(0, 1, 0));
            let est =
                apx_trans(&diff, 0.3, 1, 0, 0.05, 0.05, &s, &mut rng, strategy).unwrap();
            assert_eq!(est.value, 0.3);
            assert!(est.samples > 0);
        }
    }

    #[test]
    fn apx_trans_rejects_bad_parameters() {
        let d = random_dmdp(3, 1, 0.9, 3);
        let s = TransitionSampler::build(&d).unwrap();
        let diff = vec![0.1, 0.2, 0.0];
        let mut rng = seeds(1).stream(StreamKey::backup(0, 0, 0));
        for (eps, delta) in [(0.0, 0.5), (0.1, 0.0), (0.1, 1.0), (-1.0, 0.5)] {
            let r = apx_trans(
                &diff,
                0.2,
                0,
                0,
                eps,
                delta,
                &s,
                &mut rng,
                SamplingStrategy::Auto,
            );
            assert!(r.is_err());
        }
    }

    #[test]
    fn apx_trans_coverage_against_exact_dot() {
        let d = random_dmdp(10, 2, 0.9, 4);
        let s = TransitionSampler::build(&d).unwrap();
        let u = random_values(10, 1.0, 5);
        let exact = row_dot(&d, 3, 1, u.as_slice());
        let bound = u.inf_norm();
        let (eps, delta) = (0.1, 0.01);
        let sources = seeds(77);
        let mut hits = 0usize;
        let trials = 1000u64;
        for t in 0..trials {
            let mut rng = sources.stream(StreamKey::backup(t, 3, 1));
            let est = apx_trans(
                u.as_slice(),
                bound,
                3,
                1,
                eps,
                delta,
                &s,
                &mut rng,
                SamplingStrategy::Auto,
            )
            .unwrap();
            if (est.value - exact).abs() <= eps {
                hits += 1;
            }
        }
        assert!(hits as f64 >= (1.0 - delta) * trials as f64, "hits {hits}");
    }

    #[test]
    fn per_draw_and_binned_paths_both_concentrate() {
        let d = random_dmdp(8, 1, 0.9, 6);
        let s = TransitionSampler::build(&d).unwrap();
        let u = random_values(8, 1.0, 7);
        let exact = row_dot(&d, 2, 0, u.as_slice());
        for strategy in [SamplingStrategy::PerDraw, SamplingStrategy::Binned] {
            let mut misses = 0;
            for t in 0..200u64 {
                let mut rng = seeds(42).stream(StreamKey::backup(t, 2, 0));
                let est = apx_trans(
                    u.as_slice(),
                    u.inf_norm(),
                    2,
                    0,
                    0.08,
                    0.05,
                    &s,
                    &mut rng,
                    strategy,
                )
                .unwrap();
                if (est.value - exact).abs() > 0.08 {
                    misses += 1;
                }
            }
            assert!(misses <= 20, "{strategy:?} missed {misses}/200");
        }
    }

    #[test]
    fn exact_offsets_zero_and_ones() {
        let d = random_dmdp(7, 3, 0.9, 8);
        let x = exact_offsets(&d, &Values::zeros(7)).unwrap();
        assert!(x.values.iter().all(|&v| v == 0.0));
        let x = exact_offsets(&d, &Values::constant(7, 1.0)).unwrap();
        for i in 0..7 {
            for a in 0..3 {
                assert!((x.value(i, a) - 1.0).abs() <= 1e-12);
            }
        }
        assert_eq!(x.accuracy(), 0.0);
    }

    #[test]
    fn exact_offsets_match_brute_dot_products() {
        let d = random_dmdp(9, 2, 0.9, 9);
        let v0 = random_values(9, 2.0, 10);
        let x = exact_offsets(&d, &v0).unwrap();
        for i in 0..9 {
            for a in 0..2 {
                let mut dot = 0.0;
                for t in d.row(i, a) {
                    dot += t.prob * v0[t.next];
                }
                assert!((x.value(i, a) - dot).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sampled_offsets_zero_anchor_is_free() {
        let d = random_dmdp(6, 2, 0.9, 11);
        let s = TransitionSampler::build(&d).unwrap();
        let (x, samples) = sampled_offsets(
            &d,
            &s,
            &Values::zeros(6),
            0.1,
            0.1,
            &seeds(1),
            0,
            &KernelOptions::default(),
        )
        .unwrap();
        assert_eq!(samples, 0);
        assert!(x.values.iter().all(|&v| v == 0.0));
        assert_eq!(x.accuracy(), 0.1);
    }

    #[test]
    fn sampled_offsets_constant_anchor_is_exact() {
        let d = random_dmdp(6, 2, 0.9, 12);
        let s = TransitionSampler::build(&d).unwrap();
        let (x, _) = sampled_offsets(
            &d,
            &s,
            &Values::constant(6, 0.7),
            0.05,
            0.1,
            &seeds(2),
            0,
            &KernelOptions::default(),
        )
        .unwrap();
        assert!(x.values.iter().all(|&v| v == 0.7));
    }

    #[test]
    fn sampled_offsets_coverage_against_exact() {
        let d = random_dmdp(8, 2, 0.9, 13);
        let s = TransitionSampler::build(&d).unwrap();
        let v0 = random_values(8, 1.0, 14);
        let exact = exact_offsets(&d, &v0).unwrap();
        let mut good_reps = 0;
        for rep in 0..100u64 {
            let (x, _) = sampled_offsets(
                &d,
                &s,
                &v0,
                0.1,
                0.1,
                &seeds(500 + rep),
                0,
                &KernelOptions::default(),
            )
            .unwrap();
            let worst = (0..16)
                .map(|k| (x.values[k] - exact.values[k]).abs())
                .fold(0.0f64, f64::max);
            if worst <= 0.1 {
                good_reps += 1;
            }
        }
        assert!(good_reps >= 90, "good {good_reps}/100");
    }

    #[test]
    fn apx_val_zero_range_reproduces_exact_backup() {
        let d = random_dmdp(10, 3, 0.9, 15);
        let s = TransitionSampler::build(&d).unwrap();
        let u = random_values(10, 2.0, 16);
        let x = exact_offsets(&d, &u).unwrap();
        let r = apx_val(
            &d,
            &s,
            &u,
            &u,
            &x,
            0.1,
            0.1,
            &seeds(3),
            1,
            &KernelOptions::default(),
        )
        .unwrap();
        assert_eq!(r.samples, 0);
        let tv = value_operator(&d, &u).unwrap();
        assert_eq!(r.values, tv);
        assert_eq!(r.policy, crate::mdp::greedy_policy(&d, &u).unwrap());
    }

    #[test]
    fn apx_val_single_state_formula() {
        let d = Dmdp::new(
            1,
            1,
            vec![vec![Transition::new(0, 1.0)]],
            vec![0.5],
            0.5,
            1.0,
        )
        .unwrap();
        let s = TransitionSampler::build(&d).unwrap();
        let v0 = Values::zeros(1);
        let u = Values::from_vec(vec![2.0]);
        let x = exact_offsets(&d, &v0).unwrap();
        let r = apx_val(
            &d,
            &s,
            &u,
            &v0,
            &x,
            0.1,
            0.1,
            &seeds(4),
            1,
            &KernelOptions::default(),
        )
        .unwrap();
        // Single state: the sampled difference is constant, so the result
        // equals r + γ·(x + (u − v0)) exactly.
        assert_eq!(r.values[0], 0.5 + 0.5 * 2.0);
        assert_eq!(r.policy.as_slice(), &[0]);
    }

    #[test]
    fn apx_val_tracks_exact_operator() {
        let d = random_dmdp(10, 3, 0.9, 17);
        let s = TransitionSampler::build(&d).unwrap();
        let v0 = random_values(10, 1.0, 18);
        let u = random_values(10, 1.0, 19);
        let x = exact_offsets(&d, &v0).unwrap();
        let tv = value_operator(&d, &u).unwrap();
        let eps = 0.05;
        let mut good = 0;
        for rep in 0..100u64 {
            let r = apx_val(
                &d,
                &s,
                &u,
                &v0,
                &x,
                eps,
                0.1,
                &seeds(900 + rep),
                1,
                &KernelOptions::default(),
            )
            .unwrap();
            if r.values.inf_dist(&tv) <= 2.0 * 0.9 * eps {
                good += 1;
            }
        }
        assert!(good >= 90, "good {good}/100");
    }

    #[test]
    fn apx_val_parallel_equals_sequential() {
        let d = random_dmdp(12, 3, 0.9, 20);
        let s = TransitionSampler::build(&d).unwrap();
        let v0 = random_values(12, 1.0, 21);
        let u = random_values(12, 1.5, 22);
        let x = exact_offsets(&d, &v0).unwrap();
        let run = |parallel: bool| {
            apx_val(
                &d,
                &s,
                &u,
                &v0,
                &x,
                0.05,
                0.1,
                &seeds(5),
                2,
                &KernelOptions {
                    parallel,
                    strategy: SamplingStrategy::Auto,
                },
            )
            .unwrap()
        };
        let a = run(false);
        let b = run(true);
        assert_eq!(a.values, b.values);
        assert_eq!(a.policy, b.policy);
        assert_eq!(a.samples, b.samples);
    }

    /// Two-action single-state instance where the sampled backup is exact,
    /// pinning down both branches of the monotone update rule.
    fn mon_fixture(r0: f64, r1: f64) -> (Dmdp, TransitionSampler) {
        let d = Dmdp::new(
            1,
            2,
            vec![
                vec![Transition::new(0, 1.0)],
                vec![Transition::new(0, 1.0)],
            ],
            vec![r0, r1],
            0.5,
            4.0,
        )
        .unwrap();
        let s = TransitionSampler::build(&d).unwrap();
        (d, s)
    }

    #[test]
    fn apx_mon_val_keeps_old_entry_when_gain_is_small() {
        // q = 5.1, 2γε = 0.2, threshold 4.9 <= u = 5.0 → keep (5.0, action 0).
        let (d, s) = mon_fixture(2.6, 0.0);
        let u = Values::from_vec(vec![5.0]);
        let x = exact_offsets(&d, &u).unwrap();
        let r = apx_mon_val(
            &d,
            &s,
            &u,
            &Policy::zeros(1),
            &u,
            &x,
            0.2,
            0.1,
            &seeds(6),
            1,
            &KernelOptions::default(),
        )
        .unwrap();
        assert_eq!(r.values.as_slice(), &[5.0]);
        assert_eq!(r.policy.as_slice(), &[0]);
    }

    #[test]
    fn apx_mon_val_takes_new_entry_when_gain_is_large() {
        // q = 6.0 via action 1, 2γε = 0.2 → (5.8, action 1).
        let (d, s) = mon_fixture(2.6, 3.5);
        let u = Values::from_vec(vec![5.0]);
        let x = exact_offsets(&d, &u).unwrap();
        let r = apx_mon_val(
            &d,
            &s,
            &u,
            &Policy::zeros(1),
            &u,
            &x,
            0.2,
            0.1,
            &seeds(7),
            1,
            &KernelOptions::default(),
        )
        .unwrap();
        assert!((r.values[0] - 5.8).abs() <= 1e-12);
        assert_eq!(r.policy.as_slice(), &[1]);
    }

    #[test]
    fn apx_mon_val_never_decreases_values() {
        let d = random_dmdp(8, 3, 0.9, 23);
        let s = TransitionSampler::build(&d).unwrap();
        // Underestimate start: all states at -M/(1-γ); any policy works.
        let u = Values::constant(8, -10.0);
        let pi = Policy::zeros(8);
        let x = exact_offsets(&d, &u).unwrap();
        let mut current = u.clone();
        let mut policy = pi;
        for round in 1..=10u64 {
            let r = apx_mon_val(
                &d,
                &s,
                &current,
                &policy,
                &u,
                &x,
                0.05,
                0.1,
                &seeds(8),
                round,
                &KernelOptions::default(),
            )
            .unwrap();
            assert!(r.values.min_gap(&current) >= 0.0);
            current = r.values;
            policy = r.policy;
        }
    }
}
