//! Seeded instance generators for benchmarks and tests.

use rand::seq::index::sample as index_sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::finite_horizon::FiniteHorizonMdp;
use crate::mdp::{Dmdp, Transition};

/// Transition-structure families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Full support on every row, positive normalized weights.
    DenseRandom,
    /// Fixed-size random support per row.
    SparseRandom,
    /// State `i` moves only to `i` and `i+1`; the last state absorbs.
    Chain,
    /// Complete binary tree; leaves absorb; actions tilt the child split.
    Tree,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::DenseRandom => "dense-random",
            Family::SparseRandom => "sparse-random",
            Family::Chain => "chain",
            Family::Tree => "tree",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dense-random" => Ok(Family::DenseRandom),
            "sparse-random" => Ok(Family::SparseRandom),
            "chain" => Ok(Family::Chain),
            "tree" => Ok(Family::Tree),
            other => Err(format!("unknown instance family `{other}`")),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything that determines a generated transition and reward table.
/// Rewards are uniform in `[-reward_bound, reward_bound]` for all families.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub family: Family,
    pub num_states: usize,
    pub num_actions: usize,
    /// Row support size; only the sparse-random family reads it.
    pub support: Option<usize>,
    pub reward_bound: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family, num_states: usize, num_actions: usize, seed: u64) -> Self {
        GeneratorSpec {
            family,
            num_states,
            num_actions,
            support: None,
            reward_bound: 1.0,
            seed,
        }
    }
}

/// Generates a discounted instance; deterministic per spec and seed.
pub fn generate_dmdp(spec: &GeneratorSpec, discount: f64) -> Result<Dmdp> {
    let (rows, rewards) = generate_parts(spec)?;
    Dmdp::new(
        spec.num_states,
        spec.num_actions,
        rows,
        rewards,
        discount,
        spec.reward_bound,
    )
}

/// Generates a finite-horizon instance sharing the transition families.
pub fn generate_finite_horizon(spec: &GeneratorSpec, horizon: usize) -> Result<FiniteHorizonMdp> {
    let (rows, rewards) = generate_parts(spec)?;
    FiniteHorizonMdp::new(
        spec.num_states,
        spec.num_actions,
        rows,
        rewards,
        horizon,
        spec.reward_bound,
    )
}

fn generate_parts(spec: &GeneratorSpec) -> Result<(Vec<Vec<Transition>>, Vec<f64>)> {
    if spec.num_states == 0 || spec.num_actions == 0 {
        return Err(Error::InfeasibleGenerator {
            reason: "num_states and num_actions must be positive".to_string(),
        });
    }
    if !(spec.reward_bound > 0.0 && spec.reward_bound.is_finite()) {
        return Err(Error::InvalidRewardBound {
            bound: spec.reward_bound,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.num_states;
    let mut rows = Vec::with_capacity(n * spec.num_actions);
    for state in 0..n {
        for action in 0..spec.num_actions {
            rows.push(generate_row(spec, state, action, &mut rng)?);
        }
    }
    let m = spec.reward_bound;
    let rewards = (0..n * spec.num_actions)
        .map(|_| rng.random_range(-m..=m))
        .collect();
    Ok((rows, rewards))
}

fn generate_row(
    spec: &GeneratorSpec,
    state: usize,
    action: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Transition>> {
    let n = spec.num_states;
    match spec.family {
        Family::DenseRandom => Ok(normalized_row((0..n).collect(), rng)),
        Family::SparseRandom => {
            let k = spec.support.unwrap_or_else(|| n.div_ceil(4).max(2).min(n));
            if k == 0 || k > n {
                return Err(Error::InfeasibleGenerator {
                    reason: format!("support {k} outside 1..={n}"),
                });
            }
            let mut picked: Vec<usize> = index_sample(rng, n, k).into_iter().collect();
            picked.sort_unstable();
            Ok(normalized_row(picked, rng))
        }
        Family::Chain => {
            if state + 1 == n {
                return Ok(vec![Transition::new(state, 1.0)]);
            }
            let forward = (action + 1) as f64 / (spec.num_actions + 1) as f64;
            Ok(vec![
                Transition::new(state, 1.0 - forward),
                Transition::new(state + 1, forward),
            ])
        }
        Family::Tree => {
            let left = 2 * state + 1;
            let right = 2 * state + 2;
            match (left < n, right < n) {
                (false, _) => Ok(vec![Transition::new(state, 1.0)]),
                (true, false) => Ok(vec![Transition::new(left, 1.0)]),
                (true, true) => {
                    let p_left = (action + 1) as f64 / (spec.num_actions + 1) as f64;
                    Ok(vec![
                        Transition::new(left, p_left),
                        Transition::new(right, 1.0 - p_left),
                    ])
                }
            }
        }
    }
}

fn normalized_row(support: Vec<usize>, rng: &mut ChaCha8Rng) -> Vec<Transition> {
    // 1 − U keeps every weight strictly positive.
    let weights: Vec<f64> = support.iter().map(|_| 1.0 - rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    support
        .into_iter()
        .zip(weights)
        .map(|(j, w)| Transition::new(j, w / total))
        .collect()
}
