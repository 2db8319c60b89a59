//! Alias tables for expected-constant-time categorical sampling.
//!
//! Each (state, action) row gets a Vose alias table over its sparse support,
//! built in O(support) time. One draw costs one uniform, one comparison and
//! one lookup.

use crate::error::{Error, Result};
use crate::mdp::{MdpModel, ROW_SUM_TOLERANCE};
use crate::sampling::stream::RngStream;

#[derive(Debug, Clone)]
struct AliasRow {
    /// Next-state indices of the row's support.
    support: Vec<usize>,
    /// Normalized source probabilities, aligned with `support`.
    probs: Vec<f64>,
    /// Acceptance threshold per slot.
    accept: Vec<f64>,
    /// Alias slot to fall through to.
    alias: Vec<usize>,
}

/// Per-(state, action) alias tables for one MDP instance.
#[derive(Debug, Clone)]
pub struct TransitionSampler {
    rows: Vec<AliasRow>,
    num_states: usize,
    num_actions: usize,
}

impl TransitionSampler {
    /// Preprocesses every transition row. Rows are re-checked for
    /// stochasticity so a malformed table cannot produce a biased sampler.
    pub fn build(m: &impl MdpModel) -> Result<Self> {
        let mut rows = Vec::with_capacity(m.num_pairs());
        for state in 0..m.num_states() {
            for action in 0..m.num_actions() {
                rows.push(build_row(m, state, action)?);
            }
        }
        Ok(TransitionSampler {
            rows,
            num_states: m.num_states(),
            num_actions: m.num_actions(),
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    fn row(&self, state: usize, action: usize) -> &AliasRow {
        &self.rows[state * self.num_actions + action]
    }

    /// Next-state indices in the row's support.
    pub fn support(&self, state: usize, action: usize) -> &[usize] {
        &self.row(state, action).support
    }

    /// Normalized source probabilities aligned with [`support`](Self::support).
    pub fn row_probs(&self, state: usize, action: usize) -> &[f64] {
        &self.row(state, action).probs
    }

    /// Draws a support position: one uniform, one comparison, one lookup.
    #[inline]
    pub(crate) fn sample_slot(&self, state: usize, action: usize, rng: &mut RngStream) -> usize {
        let row = self.row(state, action);
        let n = row.support.len();
        let t = rng.uniform() * n as f64;
        let mut k = t as usize;
        if k >= n {
            k = n - 1; // guards the u -> 1 rounding edge
        }
        if (t - k as f64) < row.accept[k] {
            k
        } else {
            row.alias[k]
        }
    }

    /// Draws a next state `j` with `Pr[j = k] = p_a(i, k)`.
    #[inline]
    pub fn sample_next_state(&self, state: usize, action: usize, rng: &mut RngStream) -> usize {
        let row = self.row(state, action);
        row.support[self.sample_slot(state, action, rng)]
    }

    /// Decodes the alias table back into the categorical distribution it
    /// implements, as (next_state, probability) pairs aligned with the
    /// support.
    pub fn implied_row(&self, state: usize, action: usize) -> Vec<(usize, f64)> {
        let row = self.row(state, action);
        let n = row.support.len();
        let mut mass = vec![0.0f64; n];
        for k in 0..n {
            mass[k] += row.accept[k] / n as f64;
            mass[row.alias[k]] += (1.0 - row.accept[k]) / n as f64;
        }
        row.support.iter().copied().zip(mass).collect()
    }
}

fn build_row(m: &impl MdpModel, state: usize, action: usize) -> Result<AliasRow> {
    let src = m.row(state, action);
    let mut support = Vec::with_capacity(src.len());
    let mut weights = Vec::with_capacity(src.len());
    let mut sum = 0.0;
    for t in src {
        if t.next >= m.num_states() {
            return Err(Error::NextStateOutOfRange {
                state,
                action,
                next: t.next,
            });
        }
        if !(t.prob >= 0.0) {
            return Err(Error::NegativeProbability {
                state,
                action,
                prob: t.prob,
            });
        }
        support.push(t.next);
        weights.push(t.prob);
        sum += t.prob;
    }
    if !((sum - 1.0).abs() <= ROW_SUM_TOLERANCE) {
        return Err(Error::RowSumMismatch {
            state,
            action,
            sum,
            tolerance: ROW_SUM_TOLERANCE,
        });
    }
    let n = weights.len();
    let probs: Vec<f64> = weights.iter().map(|w| w / sum).collect();

    // Vose construction over the scaled weights.
    let mut scaled: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
    let mut accept = vec![1.0f64; n];
    let mut alias: Vec<usize> = (0..n).collect();
    let mut small: Vec<usize> = Vec::new();
    let mut large: Vec<usize> = Vec::new();
    for (k, &s) in scaled.iter().enumerate() {
        if s < 1.0 {
            small.push(k);
        } else {
            large.push(k);
        }
    }
    while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
        small.pop();
        accept[s] = scaled[s];
        alias[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if scaled[l] < 1.0 {
            large.pop();
            small.push(l);
        }
    }
    // Leftovers on either stack carry full slots up to rounding.
    for k in small.into_iter().chain(large) {
        accept[k] = 1.0;
        alias[k] = k;
    }
    Ok(AliasRow {
        support,
        probs,
        accept,
        alias,
    })
}
