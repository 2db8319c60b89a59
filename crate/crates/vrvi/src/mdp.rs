//! Data model for discounted MDPs and the exact Bellman operators.
//!
//! A [`Dmdp`] stores a sparse row-stochastic transition table, a dense reward
//! table, a discount factor strictly inside (0, 1) and a bound `M` with
//! `|r_a(i)| <= M`. All operators work through the [`MdpModel`] trait so the
//! finite-horizon model can reuse them with an effective discount of 1.

use crate::error::{Error, Result};

/// Absolute tolerance on transition-row sums at validation time.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// One sparse transition: probability of moving to `next`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub next: usize,
    pub prob: f64,
}

impl Transition {
    pub fn new(next: usize, prob: f64) -> Self {
        Transition { next, prob }
    }
}

/// Shared view of a tabular MDP used by operators, samplers and solvers.
pub trait MdpModel: Sync {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    /// Effective discount applied to the expected next-state value.
    fn discount(&self) -> f64;
    fn reward_bound(&self) -> f64;
    fn reward(&self, state: usize, action: usize) -> f64;
    fn row(&self, state: usize, action: usize) -> &[Transition];

    fn num_pairs(&self) -> usize {
        self.num_states() * self.num_actions()
    }
}

/// Discounted infinite-horizon MDP instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmdp {
    num_states: usize,
    num_actions: usize,
    /// Row for (state `i`, action `a`) lives at index `i * num_actions + a`.
    rows: Vec<Vec<Transition>>,
    /// Same indexing as `rows`.
    rewards: Vec<f64>,
    discount: f64,
    reward_bound: f64,
}

impl Dmdp {
    /// Builds and validates an instance. `rows` and `rewards` are indexed by
    /// `state * num_actions + action`.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        rows: Vec<Vec<Transition>>,
        rewards: Vec<f64>,
        discount: f64,
        reward_bound: f64,
    ) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::InvalidParameter {
                name: "num_states",
                value: 0.0,
                requirement: "at least one state",
            });
        }
        if num_actions == 0 {
            return Err(Error::InvalidParameter {
                name: "num_actions",
                value: 0.0,
                requirement: "at least one action",
            });
        }
        let pairs = num_states * num_actions;
        if rows.len() != pairs {
            return Err(Error::DimensionMismatch {
                expected: pairs,
                actual: rows.len(),
            });
        }
        if rewards.len() != pairs {
            return Err(Error::DimensionMismatch {
                expected: pairs,
                actual: rewards.len(),
            });
        }
        let d = Dmdp {
            num_states,
            num_actions,
            rows,
            rewards,
            discount,
            reward_bound,
        };
        d.validate()?;
        Ok(d)
    }

    /// Checks every model invariant: probabilities are non-negative, each
    /// row sums to 1 within [`ROW_SUM_TOLERANCE`], rewards lie in
    /// `[-M, M]`, and the discount is strictly inside (0, 1).
    pub fn validate(&self) -> Result<()> {
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::DiscountOutOfRange {
                discount: self.discount,
            });
        }
        validate_table(
            self.num_states,
            self.num_actions,
            &self.rows,
            &self.rewards,
            self.reward_bound,
        )
    }
}

impl MdpModel for Dmdp {
    fn num_states(&self) -> usize {
        self.num_states
    }
    fn num_actions(&self) -> usize {
        self.num_actions
    }
    fn discount(&self) -> f64 {
        self.discount
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

/// Shared invariant checks for the discounted and finite-horizon tables.
pub(crate) fn validate_table(
    num_states: usize,
    num_actions: usize,
    rows: &[Vec<Transition>],
    rewards: &[f64],
    reward_bound: f64,
) -> Result<()> {
    if !(reward_bound > 0.0 && reward_bound.is_finite()) {
        return Err(Error::InvalidRewardBound {
            bound: reward_bound,
        });
    }
    for state in 0..num_states {
        for action in 0..num_actions {
            let idx = state * num_actions + action;
            let mut sum = 0.0;
            for t in &rows[idx] {
                if t.next >= num_states {
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
            let r = rewards[idx];
            if !(r.abs() <= reward_bound) {
                return Err(Error::RewardOutOfBound {
                    state,
                    action,
                    reward: r,
                    bound: reward_bound,
                });
            }
        }
    }
    Ok(())
}

/// Dense real vector indexed by state.
#[derive(Debug, Clone, PartialEq)]
pub struct Values(Vec<f64>);

impl Values {
    pub fn zeros(n: usize) -> Self {
        Values(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Values(vec![c; n])
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        Values(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Errors on the first NaN or infinite entry.
    pub fn assert_finite(&self) -> Result<()> {
        for (index, x) in self.0.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteValue { index });
            }
        }
        Ok(())
    }

    pub fn inf_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `‖self − other‖∞`.
    pub fn inf_dist(&self, other: &Values) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Entry-wise `self − other`.
    pub fn sub(&self, other: &Values) -> Values {
        debug_assert_eq!(self.len(), other.len());
        Values(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self + c·1`.
    pub fn shifted(&self, c: f64) -> Values {
        Values(self.0.iter().map(|x| x + c).collect())
    }

    /// Smallest entry of `self − other`; non-negative iff `self >= other`
    /// entry-wise.
    pub fn min_gap(&self, other: &Values) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .fold(f64::INFINITY, |m, (a, b)| m.min(a - b))
    }
}

impl std::ops::Index<usize> for Values {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for Values {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for Values {
    fn from(v: Vec<f64>) -> Self {
        Values(v)
    }
}

/// Stationary deterministic policy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy(Vec<usize>);

impl Policy {
    pub fn zeros(n: usize) -> Self {
        Policy(vec![0; n])
    }

    pub fn from_vec(v: Vec<usize>) -> Self {
        Policy(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }
}

impl std::ops::Index<usize> for Policy {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

fn check_len(m: &impl MdpModel, u: &Values) -> Result<()> {
    if u.len() != m.num_states() {
        return Err(Error::DimensionMismatch {
            expected: m.num_states(),
            actual: u.len(),
        });
    }
    Ok(())
}

fn check_policy(m: &impl MdpModel, policy: &Policy) -> Result<()> {
    if policy.len() != m.num_states() {
        return Err(Error::DimensionMismatch {
            expected: m.num_states(),
            actual: policy.len(),
        });
    }
    for (state, &action) in policy.iter().enumerate() {
        if action >= m.num_actions() {
            return Err(Error::ActionOutOfRange {
                state,
                action,
                num_actions: m.num_actions(),
            });
        }
    }
    Ok(())
}

/// Sparse dot product `p_a(i)ᵀ u` over the row's support.
pub fn row_dot(m: &impl MdpModel, state: usize, action: usize, u: &[f64]) -> f64 {
    let mut dot = 0.0;
    for t in m.row(state, action) {
        dot += t.prob * u[t.next];
    }
    dot
}

/// `Q_a(i) = r_a(i) + γ · p_a(i)ᵀ u`, the one-step backup for one action.
///
/// Every exact code path evaluates Q through this function so that the
/// value operator, the greedy policy and the policy operator agree
/// bit-for-bit.
pub fn q_value(m: &impl MdpModel, state: usize, action: usize, u: &[f64]) -> f64 {
    m.reward(state, action) + m.discount() * row_dot(m, state, action, u)
}

/// One exact Bellman backup: per state the maximal Q value and the first
/// action attaining it (ties broken by lowest action index).
pub fn bellman_backup(m: &impl MdpModel, u: &Values) -> Result<(Values, Policy)> {
    check_len(m, u)?;
    let s = u.as_slice();
    let mut values = Vec::with_capacity(m.num_states());
    let mut actions = Vec::with_capacity(m.num_states());
    for i in 0..m.num_states() {
        let mut best = q_value(m, i, 0, s);
        let mut best_a = 0;
        for a in 1..m.num_actions() {
            let q = q_value(m, i, a, s);
            if q > best {
                best = q;
                best_a = a;
            }
        }
        values.push(best);
        actions.push(best_a);
    }
    Ok((Values(values), Policy(actions)))
}

/// The value operator `T(u)_i = max_a [ r_a(i) + γ · p_a(i)ᵀ u ]`.
pub fn value_operator(m: &impl MdpModel, u: &Values) -> Result<Values> {
    Ok(bellman_backup(m, u)?.0)
}

/// Greedy policy of `u`: per state an action attaining the max in `T(u)_i`,
/// lowest index on ties.
pub fn greedy_policy(m: &impl MdpModel, u: &Values) -> Result<Policy> {
    Ok(bellman_backup(m, u)?.1)
}

/// The policy operator `[T_π(u)]_i = r_{π_i}(i) + γ · p_{π_i}(i)ᵀ u`.
pub fn policy_operator(m: &impl MdpModel, policy: &Policy, u: &Values) -> Result<Values> {
    check_len(m, u)?;
    check_policy(m, policy)?;
    let s = u.as_slice();
    Ok(Values(
        (0..m.num_states())
            .map(|i| q_value(m, i, policy[i], s))
            .collect(),
    ))
}
