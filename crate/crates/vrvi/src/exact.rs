//! Exact solvers used as ground truth: value iteration with a residual
//! stopping rule, policy evaluation, and an optimal-value oracle with a
//! brute-force cross check for tiny instances.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mdp::{
    bellman_backup, greedy_policy, policy_operator, Dmdp, MdpModel, Policy, Values,
};

/// Default bound on exact fixed-point iterations.
pub const DEFAULT_ITERATION_CAP: usize = 10_000_000;

/// Policy evaluation switches from a direct linear solve to fixed-point
/// iteration above this state count.
pub const DIRECT_SOLVE_MAX_STATES: usize = 2000;

/// Size limits for the brute-force policy-enumeration oracle.
pub const BRUTE_FORCE_MAX_STATES: usize = 6;
pub const BRUTE_FORCE_MAX_ACTIONS: usize = 3;

fn check_target(target: f64) -> Result<()> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "target",
            value: target,
            requirement: "positive and finite",
        });
    }
    Ok(())
}

/// Classic value iteration, stopped once the Bellman residual satisfies
/// `‖T(v) − v‖∞ <= target·(1−γ)/γ`, which guarantees the returned `T(v)` is
/// within `target` of the fixed point in ℓ∞. Returns the value vector and
/// the number of operator applications.
pub fn exact_value_iteration(d: &Dmdp, v0: &Values, target: f64) -> Result<(Values, usize)> {
    exact_value_iteration_capped(d, v0, target, DEFAULT_ITERATION_CAP)
}

pub fn exact_value_iteration_capped(
    d: &Dmdp,
    v0: &Values,
    target: f64,
    cap: usize,
) -> Result<(Values, usize)> {
    check_target(target)?;
    v0.assert_finite()?;
    let gamma = d.discount();
    let threshold = target * (1.0 - gamma) / gamma;
    let mut v = v0.clone();
    let mut iterations = 0usize;
    loop {
        let (next, _) = bellman_backup(d, &v)?;
        iterations += 1;
        if next.inf_dist(&v) <= threshold {
            return Ok((next, iterations));
        }
        if iterations >= cap {
            return Err(Error::IterationCapExceeded { cap });
        }
        v = next;
    }
}

/// Values of a fixed policy: `v_π` with `‖v − v_π‖∞ <= target`.
///
/// Solves `(I − γ P_π) v = r_π` directly up to
/// [`DIRECT_SOLVE_MAX_STATES`] states, and falls back to fixed-point
/// iteration with the contraction stopping rule above that.
pub fn policy_values(d: &Dmdp, policy: &Policy, target: f64) -> Result<Values> {
    check_target(target)?;
    // Dimension and action-range checks happen in policy_operator either way.
    if d.num_states() <= DIRECT_SOLVE_MAX_STATES {
        policy_values_direct(d, policy)
    } else {
        policy_values_iterative(d, policy, target, DEFAULT_ITERATION_CAP)
    }
}

fn policy_values_direct(d: &Dmdp, policy: &Policy) -> Result<Values> {
    // Probe the policy for range errors before assembling the system.
    policy_operator(d, policy, &Values::zeros(d.num_states()))?;
    let n = d.num_states();
    let gamma = d.discount();
    let mut a = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for t in d.row(i, policy[i]) {
            a[(i, t.next)] -= gamma * t.prob;
        }
    }
    let b = DVector::from_fn(n, |i, _| d.reward(i, policy[i]));
    let x = a.lu().solve(&b).ok_or(Error::SingularPolicySystem)?;
    Ok(Values::from_vec(x.iter().copied().collect()))
}

fn policy_values_iterative(
    d: &Dmdp,
    policy: &Policy,
    target: f64,
    cap: usize,
) -> Result<Values> {
    let gamma = d.discount();
    let threshold = target * (1.0 - gamma) / gamma;
    let mut v = Values::zeros(d.num_states());
    let mut iterations = 0usize;
    loop {
        let next = policy_operator(d, policy, &v)?;
        iterations += 1;
        if next.inf_dist(&v) <= threshold {
            return Ok(next);
        }
        if iterations >= cap {
            return Err(Error::IterationCapExceeded { cap });
        }
        v = next;
    }
}

/// Ground-truth oracle: values within `target` of `v*` together with the
/// greedy policy at those values.
pub fn optimal_oracle(d: &Dmdp, target: f64) -> Result<(Values, Policy)> {
    let (v, _) = exact_value_iteration(d, &Values::zeros(d.num_states()), target)?;
    let pi = greedy_policy(d, &v)?;
    Ok((v, pi))
}

/// Enumerates all `|A|^|S|` deterministic policies, evaluates each exactly,
/// and returns the entry-wise maximum with its greedy policy. Only feasible
/// for tiny instances; cross-checks the value-iteration oracle.
pub fn brute_force_optimal(d: &Dmdp, target: f64) -> Result<(Values, Policy)> {
    let s = d.num_states();
    let a = d.num_actions();
    if s > BRUTE_FORCE_MAX_STATES || a > BRUTE_FORCE_MAX_ACTIONS {
        return Err(Error::BruteForceTooLarge {
            states: s,
            actions: a,
            max_states: BRUTE_FORCE_MAX_STATES,
            max_actions: BRUTE_FORCE_MAX_ACTIONS,
        });
    }
    check_target(target)?;
    let mut best = Values::constant(s, f64::NEG_INFINITY);
    let mut assignment = vec![0usize; s];
    loop {
        let pi = Policy::from_vec(assignment.clone());
        let v = policy_values(d, &pi, target)?;
        for i in 0..s {
            if v[i] > best[i] {
                best[i] = v[i];
            }
        }
        // Advance the mixed-radix counter over action assignments.
        let mut pos = 0;
        loop {
            if pos == s {
                let pi = greedy_policy(d, &best)?;
                return Ok((best, pi));
            }
            assignment[pos] += 1;
            if assignment[pos] < a {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}
