//! Linear-programming view of a discounted MDP.
//!
//! The LP minimizes `1ᵀv` subject to `Av >= r` with `A = E − γP`, one row
//! per (state, action). Its unique minimizer is the optimal value vector.
//! The module also builds the ℓ1-regression reformulation whose
//! near-minimizers are near-feasible LP solutions; both are constructed and
//! evaluated here, solving them is out of scope.

use crate::error::{Error, Result};
use crate::mdp::{greedy_policy, Dmdp, MdpModel, Policy, Values};

/// Sparse constraint system `Av >= r` of the DMDP LP.
#[derive(Debug, Clone)]
pub struct DmdpLp {
    num_states: usize,
    num_actions: usize,
    /// Row (i, a) at index `i·|A| + a`, entries as (column, coefficient);
    /// the diagonal contribution `1 − γ·p_a(i,i)` is merged into column i.
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    discount: f64,
    reward_bound: f64,
}

/// Builds the constraint matrix `A = E − γP` and right-hand side `r`.
pub fn build_lp(d: &Dmdp) -> DmdpLp {
    let gamma = d.discount();
    let mut rows = Vec::with_capacity(d.num_pairs());
    let mut rhs = Vec::with_capacity(d.num_pairs());
    for i in 0..d.num_states() {
        for a in 0..d.num_actions() {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(d.row(i, a).len() + 1);
            let mut diag = 1.0;
            for t in d.row(i, a) {
                if t.next == i {
                    diag -= gamma * t.prob;
                } else {
                    row.push((t.next, -gamma * t.prob));
                }
            }
            row.push((i, diag));
            row.sort_unstable_by_key(|e| e.0);
            rows.push(row);
            rhs.push(d.reward(i, a));
        }
    }
    DmdpLp {
        num_states: d.num_states(),
        num_actions: d.num_actions(),
        rows,
        rhs,
        discount: d.discount(),
        reward_bound: d.reward_bound(),
    }
}

impl DmdpLp {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.num_states
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// `A·v`, one entry per (state, action) row.
    pub fn multiply(&self, v: &Values) -> Result<Vec<f64>> {
        if v.len() != self.num_states {
            return Err(Error::DimensionMismatch {
                expected: self.num_states,
                actual: v.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(j, c)| c * v[j]).sum())
            .collect())
    }

    /// Plain-text sparse triplets: a `rows cols nnz` header, then one
    /// `row col value` line per stored coefficient.
    pub fn to_triplets_text(&self) -> String {
        let nnz: usize = self.rows.iter().map(Vec::len).sum();
        let mut out = String::new();
        out.push_str(&format!("{} {} {}\n", self.num_rows(), self.num_cols(), nnz));
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, val) in row {
                out.push_str(&format!("{} {} {}\n", r, c, fmt_f64(val)));
            }
        }
        out
    }
}

fn fmt_f64(x: f64) -> String {
    // Shortest representation that round-trips exactly.
    let mut s = format!("{x}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

/// Result of checking a candidate against the ε-approximate-solution
/// definition: `Av >= r − ε·1` and `1ᵀv <= OPT + ε`.
#[derive(Debug, Clone, Copy)]
pub struct LpCheckReport {
    /// `max_(i,a) (r − Av)`; non-positive means strictly feasible.
    pub max_violation: f64,
    /// `1ᵀv − OPT`.
    pub objective_gap: f64,
    pub epsilon: f64,
    pub feasible_within: bool,
    pub objective_within: bool,
}

impl LpCheckReport {
    pub fn approx_solution(&self) -> bool {
        self.feasible_within && self.objective_within
    }
}

/// Checks whether `v` is an ε-approximate LP solution, given an estimate
/// of the optimal objective `OPT = 1ᵀv*`.
pub fn check_lp_solution(lp: &DmdpLp, v: &Values, epsilon: f64, opt: f64) -> Result<LpCheckReport> {
    let av = lp.multiply(v)?;
    let max_violation = av
        .iter()
        .zip(&lp.rhs)
        .fold(f64::NEG_INFINITY, |m, (lhs, r)| m.max(r - lhs));
    let objective_gap = v.iter().sum::<f64>() - opt;
    Ok(LpCheckReport {
        max_violation,
        objective_gap,
        epsilon,
        feasible_within: max_violation <= epsilon,
        objective_within: objective_gap <= epsilon,
    })
}

/// Greedy policy extraction from (approximate) LP solutions. For an
/// ε-approximate solution the result is `8ε|S|/(1−γ)²`-optimal.
pub fn policy_from_lp(d: &Dmdp, v: &Values) -> Result<Policy> {
    greedy_policy(d, v)
}

/// The ℓ1-regression reformulation. Minimizing
/// `f(v) = |α(|S|M/(1−γ) + 1ᵀv)| + ‖S⁻¹Av − S⁻¹b − 1‖₁ + ‖S⁻¹Av − S⁻¹b + 1‖₁`
/// trades LP constraint violation against objective slack through the
/// penalty weight `α`.
#[derive(Debug, Clone)]
pub struct L1Problem {
    lp: DmdpLp,
    alpha: f64,
    /// `s = ½(2M/(1−γ)·1 − r)`, strictly positive.
    scaling: Vec<f64>,
    /// `b = ½(2M/(1−γ)·1 + r)`.
    center: Vec<f64>,
}

pub fn build_l1(d: &Dmdp, alpha: f64) -> Result<L1Problem> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            requirement: "positive and finite",
        });
    }
    let lp = build_lp(d);
    let wide = 2.0 * d.reward_bound() / (1.0 - d.discount());
    let scaling: Vec<f64> = lp.rhs.iter().map(|r| 0.5 * (wide - r)).collect();
    let center: Vec<f64> = lp.rhs.iter().map(|r| 0.5 * (wide + r)).collect();
    debug_assert!(scaling.iter().all(|&s| s > 0.0));
    Ok(L1Problem {
        lp,
        alpha,
        scaling,
        center,
    })
}

impl L1Problem {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    fn residual(&self, v: &Values) -> Result<Vec<f64>> {
        let av = self.lp.multiply(v)?;
        Ok(av
            .iter()
            .zip(&self.center)
            .zip(&self.scaling)
            .map(|((a, b), s)| (a - b) / s)
            .collect())
    }

    fn objective_prefix(&self, v: &Values) -> f64 {
        let lift = self.lp.num_states as f64 * self.lp.reward_bound / (1.0 - self.lp.discount);
        (self.alpha * (lift + v.iter().sum::<f64>())).abs()
    }

    /// `f(v)` as the sum of the two shifted ℓ1 norms.
    pub fn objective(&self, v: &Values) -> Result<f64> {
        let res = self.residual(v)?;
        let l1_minus: f64 = res.iter().map(|y| (y - 1.0).abs()).sum();
        let l1_plus: f64 = res.iter().map(|y| (y + 1.0).abs()).sum();
        Ok(self.objective_prefix(v) + l1_minus + l1_plus)
    }

    /// `f(v)` through the identity `|y−1| + |y+1| = 2·max(|y|, 1)`.
    pub fn objective_max_form(&self, v: &Values) -> Result<f64> {
        let res = self.residual(v)?;
        let penalty: f64 = res.iter().map(|y| 2.0 * y.abs().max(1.0)).sum();
        Ok(self.objective_prefix(v) + penalty)
    }
}

/// Converts a claimed ℓ1 near-optimality `f(v) <= f(v*_f) + eps_f` into the
/// LP accuracy `ε' = max(eps_f/α, 2α|S|M²/(1−γ)² + eps_f·M/(1−γ))` and
/// verifies that `v` indeed passes [`check_lp_solution`] at `ε'`.
pub fn certify_l1_to_lp(
    l1: &L1Problem,
    lp: &DmdpLp,
    v: &Values,
    eps_f: f64,
    opt: f64,
) -> Result<f64> {
    if !(eps_f >= 0.0 && eps_f.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "eps_f",
            value: eps_f,
            requirement: "non-negative and finite",
        });
    }
    let s = lp.num_states as f64;
    let m = lp.reward_bound;
    let one_minus = 1.0 - lp.discount;
    let eps_prime = (eps_f / l1.alpha)
        .max(2.0 * l1.alpha * s * m * m / (one_minus * one_minus) + eps_f * m / one_minus);
    let report = check_lp_solution(lp, v, eps_prime, opt)?;
    if !report.approx_solution() {
        return Err(Error::CertificationFailed {
            eps_prime,
            max_violation: report.max_violation,
            objective_gap: report.objective_gap,
        });
    }
    Ok(eps_prime)
}
