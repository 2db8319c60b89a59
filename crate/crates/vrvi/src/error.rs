use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by model validation, solver preconditions and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative transition probability {prob} at state {state}, action {action}")]
    NegativeProbability {
        state: usize,
        action: usize,
        prob: f64,
    },

    #[error("transition row ({state}, {action}) sums to {sum}, expected 1 within {tolerance}")]
    RowSumMismatch {
        state: usize,
        action: usize,
        sum: f64,
        tolerance: f64,
    },

    #[error("reward {reward} at state {state}, action {action} lies outside [-{bound}, {bound}]")]
    RewardOutOfBound {
        state: usize,
        action: usize,
        reward: f64,
        bound: f64,
    },

    #[error("discount factor {discount} lies outside the open interval (0, 1)")]
    DiscountOutOfRange { discount: f64 },

    #[error("reward bound {bound} must be positive and finite")]
    InvalidRewardBound { bound: f64 },

    #[error("horizon must be at least 1")]
    InvalidHorizon,

    #[error("expected a vector of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("action index {action} at state {state} out of range for {num_actions} actions")]
    ActionOutOfRange {
        state: usize,
        action: usize,
        num_actions: usize,
    },

    #[error("next-state index {next} out of range in transition row ({state}, {action})")]
    NextStateOutOfRange {
        state: usize,
        action: usize,
        next: usize,
    },

    #[error("missing transition row for state {state}, action {action}")]
    MissingTransitionRow { state: usize, action: usize },

    #[error("duplicate transition row for state {state}, action {action}")]
    DuplicateTransitionRow { state: usize, action: usize },

    #[error("value vector contains a non-finite entry at index {index}")]
    NonFiniteValue { index: usize },

    #[error("parameter {name} = {value} violates requirement: {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("iteration cap {cap} exceeded before reaching the requested tolerance")]
    IterationCapExceeded { cap: usize },

    #[error(
        "brute-force oracle supports at most {max_states} states and {max_actions} actions, \
         got {states} states and {actions} actions"
    )]
    BruteForceTooLarge {
        states: usize,
        actions: usize,
        max_states: usize,
        max_actions: usize,
    },

    #[error("policy evaluation system is singular; the instance is malformed")]
    SingularPolicySystem,

    #[error("generator spec infeasible: {reason}")]
    InfeasibleGenerator { reason: String },

    #[error(
        "claimed objective accuracy is inconsistent: derived LP accuracy {eps_prime} \
         but measured violation {max_violation} and objective gap {objective_gap}"
    )]
    CertificationFailed {
        eps_prime: f64,
        max_violation: f64,
        objective_gap: f64,
    },

    #[error("malformed instance or solution file: {reason}")]
    Format { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format {
            reason: e.to_string(),
        }
    }
}
