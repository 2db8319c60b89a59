//! Instance and solution files.
//!
//! Instances are single JSON objects: a header (sizes, discount or horizon,
//! reward bound), a dense `|S|×|A|` reward array, and one transition record
//! per (state, action) with `[next_state, probability]` pairs. Floats are
//! written in the shortest form that round-trips exactly, so write → read
//! is lossless. A missing (state, action) record fails validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::finite_horizon::FiniteHorizonMdp;
use crate::mdp::{Dmdp, MdpModel, Transition};

/// Either kind of instance, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Dmdp(Dmdp),
    FiniteHorizon(FiniteHorizonMdp),
}

impl Instance {
    pub fn num_states(&self) -> usize {
        match self {
            Instance::Dmdp(d) => d.num_states(),
            Instance::FiniteHorizon(f) => f.num_states(),
        }
    }

    pub fn num_actions(&self) -> usize {
        match self {
            Instance::Dmdp(d) => d.num_actions(),
            Instance::FiniteHorizon(f) => f.num_actions(),
        }
    }

    /// Content hash of the canonical serialized form.
    pub fn fingerprint(&self) -> String {
        let text = instance_to_string(self);
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct TransitionRecord {
    state: usize,
    action: usize,
    probs: Vec<(usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    num_states: usize,
    num_actions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    discount: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<usize>,
    reward_bound: f64,
    rewards: Vec<Vec<f64>>,
    transitions: Vec<TransitionRecord>,
}

fn to_file_repr(instance: &Instance) -> InstanceFile {
    let (s, a) = (instance.num_states(), instance.num_actions());
    let model: &dyn ErasedModel = match instance {
        Instance::Dmdp(d) => d,
        Instance::FiniteHorizon(f) => f,
    };
    let rewards = (0..s)
        .map(|i| (0..a).map(|j| model.reward_at(i, j)).collect())
        .collect();
    let mut transitions = Vec::with_capacity(s * a);
    for i in 0..s {
        for j in 0..a {
            transitions.push(TransitionRecord {
                state: i,
                action: j,
                probs: model.row_at(i, j).iter().map(|t| (t.next, t.prob)).collect(),
            });
        }
    }
    InstanceFile {
        num_states: s,
        num_actions: a,
        discount: match instance {
            Instance::Dmdp(d) => Some(d.discount()),
            Instance::FiniteHorizon(_) => None,
        },
        horizon: match instance {
            Instance::Dmdp(_) => None,
            Instance::FiniteHorizon(f) => Some(f.horizon()),
        },
        reward_bound: model.bound(),
        rewards,
        transitions,
    }
}

/// Object-safe slice of MdpModel used only for serialization.
trait ErasedModel {
    fn reward_at(&self, i: usize, a: usize) -> f64;
    fn row_at(&self, i: usize, a: usize) -> &[Transition];
    fn bound(&self) -> f64;
}

impl<T: MdpModel> ErasedModel for T {
    fn reward_at(&self, i: usize, a: usize) -> f64 {
        self.reward(i, a)
    }
    fn row_at(&self, i: usize, a: usize) -> &[Transition] {
        self.row(i, a)
    }
    fn bound(&self) -> f64 {
        self.reward_bound()
    }
}

fn from_file_repr(file: InstanceFile) -> Result<Instance> {
    let s = file.num_states;
    let a = file.num_actions;
    if file.rewards.len() != s {
        return Err(Error::Format {
            reason: format!("expected {s} reward rows, got {}", file.rewards.len()),
        });
    }
    let mut rewards = Vec::with_capacity(s * a);
    for (i, row) in file.rewards.iter().enumerate() {
        if row.len() != a {
            return Err(Error::Format {
                reason: format!("reward row {i} has length {}, expected {a}", row.len()),
            });
        }
        rewards.extend_from_slice(row);
    }
    let mut rows: Vec<Option<Vec<Transition>>> = vec![None; s * a];
    for rec in file.transitions {
        if rec.state >= s || rec.action >= a {
            return Err(Error::Format {
                reason: format!(
                    "transition record ({}, {}) outside the {s}x{a} table",
                    rec.state, rec.action
                ),
            });
        }
        let slot = &mut rows[rec.state * a + rec.action];
        if slot.is_some() {
            return Err(Error::DuplicateTransitionRow {
                state: rec.state,
                action: rec.action,
            });
        }
        *slot = Some(
            rec.probs
                .into_iter()
                .map(|(next, prob)| Transition::new(next, prob))
                .collect(),
        );
    }
    let mut table = Vec::with_capacity(s * a);
    for i in 0..s {
        for j in 0..a {
            match rows[i * a + j].take() {
                Some(row) => table.push(row),
                None => {
                    return Err(Error::MissingTransitionRow {
                        state: i,
                        action: j,
                    })
                }
            }
        }
    }
    match (file.discount, file.horizon) {
        (Some(gamma), None) => Ok(Instance::Dmdp(Dmdp::new(
            s,
            a,
            table,
            rewards,
            gamma,
            file.reward_bound,
        )?)),
        (None, Some(h)) => Ok(Instance::FiniteHorizon(FiniteHorizonMdp::new(
            s,
            a,
            table,
            rewards,
            h,
            file.reward_bound,
        )?)),
        (Some(_), Some(_)) => Err(Error::Format {
            reason: "instance declares both a discount and a horizon".to_string(),
        }),
        (None, None) => Err(Error::Format {
            reason: "instance declares neither a discount nor a horizon".to_string(),
        }),
    }
}

pub fn instance_to_string(instance: &Instance) -> String {
    serde_json::to_string_pretty(&to_file_repr(instance)).expect("instance serialization")
}

pub fn instance_from_str(text: &str) -> Result<Instance> {
    from_file_repr(serde_json::from_str(text)?)
}

pub fn write_instance(path: impl AsRef<Path>, instance: &Instance) -> Result<()> {
    std::fs::write(path, instance_to_string(instance) + "\n")?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    instance_from_str(&std::fs::read_to_string(path)?)
}

/// Values plus policy of one solver run, with enough metadata to re-verify.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub schema_version: u32,
    pub algorithm: String,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub instance_fingerprint: String,
    pub iterations: u64,
    pub total_samples: u64,
    #[serde(flatten)]
    pub body: SolutionBody,
}

/// Stationary solutions carry one value and one action per state;
/// non-stationary ones carry step-0 values and one action row per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SolutionBody {
    Stationary {
        values: Vec<f64>,
        policy: Vec<usize>,
    },
    Nonstationary {
        values: Vec<f64>,
        policy: Vec<Vec<usize>>,
    },
}

pub const SOLUTION_SCHEMA_VERSION: u32 = 1;

pub fn solution_to_string(solution: &SolutionFile) -> String {
    serde_json::to_string_pretty(solution).expect("solution serialization")
}

pub fn write_solution(path: impl AsRef<Path>, solution: &SolutionFile) -> Result<()> {
    std::fs::write(path, solution_to_string(solution) + "\n")?;
    Ok(())
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<SolutionFile> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
