//! Transition sampling and the sampled Bellman operators.

pub mod alias;
pub mod kernel;
pub mod stream;

pub use alias::TransitionSampler;
pub use kernel::{
    apx_mon_val, apx_trans, exact_offsets, hoeffding_sample_count, sampled_offsets, ApxValResult,
    KernelOptions, OffsetTable, SamplingStrategy, TransEstimate,
};
pub use kernel::apx_val;
pub use stream::{derive_seed, RngStream, SeedSource, StreamKey};
