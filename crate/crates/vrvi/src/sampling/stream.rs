//! Counter-based random streams.
//!
//! Every sampled quantity draws from a stream derived from a 64-bit master
//! seed and a [`StreamKey`]. Identical (seed, key) pairs reproduce the same
//! draw sequence, and distinct keys yield independent streams, so a fan-out
//! over (state, action) pairs produces the same numbers whether it runs
//! sequentially or in parallel.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PHASE_SALT: u64 = 0xa076_1d64_78bd_642f;
const WORD_SALT: u64 = 0x6a09_e667_f3bc_c909;

/// splitmix64-style finalizer absorbing one word into a running hash.
#[inline]
fn mix(h: u64, w: u64) -> u64 {
    let mut z = h
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(w.wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed, used for nested solver phases and sweep cells.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(master ^ PHASE_SALT, index)
}

/// Identifies one stream: a stage discriminant (backup rounds vs offset
/// construction), the outer round index, and the (state, action) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub stage: u64,
    pub round: u64,
    pub state: u64,
    pub action: u64,
}

impl StreamKey {
    /// Stream for the sampled backup of `round` at (state, action).
    pub fn backup(round: u64, state: usize, action: usize) -> Self {
        StreamKey {
            stage: 0,
            round,
            state: state as u64,
            action: action as u64,
        }
    }

    /// Stream for offset estimation anchored at `round` (state, action).
    pub fn offsets(round: u64, state: usize, action: usize) -> Self {
        StreamKey {
            stage: 1,
            round,
            state: state as u64,
            action: action as u64,
        }
    }
}

/// Factory of keyed streams sharing one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSource {
    master: u64,
}

impl SeedSource {
    pub fn new(master: u64) -> Self {
        SeedSource { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Independent source for a nested solver phase.
    pub fn child(&self, index: u64) -> SeedSource {
        SeedSource {
            master: derive_seed(self.master, index),
        }
    }

    pub fn stream(&self, key: StreamKey) -> RngStream {
        let mut h = self.master;
        for w in [key.stage, key.round, key.state, key.action] {
            h = mix(h, w);
        }
        let mut seed = [0u8; 32];
        let mut g = h;
        for chunk in seed.chunks_exact_mut(8) {
            g = mix(g, WORD_SALT);
            chunk.copy_from_slice(&g.to_le_bytes());
        }
        RngStream(ChaCha8Rng::from_seed(seed))
    }
}

/// A single-owner random stream (ChaCha8 behind a derived seed).
#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    /// Uniform draw in [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits.
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
}
