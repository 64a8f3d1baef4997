//! Counter-based random streams.
//!
//! A stream is addressed by a master seed and a path of integers (replication
//! index, bootstrap replicate, ...). The path is hashed into a ChaCha8 key, so
//! the numbers a work unit sees depend only on its address and never on which
//! thread ran it or in what order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed and a path into a single 64-bit key.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = master;
    let mut key = splitmix64(&mut state);
    for (depth, &p) in path.iter().enumerate() {
        let mut s = p ^ ((depth as u64 + 1) << 56);
        key ^= splitmix64(&mut s);
        state = key;
        key = splitmix64(&mut state);
    }
    key
}

pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(master: u64, path: &[u64]) -> Self {
        let mut state = derive_seed(master, path);
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Stream(ChaCha8Rng::from_seed(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n` (multiply-shift; bias below `n / 2^64`).
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}
