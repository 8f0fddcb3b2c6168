//! Seeded randomness with named sub-streams.
//!
//! Every random choice in the pipeline comes from `xoshiro256**` seeded through
//! SplitMix64. A stream is identified by the root seed plus a label such as
//! `"dataset"` or `"pool/<source id>"`; the label is hashed into the stream
//! seed so one phase never perturbs another.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use sha2::{Digest, Sha256};

/// Name and version recorded in manifests.
pub const PRNG_NAME: &str = "xoshiro256**/splitmix64-seed";
pub const PRNG_VERSION: u32 = 1;

pub struct SeededRng(Xoshiro256StarStar);

/// Seed for the stream `label` under `root`: first 8 bytes (LE) of
/// SHA-256(root as u64 LE || label).
pub fn stream_seed(root: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

impl SeededRng {
    pub fn from_seed(seed: u64) -> SeededRng {
        SeededRng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn stream(root: u64, label: &str) -> SeededRng {
        SeededRng::from_seed(stream_seed(root, label))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..n` by rejection from the largest multiple of `n`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    pub fn below_usize(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fisher-Yates, iterating from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below_usize(i + 1);
            items.swap(i, j);
        }
    }
}
