//! Per-path random streams keyed by `(seed, path index)`.
//!
//! Each path owns an independent ChaCha8 stream (stream id = path index), so
//! a path's draws never depend on how paths are scheduled across workers.
//! Within a path the simulation consumes, per time step, `r` standard
//! normals followed by one uniform when the bridge test is enabled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Debug)]
pub struct PathStream {
    rng: ChaCha8Rng,
}

impl PathStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { rng }
    }

    /// Stream for an auxiliary purpose (start sampling, chain `k`, ...),
    /// separated from the path streams of `seed` by mixing in `tag`.
    pub fn derived(seed: u64, tag: u64, index: u64) -> Self {
        Self::new(derive_seed(seed, tag), index)
    }

    #[inline]
    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    #[inline]
    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        for z in out {
            *z = self.gaussian();
        }
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// SplitMix64 finalizer applied to `seed ^ tag·φ`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
