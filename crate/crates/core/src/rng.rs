//! Seeded random streams.
//!
//! Every trajectory draws from ChaCha8 seeded with a 64-bit seed and switched
//! to the stream given by the replicate index, so `(seed, index)` pins the
//! sequence of variates independently of scheduling.
//!
//! Draw conventions used by the step kernels:
//! - `bernoulli(prob)` consumes one `f64` in `[0, 1)` and succeeds when it is
//!   below `prob`, except that `prob <= 0` and `prob >= 1` consume nothing;
//! - `uniform_index(n)` is `rand` 0.8's `gen_range(0..n)` on `u64`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifier written into every output file.
pub const RNG_ALGORITHM: &str = "chacha8-rand_chacha0.3";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    pub fn generator(&self) -> StepRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.index);
        StepRng { inner }
    }
}

#[derive(Debug, Clone)]
pub struct StepRng {
    inner: ChaCha8Rng,
}

impl StepRng {
    #[inline]
    pub fn bernoulli(&mut self, prob: f64) -> bool {
        if prob <= 0.0 {
            false
        } else if prob >= 1.0 {
            true
        } else {
            self.inner.gen::<f64>() < prob
        }
    }

    /// Uniform on `0..n`; `n` must be positive.
    #[inline]
    pub fn uniform_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.inner.gen_range(0..n as u64) as usize
    }
}
