use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seedable random source shared by every stochastic operation.
///
/// The same seed followed by the same sequence of draws always yields the same
/// values, on every platform. Workers that run in parallel should each own a
/// state derived from their own seed (see [`RngState::derive`]).
#[derive(Debug, Clone)]
pub struct RngState {
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Per-item seed used by the batch commands: `seed ^ index`.
    pub fn derive(seed: u64, index: u64) -> Self {
        Self::from_seed(seed ^ index)
    }

    /// Uniform integer in the closed range `[lo, hi]`. Returns `lo` when `hi < lo`.
    pub fn uniform_int(&mut self, lo: i64, hi: i64) -> i64 {
        if hi <= lo {
            return lo;
        }
        self.inner.gen_range(lo..=hi)
    }

    /// Uniform real in `[lo, hi)`. Returns `lo` for an empty interval.
    pub fn uniform_real(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        lo + (hi - lo) * self.inner.gen::<f64>()
    }

    /// `true` with probability `p` (clamped to `[0, 1]`).
    ///
    /// Always consumes exactly one draw so that the stream position does not
    /// depend on `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        let u = self.inner.gen::<f64>();
        u < p.clamp(0.0, 1.0)
    }

    /// Uniform index into a collection of `len` items.
    pub fn index(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        self.inner.gen_range(0..len)
    }

    /// Sample an index from a discrete distribution given by `weights`.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.inner.gen::<f64>() * total;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        weights.len() - 1
    }
}
