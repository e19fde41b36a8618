use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::normal::std_normal_quantile;

/// A seeded, independently addressable random stream.
///
/// Backed by ChaCha20: the 64-bit seed is expanded to a key with
/// `SeedableRng::seed_from_u64` (documented PCG32 expansion) and the
/// 64-bit stream id selects ChaCha's nonce, so `(seed, stream_id)` pairs
/// give disjoint keystreams. Output is identical on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha20Rng,
}

pub fn rng_stream(seed: u64, stream_id: u64) -> RngStream {
    let mut inner = ChaCha20Rng::seed_from_u64(seed);
    inner.set_stream(stream_id);
    RngStream { inner }
}

const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

impl RngStream {
    /// Uniform on the open interval (0, 1), on a grid of spacing 2⁻⁵³.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * TWO_POW_MINUS_53
    }

    #[inline]
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal variate by inversion of one uniform.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        std_normal_quantile(self.uniform())
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
