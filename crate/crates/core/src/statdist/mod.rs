//! Deterministic numeric kernels used by the baselines and the simulator.
//!
//! Transcendental functions go through the pure-Rust `libm` port rather
//! than the platform C library, so simulated p-values and decisions are
//! bit-identical across targets.

mod chisq;
mod equicorr;
mod normal;
mod rng;

pub use chisq::chisq_sf;
pub use equicorr::{
    equicorr_sqrt_coeffs, sample_kronecker_noise, sample_kronecker_normal, EquicorrSpec,
    SampleMatrix,
};
pub use normal::{
    std_normal_cdf, std_normal_quantile, std_normal_sf, two_sided_p, two_sided_p_unchecked,
};
pub use rng::{rng_stream, RngStream};
