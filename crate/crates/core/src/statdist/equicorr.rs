use crate::error::{Error, Result};

use super::rng::RngStream;

/// An equicorrelation matrix `(1−ρ)·I + ρ·J` of size `dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquicorrSpec {
    dim: usize,
    rho: f64,
}

impl EquicorrSpec {
    /// Requires `ρ < 1` and `ρ ≥ −1/(dim−1)` (positive semidefiniteness).
    pub fn new(dim: usize, rho: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("equicorrelation dimension must be positive"));
        }
        if !rho.is_finite() || rho >= 1.0 {
            return Err(Error::invalid(format!(
                "correlation {rho} must be finite and < 1"
            )));
        }
        if dim > 1 && rho < -1.0 / (dim - 1) as f64 {
            return Err(Error::invalid(format!(
                "correlation {rho} below -1/(dim-1) = {} for dim {dim}",
                -1.0 / (dim - 1) as f64
            )));
        }
        Ok(EquicorrSpec { dim, rho })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Coefficients `(a, b)` with `(a·I + b·J)² = (1−ρ)·I + ρ·J`.
pub fn equicorr_sqrt_coeffs(spec: &EquicorrSpec) -> (f64, f64) {
    let n = spec.dim as f64;
    let a = libm::sqrt(1.0 - spec.rho);
    let top = libm::sqrt((1.0 - spec.rho + n * spec.rho).max(0.0));
    (a, (top - a) / n)
}

/// Dense row-major matrix returned by the samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl SampleMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Zero-mean normal noise with covariance `A ⊗ B`: rows (hypotheses)
/// correlated at `rho_hyp`, columns (studies) at `rho_study`, unit variance.
///
/// Draws `Z` row-major, then applies `B^{1/2} Z A^{1/2}` using the `a·I + b·J`
/// form of each root, so no `m × m` matrix is formed.
pub fn sample_kronecker_noise(
    m: usize,
    d: usize,
    rho_study: f64,
    rho_hyp: f64,
    rng: &mut RngStream,
) -> Result<SampleMatrix> {
    let (a_s, b_s) = equicorr_sqrt_coeffs(&EquicorrSpec::new(d, rho_study)?);
    let (a_h, b_h) = equicorr_sqrt_coeffs(&EquicorrSpec::new(m, rho_hyp)?);

    let mut data: Vec<f64> = (0..m * d).map(|_| rng.standard_normal()).collect();

    if b_s != 0.0 {
        for row in data.chunks_exact_mut(d) {
            let s: f64 = row.iter().sum();
            for x in row.iter_mut() {
                *x = a_s * *x + b_s * s;
            }
        }
    } else if a_s != 1.0 {
        data.iter_mut().for_each(|x| *x *= a_s);
    }

    if b_h != 0.0 {
        let mut col_sums = vec![0.0; d];
        for row in data.chunks_exact(d) {
            for (c, x) in col_sums.iter_mut().zip(row) {
                *c += x;
            }
        }
        for row in data.chunks_exact_mut(d) {
            for (x, c) in row.iter_mut().zip(&col_sums) {
                *x = a_h * *x + b_h * c;
            }
        }
    } else if a_h != 1.0 {
        data.iter_mut().for_each(|x| *x *= a_h);
    }

    Ok(SampleMatrix {
        rows: m,
        cols: d,
        data,
    })
}

/// [`sample_kronecker_noise`] shifted by a per-row mean.
pub fn sample_kronecker_normal(
    means: &[f64],
    d: usize,
    rho_study: f64,
    rho_hyp: f64,
    rng: &mut RngStream,
) -> Result<SampleMatrix> {
    let mut x = sample_kronecker_noise(means.len(), d, rho_study, rho_hyp, rng)?;
    for (row, mu) in x.data.chunks_exact_mut(d.max(1)).zip(means) {
        row.iter_mut().for_each(|v| *v += mu);
    }
    Ok(x)
}
