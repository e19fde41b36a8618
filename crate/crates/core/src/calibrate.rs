//! p-value to e-value calibration and the P2E fusion pipeline.
//!
//! Each `p_ij` is mapped through the fixed calibrator
//!
//! ```text
//! f(p) = ∞                   if p = 0
//!        2 / (p · ln(p)²)     if 0 < p ≤ e⁻²
//!        0                    if p > e⁻²
//! ```
//!
//! which integrates to exactly 1 over `[0, 1]`, then aggregated and
//! thresholded exactly like decision-based evidence.

use crate::aggregate::{aggregate_entries, AggregatedEvidence, AggregationMode, CoverageProfile};
use crate::error::{Error, Result};
use crate::mtp::{ebh, RejectionSet};
use crate::types::HypothesisId;

/// `e⁻²`, the calibrator's cut-off.
pub const P2E_CUTOFF: f64 = 0.135_335_283_236_612_7;

/// p-values reported by one study over its tested set.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyPValues {
    pub study_id: String,
    pub hypotheses: Vec<HypothesisId>,
    pub p_values: Vec<f64>,
}

impl StudyPValues {
    pub fn new(
        study_id: impl Into<String>,
        hypotheses: Vec<HypothesisId>,
        p_values: Vec<f64>,
    ) -> Self {
        StudyPValues {
            study_id: study_id.into(),
            hypotheses,
            p_values,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (HypothesisId, f64)> + '_ {
        self.hypotheses
            .iter()
            .copied()
            .zip(self.p_values.iter().copied())
    }
}

/// All studies' p-values; entry `(j, i)` exists exactly for `i ∈ ℳ_j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PValueTable {
    pub studies: Vec<StudyPValues>,
}

impl PValueTable {
    pub fn new(studies: Vec<StudyPValues>) -> Self {
        PValueTable { studies }
    }

    /// Check shapes, ranges, and that every id is inside `0..m`.
    pub fn check(&self, m: usize) -> Result<()> {
        for s in &self.studies {
            if s.hypotheses.len() != s.p_values.len() {
                return Err(Error::invalid(format!(
                    "study '{}' lists {} hypotheses but {} p-values",
                    s.study_id,
                    s.hypotheses.len(),
                    s.p_values.len()
                )));
            }
            let mut seen = vec![false; m];
            for (h, p) in s.iter() {
                if h.0 >= m {
                    return Err(Error::Structural(format!(
                        "study '{}' references hypothesis {h} outside universe of size {m}",
                        s.study_id
                    )));
                }
                if std::mem::replace(&mut seen[h.0], true) {
                    return Err(Error::invalid(format!(
                        "study '{}' lists hypothesis {h} twice",
                        s.study_id
                    )));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::invalid(format!(
                        "study '{}': p-value {p} for hypothesis {h} outside [0, 1]",
                        s.study_id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn coverage(&self, m: usize) -> CoverageProfile {
        crate::aggregate::coverage_from_sets(
            self.studies.iter().map(|s| s.hypotheses.as_slice()),
            m,
        )
    }
}

/// The calibrator `f(p)`; `+∞` at `p = 0`.
pub fn p2e_calibrator(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p-value {p} outside [0, 1]")));
    }
    Ok(calibrate_unchecked(p))
}

#[inline]
pub(crate) fn calibrate_unchecked(p: f64) -> f64 {
    if p == 0.0 {
        f64::INFINITY
    } else if p <= P2E_CUTOFF {
        let l = libm::log(p);
        2.0 / (p * l * l)
    } else {
        0.0
    }
}

/// Calibrated and aggregated evidence, before thresholding.
pub fn p2e_evidence(
    pvals: &PValueTable,
    coverage: &CoverageProfile,
    mode: AggregationMode,
) -> Result<AggregatedEvidence> {
    pvals.check(coverage.m())?;
    let calibrated: Vec<Vec<(HypothesisId, f64)>> = pvals
        .studies
        .iter()
        .map(|s| {
            s.iter()
                .map(|(h, p)| (h, calibrate_unchecked(p)))
                .filter(|&(_, e)| e != 0.0)
                .collect()
        })
        .collect();
    aggregate_entries(calibrated.iter().map(Vec::as_slice), coverage, mode)
}

/// Calibrate, aggregate under `mode`, then run e-BH at `alpha`.
pub fn p2e_pipeline(
    pvals: &PValueTable,
    coverage: &CoverageProfile,
    mode: AggregationMode,
    alpha: f64,
) -> Result<RejectionSet> {
    let agg = p2e_evidence(pvals, coverage, mode)?;
    ebh(&agg.values, alpha)
}
