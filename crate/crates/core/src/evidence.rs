//! Step 1: turn a study's decision sequence into evidence indices.
//!
//! A study that tested `m_j` hypotheses at level `α_j` carries evidence
//! mass `w_j = m_j / α_j`, spread evenly over its rejections:
//!
//! ```text
//! e_ij = w_j · δ_ij / max(‖δ_j‖₀, 1)
//! ```
//!
//! Only rejected hypotheses receive nonzero evidence, so [`EvidenceVector`]
//! stores the nonzero entries and reconstructs the dense view on demand.

use crate::error::Result;
use crate::mtp::ebh_cutoff;
use crate::types::{check_triplet, HypothesisId, StudyTriplet};

#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceVector {
    pub study_id: String,
    pub alpha: f64,
    /// `w_j = m_j / α_j`.
    pub weight: f64,
    /// `m_j`.
    pub tested: usize,
    pub rejection_count: usize,
    /// Nonzero entries in the study's hypothesis order.
    pub entries: Vec<(HypothesisId, f64)>,
}

impl EvidenceVector {
    /// The common value every rejected hypothesis receives (0 with no rejections).
    pub fn per_rejection(&self) -> f64 {
        if self.rejection_count == 0 {
            0.0
        } else {
            ebh_cutoff(self.tested, self.rejection_count, self.alpha)
        }
    }

    /// Largest evidence index in the study, `e_j^+`.
    pub fn max_evidence(&self) -> f64 {
        self.entries.iter().map(|&(_, e)| e).fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, e)| e).sum()
    }

    /// Dense `(id, e_ij)` pairs over the study's full tested set.
    pub fn dense(&self, study: &StudyTriplet) -> Vec<(HypothesisId, f64)> {
        let v = self.per_rejection();
        study
            .hypotheses
            .iter()
            .zip(&study.decisions)
            .map(|(&h, &d)| (h, if d { v } else { 0.0 }))
            .collect()
    }
}

/// Build the evidence vector of one validated study.
///
/// Hypothesis ids are only checked against each other here (duplicates,
/// length); range checks against the universe happen at aggregation.
pub fn build_evidence(study: &StudyTriplet) -> Result<EvidenceVector> {
    let bound = study.hypotheses.iter().map(|h| h.0 + 1).max().unwrap_or(0);
    check_triplet(study, bound)?;
    Ok(evidence_unchecked(study))
}

pub(crate) fn evidence_unchecked(study: &StudyTriplet) -> EvidenceVector {
    let tested = study.tested();
    let weight = tested as f64 / study.alpha;
    let rejection_count = study.rejection_count();
    // m_j / (r·α_j) is the e-BH cutoff expression, so a study fused alone
    // at its own level meets the cutoff exactly rather than one ulp short.
    let value = ebh_cutoff(tested, rejection_count.max(1), study.alpha);
    EvidenceVector {
        study_id: study.study_id.clone(),
        alpha: study.alpha,
        weight,
        tested,
        rejection_count,
        entries: study.rejected().map(|h| (h, value)).collect(),
    }
}
