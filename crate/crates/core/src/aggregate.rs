//! Step 2: fuse per-study evidence into one value per hypothesis.
//!
//! Two normalizations are supported. [`AggregationMode::Agg`] divides every
//! sum by `n = max_i n_i` and is valid whenever each study controls its FDR.
//! [`AggregationMode::AggStar`] divides by the hypothesis' own coverage
//! `n_i`; it ranks better but additionally needs exchangeable truths and a
//! per-study data model that does not depend on the hypothesis index. The
//! software cannot check that from decision bits, so the caller chooses.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evidence::EvidenceVector;
use crate::types::{HypothesisId, StudyTriplet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AggregationMode {
    #[default]
    Agg,
    AggStar,
}

impl AggregationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AggregationMode::Agg => "agg",
            AggregationMode::AggStar => "agg-star",
        }
    }
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AggregationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "agg" => Ok(AggregationMode::Agg),
            "agg-star" | "agg_star" | "aggstar" => Ok(AggregationMode::AggStar),
            other => Err(Error::invalid(format!(
                "unknown aggregation mode '{other}' (expected agg or agg-star)"
            ))),
        }
    }
}

/// How many studies tested each hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageProfile {
    pub counts: Vec<usize>,
    /// `max_i n_i`.
    pub max: usize,
}

impl CoverageProfile {
    pub fn m(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, id: HypothesisId) -> usize {
        self.counts[id.0]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Count `n_i` for every hypothesis in `0..m`.
///
/// Ids outside the universe are ignored; validation reports them.
pub fn coverage(studies: &[StudyTriplet], m: usize) -> CoverageProfile {
    coverage_from_sets(studies.iter().map(|s| s.hypotheses.as_slice()), m)
}

pub fn coverage_from_sets<'a>(
    sets: impl IntoIterator<Item = &'a [HypothesisId]>,
    m: usize,
) -> CoverageProfile {
    let mut counts = vec![0usize; m];
    for set in sets {
        for h in set {
            if let Some(c) = counts.get_mut(h.0) {
                *c += 1;
            }
        }
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    CoverageProfile { counts, max }
}

/// Fused evidence per hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedEvidence {
    pub mode: AggregationMode,
    pub values: Vec<f64>,
    pub coverage: CoverageProfile,
}

/// Aggregate IRT evidence vectors under `mode`.
pub fn aggregate_evidence(
    evidence: &[EvidenceVector],
    coverage: &CoverageProfile,
    mode: AggregationMode,
) -> Result<AggregatedEvidence> {
    aggregate_entries(
        evidence.iter().map(|e| e.entries.as_slice()),
        coverage,
        mode,
    )
}

/// Aggregate arbitrary per-study `(id, e_ij)` lists.
///
/// Zero entries may be omitted. Infinite entries propagate as infinity.
pub fn aggregate_entries<'a>(
    per_study: impl IntoIterator<Item = &'a [(HypothesisId, f64)]>,
    coverage: &CoverageProfile,
    mode: AggregationMode,
) -> Result<AggregatedEvidence> {
    let m = coverage.m();
    let mut sums = vec![0.0f64; m];
    for (j, entries) in per_study.into_iter().enumerate() {
        for &(h, e) in entries {
            if h.0 >= m {
                return Err(Error::Structural(format!(
                    "study {j} references hypothesis {h} but the coverage universe has size {m}"
                )));
            }
            if coverage.counts[h.0] == 0 {
                return Err(Error::Structural(format!(
                    "study {j} carries evidence for hypothesis {h}, which the coverage profile marks untested"
                )));
            }
            if e.is_nan() || e < 0.0 {
                return Err(Error::invalid(format!(
                    "negative or NaN evidence {e} for hypothesis {h}"
                )));
            }
            sums[h.0] += e;
        }
    }
    let values = match mode {
        AggregationMode::Agg => {
            let n = coverage.max.max(1) as f64;
            sums.into_iter().map(|s| s / n).collect()
        }
        AggregationMode::AggStar => sums
            .into_iter()
            .zip(&coverage.counts)
            .map(|(s, &n_i)| if n_i == 0 { 0.0 } else { s / n_i as f64 })
            .collect(),
    };
    Ok(AggregatedEvidence {
        mode,
        values,
        coverage: coverage.clone(),
    })
}
