//! Fusion of multiple-testing results across studies.
//!
//! Each study contributes only its binary decisions, its FDR level and the
//! set of hypotheses it tested. Those are turned into evidence indices
//! (generalized e-values), averaged across studies, and thresholded with
//! e-BH, which keeps the overall false discovery rate at the target level
//! whenever every study controlled its own.
//!
//! ```
//! use irt_core::{fuse, AggregationMode, FusionProblem, HypothesisId, StudyTriplet};
//!
//! let problem = FusionProblem {
//!     m: 4,
//!     alpha: 0.2,
//!     studies: vec![
//!         StudyTriplet::from_indices("a", 0.05, &[0, 1, 2, 3], &[1, 0, 0, 0]),
//!         StudyTriplet::from_indices("b", 0.05, &[0, 1, 2, 3], &[1, 1, 0, 0]),
//!     ],
//! };
//! let out = fuse(&problem, AggregationMode::Agg).unwrap();
//! // evidence 60 and 20 clear the e-BH cutoff 4 / (2 · 0.2) = 10
//! assert_eq!(out.rejection.rejected, [HypothesisId(0), HypothesisId(1)]);
//! ```
//!
//! Alongside the core pipeline the crate provides the p-value calibration
//! route ([`calibrate`]), comparison methods ([`baselines`]), the numeric
//! kernels they need ([`statdist`]), a simulation harness ([`sim`]) and the
//! file formats used by the command-line tool ([`io`]).

pub mod aggregate;
pub mod baselines;
pub mod calibrate;
pub mod error;
pub mod evidence;
pub mod io;
pub mod mtp;
pub mod sim;
pub mod statdist;
pub mod types;

pub use aggregate::{
    aggregate_evidence, coverage, AggregatedEvidence, AggregationMode, CoverageProfile,
};
pub use baselines::{fisher_pool, hm_pool, naive_vote};
pub use calibrate::{p2e_calibrator, p2e_pipeline, PValueTable, StudyPValues};
pub use error::{Error, Result};
pub use evidence::{build_evidence, EvidenceVector};
pub use mtp::{bh, ebh, fdp_etp, RejectionSet};
pub use types::{
    validate_problem, Diagnostic, DiagnosticKind, FusionProblem, HypothesisId, Severity,
    StudyTriplet, TruthVector,
};

/// Output of the full decision-based pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionOutcome {
    pub evidence: Vec<EvidenceVector>,
    pub aggregated: AggregatedEvidence,
    pub rejection: RejectionSet,
    /// Non-fatal diagnostics (coverage gaps).
    pub warnings: Vec<Diagnostic>,
}

/// Validate, build evidence, aggregate under `mode`, and run e-BH.
pub fn fuse(problem: &FusionProblem, mode: AggregationMode) -> Result<FusionOutcome> {
    let warnings = types::ensure_valid(problem)?;
    let evidence: Vec<_> = problem
        .studies
        .iter()
        .map(evidence::evidence_unchecked)
        .collect();
    let cov = coverage(&problem.studies, problem.m);
    let aggregated = aggregate_evidence(&evidence, &cov, mode)?;
    let rejection = ebh(&aggregated.values, problem.alpha)?;
    Ok(FusionOutcome {
        evidence,
        aggregated,
        rejection,
        warnings,
    })
}
