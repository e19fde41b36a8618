//! Domain types shared by every stage of the fusion pipeline.
//!
//! Hypotheses live in a dense universe `0..m`. A study publishes only its
//! decision bits, the FDR level it controlled, and which hypotheses it
//! tested; [`StudyTriplet`] carries exactly that.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Zero-based index into the hypothesis universe.
///
/// File formats and reports use one-based ids; conversion happens only in
/// the I/O layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HypothesisId(pub usize);

impl HypothesisId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }

    #[inline]
    pub fn one_based(self) -> usize {
        self.0 + 1
    }
}

impl From<usize> for HypothesisId {
    fn from(i: usize) -> Self {
        HypothesisId(i)
    }
}

impl fmt::Display for HypothesisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One study's published output: decisions, level, and tested set.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyTriplet {
    pub study_id: String,
    pub alpha: f64,
    pub hypotheses: Vec<HypothesisId>,
    pub decisions: Vec<bool>,
}

impl StudyTriplet {
    pub fn new(
        study_id: impl Into<String>,
        alpha: f64,
        hypotheses: Vec<HypothesisId>,
        decisions: Vec<bool>,
    ) -> Self {
        StudyTriplet {
            study_id: study_id.into(),
            alpha,
            hypotheses,
            decisions,
        }
    }

    /// Convenience constructor from plain indices and 0/1 decisions.
    pub fn from_indices(
        study_id: impl Into<String>,
        alpha: f64,
        hypotheses: &[usize],
        decisions: &[u8],
    ) -> Self {
        Self::new(
            study_id,
            alpha,
            hypotheses.iter().copied().map(HypothesisId).collect(),
            decisions.iter().map(|&d| d != 0).collect(),
        )
    }

    /// Number of hypotheses the study tested (`m_j`).
    pub fn tested(&self) -> usize {
        self.hypotheses.len()
    }

    /// Number of rejections, `‖δ_j‖₀`.
    pub fn rejection_count(&self) -> usize {
        self.decisions.iter().filter(|&&d| d).count()
    }

    pub fn rejected(&self) -> impl Iterator<Item = HypothesisId> + '_ {
        self.hypotheses
            .iter()
            .zip(&self.decisions)
            .filter_map(|(&h, &d)| d.then_some(h))
    }
}

/// Ground truth: `true` marks a non-null hypothesis. Simulation only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthVector(pub Vec<bool>);

impl TruthVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_non_null(&self, id: HypothesisId) -> bool {
        self.0[id.0]
    }

    pub fn non_null_count(&self) -> usize {
        self.0.iter().filter(|&&t| t).count()
    }

    pub fn nulls(&self) -> impl Iterator<Item = HypothesisId> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &t)| (!t).then_some(HypothesisId(i)))
    }
}

/// A full fusion instance: universe size, the studies, and the target level.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionProblem {
    pub m: usize,
    pub studies: Vec<StudyTriplet>,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagnosticKind {
    AlphaOutOfRange(f64),
    OverallAlphaOutOfRange(f64),
    EmptyUniverse,
    EmptyStudy,
    LengthMismatch { hypotheses: usize, decisions: usize },
    DuplicateHypothesis(HypothesisId),
    HypothesisOutOfRange { id: HypothesisId, m: usize },
    DuplicateStudyId,
    Untested(HypothesisId),
}

/// One validation finding. `study` is `None` for problem-level findings.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub study: Option<String>,
    pub field: &'static str,
    pub kind: DiagnosticKind,
}

impl Diagnostic {
    fn error(study: Option<&str>, field: &'static str, kind: DiagnosticKind) -> Self {
        Diagnostic {
            severity: Severity::Error,
            study: study.map(str::to_owned),
            field,
            kind,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// The hypothesis this diagnostic is about, if any.
    pub fn hypothesis(&self) -> Option<HypothesisId> {
        match self.kind {
            DiagnosticKind::DuplicateHypothesis(id)
            | DiagnosticKind::HypothesisOutOfRange { id, .. }
            | DiagnosticKind::Untested(id) => Some(id),
            _ => None,
        }
    }

    /// Human-readable message. Hypothesis ids are shifted by `id_offset`,
    /// so `0` reports internal indices and `1` reports file-format ids.
    pub fn message(&self, id_offset: usize) -> String {
        use DiagnosticKind::*;
        match &self.kind {
            AlphaOutOfRange(a) => format!("alpha out of range: {a} not in (0, 1)"),
            OverallAlphaOutOfRange(a) => {
                format!("overall alpha out of range: {a} not in (0, 1)")
            }
            EmptyUniverse => "universe size m must be at least 1".to_owned(),
            EmptyStudy => "study tests no hypotheses".to_owned(),
            LengthMismatch {
                hypotheses,
                decisions,
            } => format!("{hypotheses} hypotheses but {decisions} decisions"),
            DuplicateHypothesis(id) => {
                format!("hypothesis {} listed more than once", id.0 + id_offset)
            }
            HypothesisOutOfRange { id, m } => format!(
                "hypothesis {} outside universe of size {m}",
                id.0 + id_offset
            ),
            DuplicateStudyId => "study id appears more than once".to_owned(),
            Untested(id) => format!("hypothesis {} untested", id.0 + id_offset),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.study {
            Some(s) => write!(
                f,
                "{level}: study '{s}' ({}): {}",
                self.field,
                self.message(0)
            ),
            None => write!(f, "{level}: ({}): {}", self.field, self.message(0)),
        }
    }
}

/// Check every structural invariant of a problem.
///
/// Returns an empty list iff all invariants hold. Coverage gaps are
/// warnings; everything else is an error.
pub fn validate_problem(problem: &FusionProblem) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if !(problem.alpha > 0.0 && problem.alpha < 1.0) {
        out.push(Diagnostic::error(
            None,
            "alpha",
            DiagnosticKind::OverallAlphaOutOfRange(problem.alpha),
        ));
    }
    if problem.m == 0 {
        out.push(Diagnostic::error(None, "m", DiagnosticKind::EmptyUniverse));
    }
    out.extend(validate_studies(&problem.studies, problem.m));
    out
}

/// Study-level part of [`validate_problem`], without the overall alpha.
pub fn validate_studies(studies: &[StudyTriplet], m: usize) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen_ids: HashSet<&str> = HashSet::new();
    let mut covered = vec![false; m];

    for study in studies {
        let sid = Some(study.study_id.as_str());
        if !seen_ids.insert(&study.study_id) {
            out.push(Diagnostic::error(
                sid,
                "study_id",
                DiagnosticKind::DuplicateStudyId,
            ));
        }
        if !(study.alpha > 0.0 && study.alpha < 1.0) {
            out.push(Diagnostic::error(
                sid,
                "alpha",
                DiagnosticKind::AlphaOutOfRange(study.alpha),
            ));
        }
        if study.hypotheses.is_empty() {
            out.push(Diagnostic::error(
                sid,
                "hypotheses",
                DiagnosticKind::EmptyStudy,
            ));
        }
        if study.hypotheses.len() != study.decisions.len() {
            out.push(Diagnostic::error(
                sid,
                "decisions",
                DiagnosticKind::LengthMismatch {
                    hypotheses: study.hypotheses.len(),
                    decisions: study.decisions.len(),
                },
            ));
        }
        let mut local: HashSet<HypothesisId> = HashSet::with_capacity(study.hypotheses.len());
        for &h in &study.hypotheses {
            if h.0 >= m {
                out.push(Diagnostic::error(
                    sid,
                    "hypotheses",
                    DiagnosticKind::HypothesisOutOfRange { id: h, m },
                ));
                continue;
            }
            if !local.insert(h) {
                out.push(Diagnostic::error(
                    sid,
                    "hypotheses",
                    DiagnosticKind::DuplicateHypothesis(h),
                ));
            }
            covered[h.0] = true;
        }
    }

    out.extend(
        covered
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| Diagnostic {
                severity: Severity::Warning,
                study: None,
                field: "hypotheses",
                kind: DiagnosticKind::Untested(HypothesisId(i)),
            }),
    );
    out
}

/// Validate a single triplet on its own, in a universe of size `m`.
pub fn check_triplet(study: &StudyTriplet, m: usize) -> Result<()> {
    let errors: Vec<_> = validate_studies(std::slice::from_ref(study), m)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(errors))
    }
}

/// Fail with [`Error::Validation`] if any diagnostic is an error.
pub fn ensure_valid(problem: &FusionProblem) -> Result<Vec<Diagnostic>> {
    let diags = validate_problem(problem);
    if diags.iter().any(Diagnostic::is_error) {
        Err(Error::Validation(diags))
    } else {
        Ok(diags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(m: usize, studies: Vec<StudyTriplet>) -> FusionProblem {
        FusionProblem {
            m,
            studies,
            alpha: 0.1,
        }
    }

    #[test]
    fn valid_single_study_has_no_diagnostics() {
        let p = problem(
            3,
            vec![StudyTriplet::from_indices(
                "s1",
                0.05,
                &[0, 1, 2],
                &[1, 0, 0],
            )],
        );
        assert!(validate_problem(&p).is_empty());
    }

    #[test]
    fn zero_alpha_is_an_error() {
        let p = problem(
            3,
            vec![StudyTriplet::from_indices(
                "s1",
                0.0,
                &[0, 1, 2],
                &[1, 0, 0],
            )],
        );
        let d = validate_problem(&p);
        assert_eq!(d.len(), 1);
        assert!(d[0].is_error());
        assert_eq!(d[0].kind, DiagnosticKind::AlphaOutOfRange(0.0));
        assert!(d[0].message(0).starts_with("alpha out of range"));
        assert_eq!(d[0].study.as_deref(), Some("s1"));
    }

    #[test]
    fn coverage_gap_is_a_warning() {
        let p = problem(
            4,
            vec![
                StudyTriplet::from_indices("a", 0.05, &[0, 1], &[1, 0]),
                StudyTriplet::from_indices("b", 0.05, &[1, 2], &[0, 0]),
            ],
        );
        let d = validate_problem(&p);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
        assert_eq!(d[0].message(0), "hypothesis 3 untested");
        assert_eq!(d[0].message(1), "hypothesis 4 untested");
        assert!(ensure_valid(&p).is_ok());
    }

    #[test]
    fn structural_errors_are_reported_per_study() {
        let p = problem(
            3,
            vec![
                StudyTriplet::from_indices("a", 0.05, &[0, 0, 5], &[1, 0, 0]),
                StudyTriplet::from_indices("a", 0.05, &[1, 2], &[1]),
                StudyTriplet::from_indices("c", 0.05, &[], &[]),
            ],
        );
        let kinds: Vec<_> = validate_problem(&p).into_iter().map(|d| d.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::DuplicateHypothesis(HypothesisId(0))));
        assert!(kinds.contains(&DiagnosticKind::HypothesisOutOfRange {
            id: HypothesisId(5),
            m: 3
        }));
        assert!(kinds.contains(&DiagnosticKind::DuplicateStudyId));
        assert!(kinds.contains(&DiagnosticKind::LengthMismatch {
            hypotheses: 2,
            decisions: 1
        }));
        assert!(kinds.contains(&DiagnosticKind::EmptyStudy));
    }

    #[test]
    fn overall_alpha_checked() {
        let mut p = problem(1, vec![StudyTriplet::from_indices("a", 0.05, &[0], &[1])]);
        p.alpha = 1.0;
        assert!(matches!(ensure_valid(&p), Err(Error::Validation(_))));
        p.alpha = f64::NAN;
        assert!(validate_problem(&p)[0].is_error());
    }

    #[test]
    fn validation_is_deterministic() {
        let p = problem(
            6,
            vec![
                StudyTriplet::from_indices("a", 1.5, &[0, 0, 9], &[1, 0, 0]),
                StudyTriplet::from_indices("b", 0.05, &[2], &[1]),
            ],
        );
        assert_eq!(validate_problem(&p), validate_problem(&p));
    }
}
