use rayon::prelude::*;

use super::config::{Method, ScenarioConfig};
use super::generate::{generate_rep, RepData};
use crate::aggregate::{aggregate_evidence, coverage, AggregatedEvidence, AggregationMode};
use crate::baselines::{fisher_pool, hm_pool, naive_vote};
use crate::calibrate::p2e_pipeline;
use crate::error::Result;
use crate::evidence::evidence_unchecked;
use crate::mtp::{ebh, fdp_etp};
use crate::types::TruthVector;

#[derive(Debug, Clone, PartialEq)]
pub struct RepMetrics {
    pub rep: usize,
    pub method: Method,
    pub fdp: f64,
    pub etp: usize,
    pub rejections: usize,
}

/// Quantities behind the validity checks, recorded per repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct RepDiagnostics {
    pub rep: usize,
    /// `Σ_{i ∈ H0} e_i^agg`.
    pub null_evidence_agg: f64,
    /// `Σ_{i ∈ H0} e_i^agg*`.
    pub null_evidence_agg_star: f64,
    /// Realized FDP of each study's own BH decisions.
    pub study_fdp: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepOutcome {
    pub metrics: Vec<RepMetrics>,
    pub diagnostics: RepDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub reps: usize,
    pub mean_fdp: f64,
    pub mean_etp: f64,
    pub se_fdp: f64,
    pub se_etp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub metrics: Vec<RepMetrics>,
    pub diagnostics: Vec<RepDiagnostics>,
    pub summary: Vec<MethodSummary>,
}

fn null_sum(agg: &AggregatedEvidence, truth: &TruthVector) -> f64 {
    truth.nulls().map(|h| agg.values[h.0]).sum()
}

/// Run every configured method on one repetition.
pub fn run_rep(config: &ScenarioConfig, rep: usize) -> Result<RepOutcome> {
    let RepData {
        truth,
        studies,
        pvalues,
        ..
    } = generate_rep(config, rep as u64)?;
    let m = config.m;
    let cov = coverage(&studies, m);
    let evidence: Vec<_> = studies.iter().map(evidence_unchecked).collect();
    let agg = aggregate_evidence(&evidence, &cov, AggregationMode::Agg)?;
    let agg_star = aggregate_evidence(&evidence, &cov, AggregationMode::AggStar)?;

    let study_fdp = studies
        .iter()
        .map(|s| {
            let r = s.rejection_count();
            let false_rej = s.rejected().filter(|&h| !truth.is_non_null(h)).count();
            false_rej as f64 / r.max(1) as f64
        })
        .collect();

    let mut metrics = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let rejected = match method {
            Method::Irt => ebh(&agg.values, config.alpha)?,
            Method::IrtStar => ebh(&agg_star.values, config.alpha)?,
            Method::P2e => p2e_pipeline(&pvalues, &cov, AggregationMode::Agg, config.alpha)?,
            Method::P2eStar => {
                p2e_pipeline(&pvalues, &cov, AggregationMode::AggStar, config.alpha)?
            }
            Method::Naive => naive_vote(&studies, m),
            Method::Fisher => fisher_pool(&pvalues, &cov, config.alpha)?,
            Method::Hm => hm_pool(&pvalues, &cov, config.alpha)?,
        };
        let (fdp, etp) = fdp_etp(&rejected, &truth);
        metrics.push(RepMetrics {
            rep,
            method,
            fdp,
            etp,
            rejections: rejected.len(),
        });
    }

    Ok(RepOutcome {
        metrics,
        diagnostics: RepDiagnostics {
            rep,
            null_evidence_agg: null_sum(&agg, &truth),
            null_evidence_agg_star: null_sum(&agg_star, &truth),
            study_fdp,
        },
    })
}

/// Run all repetitions of one grid point.
///
/// The configuration is validated before any repetition starts. Output is
/// ordered by repetition, then by the configured method order, regardless
/// of how many worker threads ran.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    config.validate()?;
    let outcomes: Vec<RepOutcome> = (0..config.reps)
        .into_par_iter()
        .map(|rep| run_rep(config, rep))
        .collect::<Result<_>>()?;
    let mut metrics = Vec::with_capacity(outcomes.len() * config.methods.len());
    let mut diagnostics = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        metrics.extend(o.metrics);
        diagnostics.push(o.diagnostics);
    }
    let summary = summarize(&metrics, &config.methods);
    Ok(ScenarioRun {
        config: config.clone(),
        metrics,
        diagnostics,
        summary,
    })
}

/// Mean and standard error of the mean, with `n − 1` in the variance.
pub(crate) fn mean_se(xs: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Per-method mean FDP and ETP with Monte Carlo standard errors.
pub fn summarize(metrics: &[RepMetrics], methods: &[Method]) -> Vec<MethodSummary> {
    methods
        .iter()
        .map(|&method| {
            let rows: Vec<&RepMetrics> = metrics.iter().filter(|r| r.method == method).collect();
            let (mean_fdp, se_fdp) = mean_se(rows.iter().map(|r| r.fdp));
            let (mean_etp, se_etp) = mean_se(rows.iter().map(|r| r.etp as f64));
            MethodSummary {
                method,
                reps: rows.len(),
                mean_fdp,
                mean_etp,
                se_fdp,
                se_etp,
            }
        })
        .collect()
}
