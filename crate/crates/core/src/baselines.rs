//! Comparison methods: majority vote on decisions, and Fisher or
//! harmonic-mean pooling of p-values followed by BH.
//!
//! None of these carries a fusion-level FDR guarantee under dependence;
//! they exist as benchmarks. The harmonic mean is the raw one, with no
//! asymptotic calibration, and is anti-conservative.

use crate::aggregate::{coverage, CoverageProfile};
use crate::calibrate::PValueTable;
use crate::error::{Error, Result};
use crate::mtp::{bh_unchecked, RejectionSet};
use crate::statdist::chisq_sf;
use crate::types::{HypothesisId, StudyTriplet};

/// Reject `i` when at least half of the studies testing it reject it.
///
/// The returned set uses `alpha = 1` as a sentinel and `k_alpha = |R|`.
pub fn naive_vote(studies: &[StudyTriplet], m: usize) -> RejectionSet {
    let cov = coverage(studies, m);
    let mut votes = vec![0usize; m];
    for s in studies {
        for h in s.rejected() {
            if let Some(v) = votes.get_mut(h.0) {
                *v += 1;
            }
        }
    }
    let rejected: Vec<HypothesisId> = (0..m)
        .filter(|&i| cov.counts[i] > 0 && votes[i] >= cov.counts[i].div_ceil(2))
        .map(HypothesisId)
        .collect();
    RejectionSet {
        alpha: 1.0,
        k_alpha: rejected.len(),
        rejected,
        threshold: None,
    }
}

fn pooled_by(
    pvals: &PValueTable,
    cov: &CoverageProfile,
    init: f64,
    add: impl Fn(f64, f64) -> f64,
    finish: impl Fn(f64, usize) -> f64,
) -> Result<Vec<f64>> {
    let m = cov.m();
    pvals.check(m)?;
    let mut acc = vec![init; m];
    let mut seen = vec![0usize; m];
    for s in &pvals.studies {
        for (h, p) in s.iter() {
            acc[h.0] = add(acc[h.0], p);
            seen[h.0] += 1;
        }
    }
    if seen != cov.counts {
        return Err(Error::Structural(
            "coverage profile does not match the p-value table".into(),
        ));
    }
    Ok(acc
        .into_iter()
        .zip(&cov.counts)
        .map(|(a, &n)| if n == 0 { 1.0 } else { finish(a, n) })
        .collect())
}

/// Fisher-combined p-values; untested hypotheses get 1.
pub fn fisher_pooled(pvals: &PValueTable, cov: &CoverageProfile) -> Result<Vec<f64>> {
    // Accumulate Σ ln p; a zero p-value drives the sum to −∞ and the
    // pooled p-value to 0.
    pooled_by(
        pvals,
        cov,
        0.0,
        |acc, p| acc + libm::log(p),
        |log_sum, n| chisq_sf(-2.0 * log_sum, 2 * n as u32),
    )
}

pub fn fisher_pool(pvals: &PValueTable, cov: &CoverageProfile, alpha: f64) -> Result<RejectionSet> {
    let pooled = fisher_pooled(pvals, cov)?;
    crate::mtp::bh(&pooled, alpha)
}

/// Raw harmonic-mean p-values `n_i / Σ_j 1/p_ij`, clamped to `[0, 1]`.
pub fn hm_pooled(pvals: &PValueTable, cov: &CoverageProfile) -> Result<Vec<f64>> {
    pooled_by(
        pvals,
        cov,
        0.0,
        |acc, p| acc + 1.0 / p,
        |recip_sum, n| (n as f64 / recip_sum).clamp(0.0, 1.0),
    )
}

pub fn hm_pool(pvals: &PValueTable, cov: &CoverageProfile, alpha: f64) -> Result<RejectionSet> {
    let pooled = hm_pooled(pvals, cov)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} not in (0, 1)")));
    }
    Ok(bh_unchecked(&pooled, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibrate::StudyPValues;
    use proptest::prelude::*;

    fn full_table(rows: &[Vec<f64>]) -> PValueTable {
        PValueTable::new(
            rows.iter()
                .enumerate()
                .map(|(j, p)| {
                    StudyPValues::new(
                        format!("s{j}"),
                        (0..p.len()).map(HypothesisId).collect(),
                        p.clone(),
                    )
                })
                .collect(),
        )
    }

    fn voters(d: usize, rejecting: usize) -> Vec<StudyTriplet> {
        (0..d)
            .map(|j| {
                StudyTriplet::from_indices(format!("s{j}"), 0.05, &[0], &[(j < rejecting) as u8])
            })
            .collect()
    }

    #[test]
    fn naive_majority_boundaries() {
        assert_eq!(naive_vote(&voters(3, 2), 1).len(), 1);
        assert_eq!(naive_vote(&voters(3, 1), 1).len(), 0);
        assert_eq!(naive_vote(&voters(3, 0), 1).len(), 0);
        assert_eq!(naive_vote(&voters(4, 2), 1).len(), 1);
        assert_eq!(naive_vote(&voters(4, 1), 1).len(), 0);
        let r = naive_vote(&voters(4, 4), 1);
        assert_eq!((r.alpha, r.k_alpha, r.threshold), (1.0, 1, None));
    }

    #[test]
    fn naive_partial_coverage_and_untested() {
        let studies = vec![
            StudyTriplet::from_indices("a", 0.05, &[0, 1], &[1, 1]),
            StudyTriplet::from_indices("b", 0.05, &[1], &[0]),
            StudyTriplet::from_indices("c", 0.05, &[1], &[0]),
        ];
        let r = naive_vote(&studies, 3);
        // hyp 0: 1 of 1; hyp 1: 1 of 3 (< 2); hyp 2 untested
        assert_eq!(r.rejected, vec![HypothesisId(0)]);
    }

    #[test]
    fn fisher_single_study_is_identity() {
        let p = vec![0.3, 0.01, 1.0, 1e-8];
        let t = full_table(std::slice::from_ref(&p));
        let pooled = fisher_pooled(&t, &t.coverage(4)).unwrap();
        for (a, b) in pooled.iter().zip(&p) {
            assert!((a - b).abs() <= 1e-12 * b.max(1e-300) + 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn fisher_examples() {
        let t = full_table(&[vec![1.0, 0.1, 0.0], vec![1.0, 0.1, 0.5]]);
        let pooled = fisher_pooled(&t, &t.coverage(3)).unwrap();
        assert_eq!(pooled[0], 1.0);
        assert!((pooled[1] - 0.056_051_701_859_880_95).abs() < 1e-12);
        assert_eq!(pooled[2], 0.0);
    }

    #[test]
    fn untested_hypotheses_pool_to_one() {
        let t = PValueTable::new(vec![StudyPValues::new(
            "a",
            vec![HypothesisId(0)],
            vec![0.01],
        )]);
        let c = t.coverage(3);
        assert_eq!(fisher_pooled(&t, &c).unwrap()[1..], [1.0, 1.0]);
        assert_eq!(hm_pooled(&t, &c).unwrap()[1..], [1.0, 1.0]);
    }

    #[test]
    fn harmonic_mean_examples() {
        let t = full_table(&[vec![0.2, 0.01, 0.0], vec![0.2, 1.0, 0.3]]);
        let pooled = hm_pooled(&t, &t.coverage(3)).unwrap();
        assert!((pooled[0] - 0.2).abs() < 1e-15);
        assert!((pooled[1] - 2.0 / 101.0).abs() < 1e-15);
        assert!((pooled[1] - 0.019802).abs() < 1e-6);
        assert_eq!(pooled[2], 0.0);
    }

    #[test]
    fn coverage_mismatch_detected() {
        let t = full_table(&[vec![0.2, 0.3]]);
        let wrong = CoverageProfile {
            counts: vec![2, 2],
            max: 2,
        };
        assert!(matches!(
            fisher_pooled(&t, &wrong),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn pool_then_bh() {
        let t = full_table(&[vec![0.001, 0.5, 0.9], vec![0.002, 0.6, 0.9]]);
        let c = t.coverage(3);
        assert_eq!(
            fisher_pool(&t, &c, 0.05).unwrap().rejected,
            vec![HypothesisId(0)]
        );
        assert_eq!(
            hm_pool(&t, &c, 0.05).unwrap().rejected,
            vec![HypothesisId(0)]
        );
        assert!(hm_pool(&t, &c, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn fisher_pooled_in_unit_interval_and_monotone(
            ps in prop::collection::vec(1e-12f64..=1.0, 1..8),
            which in 0usize..8,
            shrink in 0.0f64..1.0,
        ) {
            let rows: Vec<Vec<f64>> = ps.iter().map(|&p| vec![p]).collect();
            let t = full_table(&rows);
            let base = fisher_pooled(&t, &t.coverage(1)).unwrap()[0];
            prop_assert!((0.0..=1.0).contains(&base));
            let mut smaller = rows.clone();
            let j = which % smaller.len();
            smaller[j][0] *= shrink;
            let t2 = full_table(&smaller);
            let lowered = fisher_pooled(&t2, &t2.coverage(1)).unwrap()[0];
            prop_assert!(lowered <= base * (1.0 + 1e-12));
        }

        #[test]
        fn harmonic_mean_bracketed_by_min(ps in prop::collection::vec(1e-9f64..=1.0, 1..10)) {
            let rows: Vec<Vec<f64>> = ps.iter().map(|&p| vec![p]).collect();
            let t = full_table(&rows);
            let pooled = hm_pooled(&t, &t.coverage(1)).unwrap()[0];
            let min = ps.iter().copied().fold(1.0, f64::min);
            prop_assert!(pooled >= min * (1.0 - 1e-12));
            prop_assert!(pooled <= ps.len() as f64 * min * (1.0 + 1e-12));
        }

        #[test]
        fn naive_is_order_invariant(
            dec in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 1..7),
        ) {
            let studies: Vec<StudyTriplet> = dec
                .iter()
                .enumerate()
                .map(|(j, d)| StudyTriplet::new(format!("s{j}"), 0.05, (0..6).map(HypothesisId).collect(), d.clone()))
                .collect();
            let mut rev = studies.clone();
            rev.reverse();
            prop_assert_eq!(naive_vote(&studies, 6), naive_vote(&rev, 6));
        }
    }
}
