//! End-to-end properties of the decision-based pipeline.

use irt_core::{
    bh, fuse, validate_problem, AggregationMode, FusionProblem, HypothesisId, StudyTriplet,
};
use proptest::prelude::*;

fn study() -> impl Strategy<Value = (f64, Vec<bool>, Vec<bool>)> {
    (
        prop_oneof![Just(0.01), Just(0.05), Just(0.1), 0.001f64..0.5],
        prop::collection::vec(any::<bool>(), 12),
        prop::collection::vec(prop::bool::weighted(0.3), 12),
    )
}

fn problem() -> impl Strategy<Value = FusionProblem> {
    (prop::collection::vec(study(), 1..6), 0.01f64..0.9).prop_map(|(rows, alpha)| {
        let studies = rows
            .into_iter()
            .enumerate()
            .filter_map(|(j, (a, tested, rej))| {
                let ids: Vec<usize> = (0..12).filter(|&i| tested[i]).collect();
                let dec: Vec<u8> = ids.iter().map(|&i| rej[i] as u8).collect();
                (!ids.is_empty())
                    .then(|| StudyTriplet::from_indices(format!("s{j}"), a, &ids, &dec))
            })
            .collect();
        FusionProblem {
            m: 12,
            studies,
            alpha,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn error_free_problems_are_accepted(p in problem()) {
        let diags = validate_problem(&p);
        prop_assume!(!diags.iter().any(|d| d.is_error()));
        for mode in [AggregationMode::Agg, AggregationMode::AggStar] {
            let out = fuse(&p, mode).unwrap();
            prop_assert_eq!(out.warnings.len(), diags.len());
            // untested hypotheses are never rejected
            for h in &out.rejection.rejected {
                prop_assert!(out.aggregated.coverage.count(*h) > 0);
            }
        }
    }

    #[test]
    fn fusion_rejections_grow_with_alpha(p in problem(), lo in 0.01f64..0.5, step in 0.0f64..0.4) {
        prop_assume!(!validate_problem(&p).iter().any(|d| d.is_error()));
        let at = |a: f64| fuse(&FusionProblem { alpha: a, ..p.clone() }, AggregationMode::Agg).unwrap().rejection;
        let small = at(lo);
        let large = at(lo + step);
        for h in &small.rejected {
            prop_assert!(large.contains(*h));
        }
    }

    // One study covering everything, fused at its own level, returns its
    // own rejections; a BH-produced set is reproduced exactly.
    #[test]
    fn single_full_study_round_trips(ps in prop::collection::vec(0.0f64..1.0, 1..40), a in 0.01f64..0.3) {
        let m = ps.len();
        let r = bh(&ps, a).unwrap();
        let dec: Vec<u8> = r.mask(m).into_iter().map(u8::from).collect();
        let ids: Vec<usize> = (0..m).collect();
        let p = FusionProblem { m, studies: vec![StudyTriplet::from_indices("only", a, &ids, &dec)], alpha: a };
        let out = fuse(&p, AggregationMode::Agg).unwrap();
        prop_assert_eq!(&out.rejection.rejected, &r.rejected);
    }
}

#[test]
fn coverage_gap_warns_and_keeps_gap_unrejected() {
    let p = FusionProblem {
        m: 3,
        alpha: 0.5,
        studies: vec![StudyTriplet::from_indices("a", 0.1, &[0, 1], &[1, 1])],
    };
    let out = fuse(&p, AggregationMode::Agg).unwrap();
    assert_eq!(out.warnings.len(), 1);
    assert_eq!(out.aggregated.values[2], 0.0);
    assert!(!out.rejection.contains(HypothesisId(2)));
}

// Found by the round-trip property: m = 27, three rejections, where
// (m/α)/3 used to round one ulp below the cutoff m/(3α).
#[test]
fn single_study_at_own_level_boundary_case() {
    let mut dec = vec![0u8; 27];
    for i in [11, 18, 23] {
        dec[i] = 1;
    }
    let a = 0.25617639355505933;
    let ids: Vec<usize> = (0..27).collect();
    let p = FusionProblem {
        m: 27,
        studies: vec![StudyTriplet::from_indices("only", a, &ids, &dec)],
        alpha: a,
    };
    let out = fuse(&p, AggregationMode::Agg).unwrap();
    assert_eq!(
        out.rejection.rejected,
        [HypothesisId(11), HypothesisId(18), HypothesisId(23)]
    );
}
