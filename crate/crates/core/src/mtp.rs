//! Step-up thresholding: e-BH on e-values and BH on p-values.
//!
//! Sorting is by value with ascending original index as tie-break, so output
//! is deterministic. The final rejection sets are defined by a cutoff
//! (`e_i ≥ m/(α·k)` or `p_i ≤ p_(k)`), which treats ties uniformly.

use crate::error::{Error, Result};
use crate::types::{HypothesisId, TruthVector};

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionSet {
    pub alpha: f64,
    pub k_alpha: usize,
    /// Sorted ascending.
    pub rejected: Vec<HypothesisId>,
    /// Cutoff applied; `None` when nothing was rejected.
    pub threshold: Option<f64>,
}

impl RejectionSet {
    pub fn empty(alpha: f64) -> Self {
        RejectionSet {
            alpha,
            k_alpha: 0,
            rejected: Vec::new(),
            threshold: None,
        }
    }

    pub fn len(&self) -> usize {
        self.rejected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rejected.is_empty()
    }

    pub fn contains(&self, id: HypothesisId) -> bool {
        self.rejected.binary_search(&id).is_ok()
    }

    /// Dense 0/1 mask over a universe of size `m`.
    pub fn mask(&self, m: usize) -> Vec<bool> {
        let mut out = vec![false; m];
        for h in &self.rejected {
            out[h.0] = true;
        }
        out
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha {alpha} not in (0, 1)")))
    }
}

/// The e-BH cutoff for threshold index `k`. Shared by the search and the
/// final selection so both compare against the same rounded value.
#[inline]
pub fn ebh_cutoff(m: usize, k: usize, alpha: f64) -> f64 {
    m as f64 / (k as f64 * alpha)
}

/// e-BH at level `alpha`.
///
/// `+∞` is allowed and ranks above every finite value.
pub fn ebh(e_values: &[f64], alpha: f64) -> Result<RejectionSet> {
    check_alpha(alpha)?;
    if let Some((i, e)) = e_values
        .iter()
        .enumerate()
        .find(|(_, e)| e.is_nan() || **e < 0.0)
    {
        return Err(Error::invalid(format!(
            "e-value {e} at position {i} is negative or NaN"
        )));
    }
    let m = e_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| e_values[b].total_cmp(&e_values[a]).then(a.cmp(&b)));

    let k = (1..=m)
        .rev()
        .find(|&k| e_values[order[k - 1]] >= ebh_cutoff(m, k, alpha))
        .unwrap_or(0);
    if k == 0 {
        return Ok(RejectionSet::empty(alpha));
    }
    let cutoff = ebh_cutoff(m, k, alpha);
    let rejected = (0..m)
        .filter(|&i| e_values[i] >= cutoff)
        .map(HypothesisId)
        .collect();
    Ok(RejectionSet {
        alpha,
        k_alpha: k,
        rejected,
        threshold: Some(cutoff),
    })
}

/// Benjamini–Hochberg at level `alpha`.
pub fn bh(p_values: &[f64], alpha: f64) -> Result<RejectionSet> {
    check_alpha(alpha)?;
    if let Some((i, p)) = p_values
        .iter()
        .enumerate()
        .find(|(_, p)| !(**p >= 0.0 && **p <= 1.0))
    {
        return Err(Error::invalid(format!(
            "p-value {p} at position {i} outside [0, 1]"
        )));
    }
    Ok(bh_unchecked(p_values, alpha))
}

pub(crate) fn bh_unchecked(p_values: &[f64], alpha: f64) -> RejectionSet {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let mf = m as f64;
    let k = (1..=m)
        .rev()
        .find(|&k| p_values[order[k - 1]] <= k as f64 * alpha / mf)
        .unwrap_or(0);
    if k == 0 {
        return RejectionSet::empty(alpha);
    }
    let cutoff = p_values[order[k - 1]];
    let rejected = (0..m)
        .filter(|&i| p_values[i] <= cutoff)
        .map(HypothesisId)
        .collect();
    RejectionSet {
        alpha,
        k_alpha: k,
        rejected,
        threshold: Some(cutoff),
    }
}

/// Realized false discovery proportion and true-positive count.
pub fn fdp_etp(rejected: &RejectionSet, truth: &TruthVector) -> (f64, usize) {
    let tp = rejected
        .rejected
        .iter()
        .filter(|&&h| truth.is_non_null(h))
        .count();
    let r = rejected.len();
    let fdp = (r - tp) as f64 / r.max(1) as f64;
    (fdp, tp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(v: &[usize]) -> Vec<HypothesisId> {
        v.iter().copied().map(HypothesisId).collect()
    }

    #[test]
    fn ebh_hand_enumeration() {
        let r = ebh(&[8.0, 4.0, 2.0, 0.0], 0.5).unwrap();
        assert_eq!(r.k_alpha, 2);
        assert_eq!(r.rejected, ids(&[0, 1]));
        assert_eq!(r.threshold, Some(4.0));
    }

    #[test]
    fn ebh_all_zero() {
        let r = ebh(&[0.0; 7], 0.2).unwrap();
        assert_eq!(r, RejectionSet::empty(0.2));
    }

    #[test]
    fn ebh_single_hypothesis() {
        assert_eq!(ebh(&[20.0], 0.05).unwrap().rejected, ids(&[0]));
        assert!(ebh(&[19.99], 0.05).unwrap().is_empty());
    }

    #[test]
    fn ebh_infinity_always_rejected() {
        let r = ebh(&[0.0, f64::INFINITY, 0.0], 0.01).unwrap();
        assert!(r.k_alpha >= 1);
        assert_eq!(r.rejected, ids(&[1]));
    }

    #[test]
    fn ebh_argument_errors() {
        assert!(ebh(&[1.0], 0.0).is_err());
        assert!(ebh(&[1.0], 1.0).is_err());
        assert!(ebh(&[-1.0], 0.1).is_err());
        assert!(ebh(&[f64::NAN], 0.1).is_err());
    }

    #[test]
    fn bh_hand_enumeration() {
        let r = bh(&[0.01, 0.02, 0.9, 0.9], 0.1).unwrap();
        assert_eq!(r.k_alpha, 2);
        assert_eq!(r.rejected, ids(&[0, 1]));
        assert_eq!(r.threshold, Some(0.02));
    }

    #[test]
    fn bh_trivial_cases() {
        assert!(bh(&[1.0; 5], 0.1).unwrap().is_empty());
        assert_eq!(bh(&[0.04], 0.05).unwrap().rejected, ids(&[0]));
        assert!(bh(&[1.5], 0.05).is_err());
        assert!(bh(&[0.5], -0.1).is_err());
    }

    #[test]
    fn fdp_etp_cases() {
        let truth = TruthVector(vec![true, false, true, false]);
        assert_eq!(fdp_etp(&RejectionSet::empty(0.1), &truth), (0.0, 0));
        let mut r = RejectionSet::empty(0.1);
        r.rejected = ids(&[0, 1]);
        assert_eq!(fdp_etp(&r, &truth), (0.5, 1));
        r.rejected = ids(&[0, 2]);
        assert_eq!(fdp_etp(&r, &truth), (0.0, 2));
    }

    /// Definition scan: try every k, keep the largest feasible one, then
    /// select by cutoff. Independent of the sort in `ebh`.
    fn ebh_oracle(e: &[f64], alpha: f64) -> Vec<usize> {
        let m = e.len();
        let mut best = 0;
        for k in 1..=m {
            let cutoff = ebh_cutoff(m, k, alpha);
            let at_least = e.iter().filter(|&&x| x >= cutoff).count();
            // the k-th largest meets the cutoff iff at least k values do
            if at_least >= k {
                best = k;
            }
        }
        if best == 0 {
            return vec![];
        }
        let cutoff = ebh_cutoff(m, best, alpha);
        (0..m).filter(|&i| e[i] >= cutoff).collect()
    }

    fn bh_oracle(p: &[f64], alpha: f64) -> Vec<usize> {
        let m = p.len();
        let mut best = 0;
        for k in 1..=m {
            let bound = k as f64 * alpha / m as f64;
            if p.iter().filter(|&&x| x <= bound).count() >= k {
                best = k;
            }
        }
        if best == 0 {
            return vec![];
        }
        let bound = best as f64 * alpha / m as f64;
        (0..m).filter(|&i| p[i] <= bound).collect()
    }

    fn e_value() -> impl Strategy<Value = f64> {
        prop_oneof![
            3 => 0.0f64..60.0,
            1 => Just(0.0),
            1 => (0usize..6).prop_map(|i| [1.0, 2.0, 5.0, 10.0, 20.0, 40.0][i]),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn ebh_matches_definition_scan(
            e in prop::collection::vec(e_value(), 1..=20),
            alpha in 0.01f64..0.99,
        ) {
            let r = ebh(&e, alpha).unwrap();
            let got: Vec<usize> = r.rejected.iter().map(|h| h.0).collect();
            prop_assert_eq!(&got, &ebh_oracle(&e, alpha));
            prop_assert_eq!(r.len(), r.k_alpha);
            if let Some(t) = r.threshold {
                for (i, &x) in e.iter().enumerate() {
                    prop_assert_eq!(r.contains(HypothesisId(i)), x >= t);
                }
            }
        }

        #[test]
        fn bh_matches_definition_scan(
            p in prop::collection::vec(prop_oneof![3 => 0.0f64..=1.0, 1 => 0.0f64..0.05], 1..=20),
            alpha in 0.01f64..0.99,
        ) {
            let got: Vec<usize> = bh(&p, alpha).unwrap().rejected.iter().map(|h| h.0).collect();
            prop_assert_eq!(got, bh_oracle(&p, alpha));
        }

        #[test]
        fn ebh_monotone_in_alpha(
            e in prop::collection::vec(e_value(), 1..=30),
            a in 0.01f64..0.98,
            b in 0.01f64..0.98,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let small = ebh(&e, lo).unwrap();
            let large = ebh(&e, hi).unwrap();
            prop_assert!(small.rejected.iter().all(|h| large.contains(*h)));
        }

        #[test]
        fn fdp_etp_bounds(
            truth in prop::collection::vec(any::<bool>(), 1..40),
            picks in prop::collection::vec(any::<bool>(), 40),
        ) {
            let m = truth.len();
            let mut r = RejectionSet::empty(0.1);
            r.rejected = (0..m).filter(|&i| picks[i]).map(HypothesisId).collect();
            let (fdp, etp) = fdp_etp(&r, &TruthVector(truth));
            prop_assert!((0.0..=1.0).contains(&fdp));
            prop_assert!(etp <= r.len());
        }
    }
}
