use rand::seq::index;
use rand::Rng;

use super::config::{lower_bound, Design, ScenarioConfig};
use crate::calibrate::{PValueTable, StudyPValues};
use crate::error::Result;
use crate::mtp::bh_unchecked;
use crate::statdist::{
    rng_stream, sample_kronecker_noise, two_sided_p_unchecked, RngStream, SampleMatrix,
};
use crate::types::{HypothesisId, StudyTriplet, TruthVector};

/// Everything one repetition produces before any fusion method runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RepData {
    pub truth: TruthVector,
    pub means: Vec<f64>,
    pub studies: Vec<StudyTriplet>,
    pub pvalues: PValueTable,
}

/// Draw `θ` and `μ` from the three-component mixture.
///
/// Component 0 (probability 0.8) is a null with `μ = 0` exactly; components
/// 1 and 2 (0.1 each) are non-nulls with `μ ~ N(3, 1)` and `μ ~ N(−3, 1)`.
/// Two variates are consumed per hypothesis regardless of the component.
pub fn draw_truth_and_means(m: usize, rng: &mut RngStream) -> (TruthVector, Vec<f64>) {
    let mut truth = Vec::with_capacity(m);
    let mut means = Vec::with_capacity(m);
    for _ in 0..m {
        let u = rng.uniform();
        let z = rng.standard_normal();
        let (theta, mu) = if u < 0.8 {
            (false, 0.0)
        } else if u < 0.9 {
            (true, 3.0 + z)
        } else {
            (true, -3.0 + z)
        };
        truth.push(theta);
        means.push(mu);
    }
    (TruthVector(truth), means)
}

fn uniform_count(rng: &mut RngStream, lo: usize, hi: usize) -> usize {
    rng.random_range(lo as u64..=hi as u64) as usize
}

fn iid_noise(m: usize, d: usize, rng: &mut RngStream) -> SampleMatrix {
    SampleMatrix {
        rows: m,
        cols: d,
        data: (0..m * d).map(|_| rng.standard_normal()).collect(),
    }
}

/// Generate the study data of repetition `rep` and run each study's BH.
pub fn generate_rep(config: &ScenarioConfig, rep: u64) -> Result<RepData> {
    let (m, d) = (config.m, config.d);
    let mut rng = rng_stream(config.seed, rep);
    let (truth, means) = draw_truth_and_means(m, &mut rng);

    let mut sigma = vec![1.0; d];
    // signal[i*d + j]: whether study j observes hypothesis i's shift
    let mut signal: Option<Vec<bool>> = None;
    // tested[j]: hypotheses in study j, ascending
    let mut tested: Vec<Vec<usize>> = Vec::new();

    let noise = match config.design {
        Design::Heteroscedastic { sigma_lo, sigma_hi } => {
            sigma
                .iter_mut()
                .for_each(|s| *s = rng.uniform_range(sigma_lo, sigma_hi));
            iid_noise(m, d, &mut rng)
        }
        Design::StudyCorrelated { rho } => sample_kronecker_noise(m, d, rho, 0.0, &mut rng)?,
        Design::Kronecker { rho_study, rho_hyp } => {
            sample_kronecker_noise(m, d, rho_study, rho_hyp, &mut rng)?
        }
        Design::SparseSignal {
            k,
            sigma_lo,
            sigma_hi,
        } => {
            sigma
                .iter_mut()
                .for_each(|s| *s = rng.uniform_range(sigma_lo, sigma_hi));
            let noise = iid_noise(m, d, &mut rng);
            let mut mask = vec![false; m * d];
            for i in (0..m).filter(|&i| truth.0[i]) {
                for j in index::sample(&mut rng, d, k) {
                    mask[i * d + j] = true;
                }
            }
            signal = Some(mask);
            noise
        }
        Design::VaryingCoverage { n_max, eta } => {
            let lo = lower_bound(n_max, eta);
            tested = vec![Vec::new(); d];
            for i in 0..m {
                let n_i = uniform_count(&mut rng, lo, n_max);
                let mut chosen = index::sample(&mut rng, d, n_i).into_vec();
                chosen.sort_unstable();
                for j in chosen {
                    tested[j].push(i);
                }
            }
            iid_noise(m, d, &mut rng)
        }
        Design::VaryingStudySize { m_max, eta } => {
            let lo = lower_bound(m_max, eta);
            tested = (0..d)
                .map(|_| {
                    let m_j = uniform_count(&mut rng, lo, m_max);
                    let mut set = index::sample(&mut rng, m, m_j).into_vec();
                    set.sort_unstable();
                    set
                })
                .collect();
            iid_noise(m, d, &mut rng)
        }
    };
    if tested.is_empty() {
        tested = vec![(0..m).collect(); d];
    }

    let mut studies = Vec::with_capacity(d);
    let mut pstudies = Vec::with_capacity(d);
    for (j, set) in tested.into_iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let p: Vec<f64> = set
            .iter()
            .map(|&i| {
                let shift = match &signal {
                    Some(mask) if !mask[i * d + j] => 0.0,
                    _ => means[i],
                };
                let x = shift + sigma[j] * noise.get(i, j);
                two_sided_p_unchecked(x, sigma[j])
            })
            .collect();
        let alpha_j = config.alpha_j.level(set.len());
        let rejected = bh_unchecked(&p, alpha_j).mask(p.len());
        let ids: Vec<HypothesisId> = set.into_iter().map(HypothesisId).collect();
        let study_id = format!("study{}", j + 1);
        pstudies.push(StudyPValues::new(study_id.clone(), ids.clone(), p));
        studies.push(StudyTriplet::new(study_id, alpha_j, ids, rejected));
    }

    Ok(RepData {
        truth,
        means,
        studies,
        pvalues: PValueTable::new(pstudies),
    })
}
