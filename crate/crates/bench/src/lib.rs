//! Fixtures shared by the benchmarks.

use irt_core::statdist::{rng_stream, RngStream};
use irt_core::StudyTriplet;

fn draws(n: usize, seed: u64, f: impl Fn(&mut RngStream) -> f64) -> Vec<f64> {
    let mut rng = rng_stream(seed, 0);
    (0..n).map(|_| f(&mut rng)).collect()
}

/// `m` e-values, mostly small with a heavy upper tail.
pub fn e_values(m: usize, seed: u64) -> Vec<f64> {
    draws(m, seed, |r| {
        let u = r.uniform();
        if u < 0.9 {
            0.0
        } else {
            1.0 / (1.0 - u)
        }
    })
}

/// `m` p-values: 80% uniform, 20% concentrated near zero.
pub fn p_values(m: usize, seed: u64) -> Vec<f64> {
    draws(m, seed, |r| {
        let u = r.uniform();
        if r.uniform() < 0.2 {
            u * 1e-3
        } else {
            u
        }
    })
}

/// `d` full-coverage studies over `m` hypotheses, each rejecting about 10%.
pub fn studies(m: usize, d: usize, seed: u64) -> Vec<StudyTriplet> {
    let mut rng = rng_stream(seed, 1);
    let ids: Vec<usize> = (0..m).collect();
    (0..d)
        .map(|j| {
            let dec: Vec<u8> = (0..m).map(|_| u8::from(rng.uniform() < 0.1)).collect();
            StudyTriplet::from_indices(format!("s{j}"), 0.05, &ids, &dec)
        })
        .collect()
}
