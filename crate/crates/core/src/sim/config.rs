use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::statdist::EquicorrSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Irt,
    IrtStar,
    P2e,
    P2eStar,
    Naive,
    Fisher,
    Hm,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Irt,
        Method::IrtStar,
        Method::P2e,
        Method::P2eStar,
        Method::Naive,
        Method::Fisher,
        Method::Hm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Irt => "IRT",
            Method::IrtStar => "IRT_STAR",
            Method::P2e => "P2E",
            Method::P2eStar => "P2E_STAR",
            Method::Naive => "NAIVE",
            Method::Fisher => "FISHER",
            Method::Hm => "HM",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace(['-', '*'], "_");
        Ok(match norm.as_str() {
            "IRT" => Method::Irt,
            "IRT_STAR" | "IRT_" => Method::IrtStar,
            "P2E" => Method::P2e,
            "P2E_STAR" | "P2E_" => Method::P2eStar,
            "NAIVE" => Method::Naive,
            "FISHER" => Method::Fisher,
            "HM" => Method::Hm,
            _ => return Err(Error::invalid(format!("unknown method '{s}'"))),
        })
    }
}

/// Per-study FDR level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaPolicy {
    Constant(f64),
    /// 0.05 for `m_j ≤ 600`, 0.03 for `600 < m_j ≤ 800`, 0.01 above.
    SizeBracket,
}

impl AlphaPolicy {
    pub fn level(&self, m_j: usize) -> f64 {
        match *self {
            AlphaPolicy::Constant(a) => a,
            AlphaPolicy::SizeBracket => {
                if m_j <= 600 {
                    0.05
                } else if m_j <= 800 {
                    0.03
                } else {
                    0.01
                }
            }
        }
    }
}

/// How study data are generated around the common means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Design {
    /// Independent `N(μ_i, σ_j²)` with `σ_j ~ U(lo, hi)` per repetition.
    Heteroscedastic { sigma_lo: f64, sigma_hi: f64 },
    /// Unit variance, equicorrelated across studies.
    StudyCorrelated { rho: f64 },
    /// Unit variance, Kronecker-structured correlation.
    Kronecker { rho_study: f64, rho_hyp: f64 },
    /// As `Heteroscedastic`, but each non-null is shifted in exactly `k`
    /// randomly chosen studies and is pure noise elsewhere.
    SparseSignal {
        k: usize,
        sigma_lo: f64,
        sigma_hi: f64,
    },
    /// `n_i` uniform on `[⌈n_max·η⌉, n_max]`; hypothesis `i` is tested by
    /// `n_i` studies drawn without replacement.
    VaryingCoverage { n_max: usize, eta: f64 },
    /// `m_j` uniform on `[⌈m_max·η⌉, m_max]`; study `j` tests `m_j`
    /// hypotheses drawn without replacement.
    VaryingStudySize { m_max: usize, eta: f64 },
}

/// The single parameter swept by a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKey {
    D,
    Rho,
    K,
    Eta,
}

impl FromStr for GridKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "d" => Ok(GridKey::D),
            "rho" => Ok(GridKey::Rho),
            "K" | "k" => Ok(GridKey::K),
            "eta" => Ok(GridKey::Eta),
            other => Err(Error::invalid(format!("unknown grid key '{other}'"))),
        }
    }
}

impl fmt::Display for GridKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridKey::D => "d",
            GridKey::Rho => "rho",
            GridKey::K => "K",
            GridKey::Eta => "eta",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: u8,
    pub m: usize,
    pub d: usize,
    pub alpha: f64,
    pub alpha_j: AlphaPolicy,
    pub reps: usize,
    pub seed: u64,
    pub design: Design,
    pub methods: Vec<Method>,
}

impl ScenarioConfig {
    /// Default parameterization of scenario `1..=6` with `m = 1000`.
    pub fn scenario(scenario: u8) -> Result<Self> {
        use Method::*;
        let hetero = Design::Heteroscedastic {
            sigma_lo: 0.75,
            sigma_hi: 2.0,
        };
        let (d, alpha, alpha_j, design, methods) = match scenario {
            1 => (
                10,
                0.1,
                AlphaPolicy::Constant(0.01),
                hetero,
                vec![Irt, P2e, Naive, Fisher],
            ),
            2 => (
                5,
                0.1,
                AlphaPolicy::Constant(0.01),
                Design::StudyCorrelated { rho: 0.0 },
                vec![Irt, P2e, Naive, Fisher, Hm],
            ),
            3 => (
                10,
                0.1,
                AlphaPolicy::Constant(0.01),
                Design::Kronecker {
                    rho_study: 0.7,
                    rho_hyp: 0.5,
                },
                vec![Irt, P2e, Naive, Fisher, Hm],
            ),
            4 => (
                30,
                0.1,
                AlphaPolicy::Constant(0.01),
                Design::SparseSignal {
                    k: 15,
                    sigma_lo: 0.75,
                    sigma_hi: 2.0,
                },
                vec![Irt, P2e, Naive, Fisher],
            ),
            5 => (
                30,
                0.1,
                AlphaPolicy::Constant(0.01),
                Design::VaryingCoverage {
                    n_max: 20,
                    eta: 0.5,
                },
                vec![Irt, IrtStar, P2e, P2eStar, Naive, Fisher],
            ),
            6 => (
                10,
                0.15,
                AlphaPolicy::SizeBracket,
                Design::VaryingStudySize {
                    m_max: 900,
                    eta: 0.35,
                },
                vec![Irt, IrtStar, P2e, P2eStar],
            ),
            other => {
                return Err(Error::invalid(format!(
                    "scenario must be between 1 and 6, got {other}"
                )))
            }
        };
        Ok(ScenarioConfig {
            scenario,
            m: 1000,
            d,
            alpha,
            alpha_j,
            reps: 500,
            seed: 0,
            design,
            methods,
        })
    }

    /// The parameter this scenario sweeps.
    pub fn grid_key(&self) -> GridKey {
        match self.scenario {
            1 | 3 => GridKey::D,
            2 => GridKey::Rho,
            4 => GridKey::K,
            _ => GridKey::Eta,
        }
    }

    /// Current value of the swept parameter.
    pub fn grid_value(&self) -> f64 {
        match (self.grid_key(), &self.design) {
            (GridKey::Rho, Design::StudyCorrelated { rho }) => *rho,
            (GridKey::K, Design::SparseSignal { k, .. }) => *k as f64,
            (GridKey::Eta, Design::VaryingCoverage { eta, .. })
            | (GridKey::Eta, Design::VaryingStudySize { eta, .. }) => *eta,
            _ => self.d as f64,
        }
    }

    /// Set one grid parameter; rejects keys the scenario does not sweep.
    pub fn set_grid(&mut self, key: GridKey, value: f64) -> Result<()> {
        if key != self.grid_key() {
            return Err(Error::invalid(format!(
                "scenario {} sweeps '{}', not '{key}'",
                self.scenario,
                self.grid_key()
            )));
        }
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v < 1e9 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(format!(
                    "{key} must be a non-negative integer, got {v}"
                )))
            }
        };
        match (key, &mut self.design) {
            (GridKey::D, _) => self.d = as_count(value)?,
            (GridKey::Rho, Design::StudyCorrelated { rho }) => *rho = value,
            (GridKey::K, Design::SparseSignal { k, .. }) => *k = as_count(value)?,
            (GridKey::Eta, Design::VaryingCoverage { eta, .. })
            | (GridKey::Eta, Design::VaryingStudySize { eta, .. }) => *eta = value,
            _ => unreachable!("grid key matched scenario above"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.m == 0 || self.d == 0 {
            return bad(format!(
                "m and d must be positive (m = {}, d = {})",
                self.m, self.d
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} not in (0, 1)", self.alpha));
        }
        if let AlphaPolicy::Constant(a) = self.alpha_j {
            if !(a > 0.0 && a < 1.0) {
                return bad(format!("study alpha {a} not in (0, 1)"));
            }
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        match self.design {
            Design::Heteroscedastic { sigma_lo, sigma_hi }
            | Design::SparseSignal {
                sigma_lo, sigma_hi, ..
            } => {
                if !(sigma_lo > 0.0 && sigma_hi >= sigma_lo && sigma_hi.is_finite()) {
                    return bad(format!("invalid sigma range ({sigma_lo}, {sigma_hi})"));
                }
                if let Design::SparseSignal { k, .. } = self.design {
                    if k > self.d {
                        return bad(format!("K = {k} exceeds d = {}", self.d));
                    }
                }
            }
            Design::StudyCorrelated { rho } => {
                EquicorrSpec::new(self.d, rho)?;
            }
            Design::Kronecker { rho_study, rho_hyp } => {
                EquicorrSpec::new(self.d, rho_study)?;
                EquicorrSpec::new(self.m, rho_hyp)?;
            }
            Design::VaryingCoverage { n_max, eta } => {
                if n_max == 0 || n_max > self.d {
                    return bad(format!("n = {n_max} must be in [1, d = {}]", self.d));
                }
                if !(eta > 0.0 && eta <= 1.0) {
                    return bad(format!("eta {eta} not in (0, 1]"));
                }
            }
            Design::VaryingStudySize { m_max, eta } => {
                if m_max == 0 || m_max > self.m {
                    return bad(format!("m_(1) = {m_max} must be in [1, m = {}]", self.m));
                }
                if !(eta > 0.0 && eta <= 1.0) {
                    return bad(format!("eta {eta} not in (0, 1]"));
                }
            }
        }
        Ok(())
    }
}

/// `⌈size·η⌉`, clamped to `[1, size]`, ignoring float noise in the product.
pub(crate) fn lower_bound(size: usize, eta: f64) -> usize {
    ((size as f64 * eta - 1e-9).ceil() as usize).clamp(1, size)
}
