//! File formats.
//!
//! * Triplet file: one JSON object per file with fields `study_id`,
//!   `alpha`, `hypotheses` (1-based integer ids, or string names), and
//!   `decisions` (0/1, same length).
//! * p-value file: a JSON array of `{study_id, alpha?, hypotheses, pvalues}`.
//!   A p-value of exactly 0 is allowed and calibrates to infinite evidence.
//! * Result table: comma-separated, LF line endings, header
//!   `hypothesis_id,n_i,<evidence column>,rank,rejected`, rows in rank
//!   order. A companion `<path>.meta.json` records format version, mode,
//!   alpha, m, `k_alpha` and the threshold (`null` when nothing is
//!   rejected).
//! * Simulation tables: long format `grid_value,method,rep,fdp,etp` and
//!   summary `grid_value,method,mean_fdp,mean_etp,se_fdp,se_etp`.
//!
//! Numbers are written in shortest round-trip decimal. Every writer goes
//! through [`atomic_write`], so a failed run never leaves a truncated file.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregate::{AggregatedEvidence, AggregationMode};
use crate::calibrate::{PValueTable, StudyPValues};
use crate::error::{Error, Result};
use crate::mtp::RejectionSet;
use crate::sim::{MethodSummary, RepMetrics};
use crate::types::{HypothesisId, StudyTriplet};

pub const RESULT_FORMAT_VERSION: u32 = 1;

/// A hypothesis reference as written in input files.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HypothesisRef {
    Id(u64),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletFile {
    pub study_id: String,
    pub alpha: f64,
    pub hypotheses: Vec<HypothesisRef>,
    pub decisions: Vec<u8>,
}

impl TripletFile {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let t: TripletFile =
            serde_json::from_str(text).map_err(|e| Error::parse(path, e.to_string()))?;
        if let Some(bad) = t.decisions.iter().find(|&&d| d > 1) {
            return Err(Error::parse(path, format!("decision {bad} is not 0 or 1")));
        }
        Ok(t)
    }

    /// Canonical serialization: fixed field order, two-space indent,
    /// trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("triplet serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PValueRecord {
    pub study_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub hypotheses: Vec<HypothesisRef>,
    pub pvalues: Vec<f64>,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_triplet_file(path: &Path) -> Result<TripletFile> {
    TripletFile::from_json(&read_text(path)?, path)
}

pub fn read_pvalue_file(path: &Path) -> Result<Vec<PValueRecord>> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::parse(path, e.to_string()))
}

/// Parse a flat list of p-values separated by whitespace or commas.
pub fn parse_flat_pvalues(text: &str, path: &Path) -> Result<Vec<f64>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::parse(path, format!("'{t}' is not a number")))
        })
        .collect()
}

/// Universe size requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniverseSize {
    Auto,
    Fixed(usize),
}

/// Maps file-level hypothesis references to dense internal ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Universe {
    pub m: usize,
    /// Present when inputs used string names; index = internal id.
    pub names: Option<Vec<String>>,
}

impl Universe {
    /// Label used in reports: the name, or the 1-based id.
    pub fn label(&self, id: HypothesisId) -> String {
        match &self.names {
            Some(names) if id.0 < names.len() => names[id.0].clone(),
            _ => id.one_based().to_string(),
        }
    }
}

struct Resolver {
    by_name: HashMap<String, usize>,
    names: Vec<String>,
    numeric: Option<bool>,
    max_id: usize,
}

impl Resolver {
    fn new() -> Self {
        Resolver {
            by_name: HashMap::new(),
            names: Vec::new(),
            numeric: None,
            max_id: 0,
        }
    }

    fn resolve(&mut self, r: &HypothesisRef, source: &str) -> Result<HypothesisId> {
        let numeric = matches!(r, HypothesisRef::Id(_));
        if *self.numeric.get_or_insert(numeric) != numeric {
            return Err(Error::invalid(format!(
                "{source}: inputs mix integer ids and string names"
            )));
        }
        match r {
            HypothesisRef::Id(0) => Err(Error::invalid(format!(
                "{source}: hypothesis ids are 1-based; 0 is not allowed"
            ))),
            HypothesisRef::Id(i) => {
                let i = usize::try_from(*i)
                    .map_err(|_| Error::invalid(format!("{source}: id {i} too large")))?;
                self.max_id = self.max_id.max(i);
                Ok(HypothesisId(i - 1))
            }
            HypothesisRef::Name(n) => {
                let next = self.names.len();
                let idx = *self.by_name.entry(n.clone()).or_insert_with(|| {
                    self.names.push(n.clone());
                    next
                });
                Ok(HypothesisId(idx))
            }
        }
    }

    fn finish(self, size: UniverseSize) -> Result<Universe> {
        let named = self.numeric == Some(false);
        let needed = if named { self.names.len() } else { self.max_id };
        let m = match size {
            UniverseSize::Auto => needed,
            UniverseSize::Fixed(m) if named && m < needed => {
                return Err(Error::invalid(format!(
                    "--m {m} is smaller than the {needed} distinct hypothesis names"
                )))
            }
            // numeric ids beyond a fixed m are reported by validation
            UniverseSize::Fixed(m) => m,
        };
        Ok(Universe {
            m,
            names: named.then_some(self.names),
        })
    }
}

/// Convert parsed triplet files into study triplets over a shared universe.
pub fn resolve_triplets(
    files: &[TripletFile],
    size: UniverseSize,
) -> Result<(Vec<StudyTriplet>, Universe)> {
    let mut resolver = Resolver::new();
    let mut studies = Vec::with_capacity(files.len());
    for f in files {
        let hypotheses = f
            .hypotheses
            .iter()
            .map(|r| resolver.resolve(r, &f.study_id))
            .collect::<Result<Vec<_>>>()?;
        studies.push(StudyTriplet::new(
            f.study_id.clone(),
            f.alpha,
            hypotheses,
            f.decisions.iter().map(|&d| d == 1).collect(),
        ));
    }
    Ok((studies, resolver.finish(size)?))
}

/// Convert p-value records into a [`PValueTable`] over a shared universe.
pub fn resolve_pvalues(
    records: &[PValueRecord],
    size: UniverseSize,
) -> Result<(PValueTable, Universe)> {
    let mut resolver = Resolver::new();
    let mut studies = Vec::with_capacity(records.len());
    for r in records {
        if let Some(a) = r.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::invalid(format!(
                    "study '{}': alpha {a} not in (0, 1)",
                    r.study_id
                )));
            }
        }
        let hypotheses = r
            .hypotheses
            .iter()
            .map(|h| resolver.resolve(h, &r.study_id))
            .collect::<Result<Vec<_>>>()?;
        studies.push(StudyPValues::new(
            r.study_id.clone(),
            hypotheses,
            r.pvalues.clone(),
        ));
    }
    let universe = resolver.finish(size)?;
    let table = PValueTable::new(studies);
    table.check(universe.m)?;
    Ok((table, universe))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub hypothesis: String,
    pub n_i: usize,
    pub evidence: f64,
    pub rank: usize,
    pub rejected: bool,
}

/// Ranked per-hypothesis output of a fusion run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    /// Header of the evidence column, `e_agg` or `e_p2e`.
    pub evidence_column: String,
    pub rows: Vec<ResultRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMeta {
    pub format_version: u32,
    pub mode: String,
    pub alpha: f64,
    pub m: usize,
    pub k_alpha: usize,
    pub threshold: Option<f64>,
}

impl ResultMeta {
    pub fn new(mode: AggregationMode, m: usize, rejection: &RejectionSet) -> Self {
        ResultMeta {
            format_version: RESULT_FORMAT_VERSION,
            mode: mode.as_str().to_owned(),
            alpha: rejection.alpha,
            m,
            k_alpha: rejection.k_alpha,
            threshold: rejection.threshold,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serializes");
        s.push('\n');
        s
    }
}

impl ResultTable {
    /// Rank by evidence (largest first, ties by ascending id).
    pub fn build(
        evidence_column: &str,
        agg: &AggregatedEvidence,
        rejection: &RejectionSet,
        universe: &Universe,
    ) -> Self {
        let m = agg.values.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| agg.values[b].total_cmp(&agg.values[a]).then(a.cmp(&b)));
        let mask = rejection.mask(m);
        let rows = order
            .into_iter()
            .enumerate()
            .map(|(pos, i)| ResultRow {
                hypothesis: universe.label(HypothesisId(i)),
                n_i: agg.coverage.counts[i],
                evidence: agg.values[i],
                rank: pos + 1,
                rejected: mask[i],
            })
            .collect();
        ResultTable {
            evidence_column: evidence_column.to_owned(),
            rows,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        wtr.write_record([
            "hypothesis_id",
            "n_i",
            &self.evidence_column,
            "rank",
            "rejected",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            wtr.write_record([
                r.hypothesis.clone(),
                r.n_i.to_string(),
                r.evidence.to_string(),
                r.rank.to_string(),
                (r.rejected as u8).to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("flush")).expect("utf-8 csv")
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| Error::parse(path, e.to_string()))?
            .clone();
        if headers.len() != 5
            || &headers[0] != "hypothesis_id"
            || &headers[1] != "n_i"
            || &headers[3] != "rank"
            || &headers[4] != "rejected"
        {
            return Err(Error::parse(path, "unexpected result table header"));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let err = |what: &str| Error::parse(path, format!("row {}: bad {what}", line + 1));
            rows.push(ResultRow {
                hypothesis: field(0).to_owned(),
                n_i: field(1).parse().map_err(|_| err("n_i"))?,
                evidence: field(2).parse().map_err(|_| err("evidence"))?,
                rank: field(3).parse().map_err(|_| err("rank"))?,
                rejected: match field(4) {
                    "0" => false,
                    "1" => true,
                    _ => return Err(err("rejected flag")),
                },
            });
        }
        Ok(ResultTable {
            evidence_column: headers[2].to_owned(),
            rows,
        })
    }
}

/// Path of the metadata record that accompanies a result table.
pub fn meta_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// One long-format row per (grid value, method, repetition).
pub fn long_table_csv(rows: &[(f64, Vec<RepMetrics>)]) -> String {
    let mut out = String::from("grid_value,method,rep,fdp,etp\n");
    for (g, metrics) in rows {
        for r in metrics {
            writeln!(out, "{g},{},{},{},{}", r.method, r.rep, r.fdp, r.etp).unwrap();
        }
    }
    out
}

pub fn summary_table_csv(rows: &[(f64, Vec<MethodSummary>)]) -> String {
    let mut out = String::from("grid_value,method,mean_fdp,mean_etp,se_fdp,se_etp\n");
    for (g, summaries) in rows {
        for s in summaries {
            writeln!(
                out,
                "{g},{},{},{},{},{}",
                s.method, s.mean_fdp, s.mean_etp, s.se_fdp, s.se_etp
            )
            .unwrap();
        }
    }
    out
}

/// Summary path derived from the long-table path: `x.csv` → `x.summary.csv`.
pub fn summary_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = output
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    output.with_file_name(format!("{stem}.summary.{ext}"))
}

/// Write `contents` to a temporary file beside `path`, then rename over it.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
