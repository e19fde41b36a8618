//! Command-line front end: `fuse`, `calibrate`, `simulate` and `bh`.
//!
//! Exit codes are a stable contract: 0 on success, 1 when a file cannot be
//! read or written, 2 for anything wrong with the inputs or flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use irt_core::io::{self, ResultMeta, ResultTable, Universe, UniverseSize};
use irt_core::sim::{run_scenario, GridKey, Method, ScenarioConfig};
use irt_core::{AggregationMode, Diagnostic, Error, FusionProblem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Environment variable that caps the simulation worker count.
pub const THREADS_ENV: &str = "IRT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "irt",
    version,
    about = "Fuse multiple-testing decisions across studies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse per-study decision triplets and run e-BH.
    Fuse(FuseArgs),
    /// Calibrate per-study p-values to e-values, aggregate and run e-BH.
    Calibrate(CalibrateArgs),
    /// Run a simulation scenario over a parameter grid.
    Simulate(SimulateArgs),
    /// Benjamini-Hochberg on a flat list of p-values.
    Bh(BhArgs),
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Triplet files, one study each.
    #[arg(long, required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Universe size, or `auto` to infer it from the inputs.
    #[arg(long, default_value = "auto", value_parser = parse_universe)]
    pub m: UniverseSize,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value = "agg")]
    pub mode: AggregationMode,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub pvalues: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value = "agg")]
    pub mode: AggregationMode,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
    pub scenario: u8,
    /// Repetitions per grid point (scenario default if omitted).
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `key=v1,v2,...` with key one of d, rho, K, eta.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(GridKey, Vec<f64>)>,
    /// Comma-separated method names (scenario default if omitted).
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    /// Long-format table; the summary goes to `<stem>.summary.csv`.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BhArgs {
    /// Whitespace- or comma-separated p-values.
    #[arg(long)]
    pub pvalues: PathBuf,
    #[arg(long)]
    pub alpha: f64,
}

fn parse_universe(s: &str) -> Result<UniverseSize, String> {
    if s == "auto" {
        return Ok(UniverseSize::Auto);
    }
    s.parse::<usize>()
        .map(UniverseSize::Fixed)
        .map_err(|_| format!("expected a positive integer or 'auto', got '{s}'"))
}

fn parse_grid(s: &str) -> Result<(GridKey, Vec<f64>), String> {
    let (key, values) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=v1,v2,..., got '{s}'"))?;
    let key: GridKey = key.parse().map_err(|e: Error| e.to_string())?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("grid value '{v}' is not a number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("grid needs at least one value".into());
    }
    Ok((key, values))
}

/// A failure already classified by exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub lines: Vec<String>,
}

impl Failure {
    fn from_core(err: Error, universe: Option<&Universe>) -> Self {
        match err {
            Error::Io { .. } => Failure {
                code: EXIT_IO,
                lines: vec![format!("error: {err}")],
            },
            Error::Validation(diags) => Failure {
                code: EXIT_INVALID,
                lines: diags
                    .iter()
                    .filter(|d| d.is_error())
                    .map(|d| render(d, universe))
                    .collect(),
            },
            other => Failure {
                code: EXIT_INVALID,
                lines: vec![format!("error: {other}")],
            },
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::from_core(err, None)
    }
}

/// Diagnostic line with 1-based ids (and names, when the inputs used them).
fn render(d: &Diagnostic, universe: Option<&Universe>) -> String {
    let level = if d.is_error() { "error" } else { "warning" };
    let mut msg = d.message(1);
    if let (Some(u), Some(h)) = (universe, d.hypothesis()) {
        if u.names.as_ref().is_some_and(|n| h.0 < n.len()) {
            msg.push_str(&format!(" ({})", u.label(h)));
        }
    }
    match &d.study {
        Some(s) => format!("{level}: study '{s}' ({}): {msg}", d.field),
        None => format!("{level}: ({}): {msg}", d.field),
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Fuse(a) => fuse(&a, out, err),
        Command::Calibrate(a) => calibrate(&a, out),
        Command::Simulate(a) => simulate(&a, out),
        Command::Bh(a) => bh(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            for line in &f.lines {
                let _ = writeln!(err, "{line}");
            }
            f.code
        }
    }
}

fn write_result(output: &Path, table: &ResultTable, meta: &ResultMeta) -> Result<(), Failure> {
    io::atomic_write(output, table.to_csv().as_bytes())?;
    io::atomic_write(&io::meta_path(output), meta.to_json().as_bytes())?;
    Ok(())
}

fn report(out: &mut dyn Write, meta: &ResultMeta, output: &Path) {
    let _ = match meta.threshold {
        Some(t) => writeln!(
            out,
            "rejected {} of {} hypotheses (threshold {t}); wrote {}",
            meta.k_alpha,
            meta.m,
            output.display()
        ),
        None => writeln!(
            out,
            "rejected 0 of {} hypotheses; wrote {}",
            meta.m,
            output.display()
        ),
    };
}

pub fn fuse(args: &FuseArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let files = args
        .inputs
        .iter()
        .map(|p| io::read_triplet_file(p))
        .collect::<irt_core::Result<Vec<_>>>()?;
    let (studies, universe) = io::resolve_triplets(&files, args.m)?;
    let problem = FusionProblem {
        m: universe.m,
        studies,
        alpha: args.alpha,
    };
    let outcome =
        irt_core::fuse(&problem, args.mode).map_err(|e| Failure::from_core(e, Some(&universe)))?;
    for w in &outcome.warnings {
        let _ = writeln!(err, "{}", render(w, Some(&universe)));
    }
    let table = ResultTable::build("e_agg", &outcome.aggregated, &outcome.rejection, &universe);
    let meta = ResultMeta::new(args.mode, universe.m, &outcome.rejection);
    write_result(&args.output, &table, &meta)?;
    report(out, &meta, &args.output);
    Ok(())
}

pub fn calibrate(args: &CalibrateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let records = io::read_pvalue_file(&args.pvalues)?;
    let (table, universe) = io::resolve_pvalues(&records, UniverseSize::Auto)?;
    let cov = table.coverage(universe.m);
    let agg = irt_core::calibrate::p2e_evidence(&table, &cov, args.mode)?;
    let rejection = irt_core::ebh(&agg.values, args.alpha)?;
    let result = ResultTable::build("e_p2e", &agg, &rejection, &universe);
    let meta = ResultMeta::new(args.mode, universe.m, &rejection);
    write_result(&args.output, &result, &meta)?;
    report(out, &meta, &args.output);
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure {
            code: EXIT_INVALID,
            lines: vec![format!(
                "error: {THREADS_ENV} must be a positive integer, got '{v}'"
            )],
        })?;
    // A second call in the same process (tests) finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    configure_threads()?;
    let mut base = ScenarioConfig::scenario(args.scenario)?;
    base.seed = args.seed;
    if let Some(r) = args.reps {
        base.reps = r;
    }
    if let Some(methods) = &args.methods {
        base.methods = methods.clone();
    }
    let points = match &args.grid {
        Some((key, values)) => {
            let mut configs = Vec::with_capacity(values.len());
            for &v in values {
                let mut c = base.clone();
                c.set_grid(*key, v)?;
                c.validate()?;
                configs.push(c);
            }
            configs
        }
        None => {
            base.validate()?;
            vec![base]
        }
    };

    let mut long = Vec::with_capacity(points.len());
    let mut summary = Vec::with_capacity(points.len());
    for c in &points {
        let run = run_scenario(c)?;
        long.push((c.grid_value(), run.metrics));
        summary.push((c.grid_value(), run.summary));
    }
    let summary_path = io::summary_path(&args.output);
    io::atomic_write(&args.output, io::long_table_csv(&long).as_bytes())?;
    io::atomic_write(&summary_path, io::summary_table_csv(&summary).as_bytes())?;
    let _ = writeln!(
        out,
        "scenario {}: {} grid point(s) x {} reps; wrote {} and {}",
        args.scenario,
        points.len(),
        points[0].reps,
        args.output.display(),
        summary_path.display()
    );
    Ok(())
}

pub fn bh(args: &BhArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.pvalues).map_err(|e| Error::Io {
        path: args.pvalues.clone(),
        source: e,
    })?;
    let p = io::parse_flat_pvalues(&text, &args.pvalues)?;
    let rejection = irt_core::bh(&p, args.alpha)?;
    for h in &rejection.rejected {
        let _ = writeln!(out, "{}", h.one_based());
    }
    Ok(())
}
