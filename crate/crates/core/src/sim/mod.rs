//! Monte Carlo harness for the six simulation designs.
//!
//! Every repetition draws a fresh truth vector and study data from its own
//! random stream (`stream_id = rep`), lets each study run BH at its own
//! level, and then applies every requested fusion method to the resulting
//! decisions or p-values. Repetitions are independent, so they run in
//! parallel and are collected in rep order.

mod config;
mod generate;
mod run;

pub use config::{AlphaPolicy, Design, GridKey, Method, ScenarioConfig};
pub use generate::{draw_truth_and_means, generate_rep, RepData};
pub use run::{
    run_rep, run_scenario, summarize, MethodSummary, RepDiagnostics, RepMetrics, RepOutcome,
    ScenarioRun,
};
