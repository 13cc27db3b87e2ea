//! Experiment runner: config-driven single runs, stochastic replications,
//! rate fits and the complexity-order suite.

pub mod config;
pub mod rates;
pub mod replicate;
pub mod table1;
pub mod trace_io;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gaps::{epsilon_stationarity_certificate, gap_report, Certificate};
use crate::problems::{check_holder, HolderReport, ProblemConstants};
use crate::rng::{child_stream, StreamRole};
use crate::solvers::rscgt::run_rscgt_with_plan;
use crate::solvers::{run_cgt, run_cgt_ls, run_fcgt, Limits, Outcome, RunOptions, RunTrace, ScheduleConstants, StepsizeSchedule};

pub use config::{prepare, AlgorithmKind, Prepared, RunConfig};
pub use rates::{fit_trace, RateFit};
pub use replicate::{replicate, ReplicationReport};
pub use table1::{run_suite, SuiteConfig, Table1Report};

/// Terminal statistics of one run. Every number is either an echo of the
/// configuration or readable from the trace CSV next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub constants: ProblemConstants,
    pub algorithm: String,
    pub schedule: String,
    pub schedule_constants: ScheduleConstants,
    pub outcome: Outcome,
    pub error: Option<String>,
    pub iterations: u64,
    pub terminal_gap: Option<f64>,
    pub best_gap: Option<f64>,
    pub best_k: Option<u64>,
    pub final_psi: f64,
    pub grad_calls: u64,
    pub lmo_calls: u64,
    pub so_calls: u64,
    pub trace_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_fit: Option<RateFit>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub trace: RunTrace,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

pub fn limits_of(prep: &Prepared) -> Limits {
    let a = &prep.config.algorithm;
    Limits {
        max_iters: a.max_iters.unwrap_or(1),
        epsilon: a.epsilon,
        wall_clock: a.wall_clock_secs.map(Duration::from_secs_f64),
    }
}

pub fn run_options(prep: &Prepared) -> RunOptions {
    RunOptions {
        keep_iterates: false,
        monitor_stride: prep.config.algorithm.monitor_stride,
    }
}

/// Runs the configured solver once; `replication` selects the random
/// streams of the stochastic method and is ignored otherwise.
pub fn execute(prep: &Prepared, replication: u64, opts: &RunOptions) -> Result<RunTrace> {
    let limits = limits_of(prep);
    let a = &prep.config.algorithm;
    match (a.name, &a.schedule) {
        (AlgorithmKind::Cgt, s) => run_cgt(&prep.spec, s, &prep.x0, &limits, opts),
        (AlgorithmKind::CgtLs, StepsizeSchedule::LineSearch { gamma, delta }) => {
            run_cgt_ls(&prep.spec, *gamma, *delta, &prep.x0, &limits, opts)
        }
        (AlgorithmKind::Fcgt, StepsizeSchedule::FcgtFolded { q }) => run_fcgt(&prep.spec, *q, &prep.x0, &limits, opts),
        (AlgorithmKind::Rscgt, _) => {
            let (Some(oracle), Some(plan)) = (&prep.oracle, &prep.plan) else {
                return Err(Error::InvalidInput("rscgt config was not prepared with an oracle and plan".into()));
            };
            run_rscgt_with_plan(&prep.spec, oracle, plan, &prep.x0, replication, opts, limits.wall_clock)
        }
        (k, s) => Err(Error::Validation(vec![format!(
            "{} cannot run schedule {}",
            k.name(),
            s.name()
        )])),
    }
}

pub fn summarize(prep: &Prepared, trace: &RunTrace, trace_file: &str, with_fit: bool) -> RunSummary {
    let last = trace.last();
    let rate_fit = if with_fit {
        let series: Vec<(u64, f64)> = trace.records.iter().filter_map(|r| r.g_k.map(|g| (r.k, g))).collect();
        match fit_trace(&series) {
            Ok(f) => Some(f),
            Err(e) => {
                log::warn!("no rate fit: {e}");
                None
            }
        }
    } else {
        None
    };
    RunSummary {
        config: prep.config.clone(),
        constants: prep.spec.constants().clone(),
        algorithm: trace.algorithm.clone(),
        schedule: trace.schedule.clone(),
        schedule_constants: trace.schedule_constants.clone(),
        outcome: trace.outcome,
        error: trace.error.clone(),
        iterations: trace.iterations(),
        terminal_gap: trace.last_gap(),
        best_gap: trace.best_gap(),
        best_k: trace.best_index(),
        final_psi: last.psi,
        grad_calls: last.grad_calls,
        lmo_calls: last.lmo_calls,
        so_calls: last.so_calls,
        trace_file: trace_file.to_string(),
        rate_fit,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Runs once, writes `<stem>.trace.csv` and `<stem>.summary.json` and
/// returns the summary. A solver failure is returned as an error after both
/// files are written.
pub fn run(prep: &Prepared, with_fit: bool) -> Result<RunOutput> {
    let dir = &prep.config.output_dir;
    ensure_dir(dir)?;
    let stem = prep.config.stem();
    let trace_name = format!("{stem}.trace.csv");
    let trace_path = dir.join(&trace_name);
    let summary_path = dir.join(format!("{stem}.summary.json"));
    let trace = execute(prep, 0, &run_options(prep))?;
    trace_io::write_trace(&trace, &trace_path)?;
    let summary = summarize(prep, &trace, &trace_name, with_fit);
    write_json(&summary, &summary_path)?;
    if trace.outcome == Outcome::Error {
        return Err(Error::Solver {
            algorithm: trace.algorithm.clone(),
            message: trace.error.clone().unwrap_or_default(),
        });
    }
    Ok(RunOutput {
        summary,
        trace,
        trace_path,
        summary_path,
    })
}

/// Validation result plus the advisory Hölder certificate and, at `x0`, the
/// ε-stationarity certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub holder: HolderReport,
    pub start_certificate: Certificate,
}

pub const CHECK_SAMPLES: usize = 2000;

pub fn check(prep: &Prepared) -> Result<CheckReport> {
    let mut rng = child_stream(prep.config.seed, 0, StreamRole::Sampling);
    let holder = check_holder(&prep.spec, CHECK_SAMPLES, &mut rng)?;
    let grad = prep.spec.f_grad(&prep.x0);
    let x = prep.spec.lmo().solve(&grad)?;
    let report = gap_report(&prep.spec, &prep.x0, &grad, &x)?;
    let start_certificate = epsilon_stationarity_certificate(&prep.spec, &report, prep.config.algorithm.epsilon)?;
    Ok(CheckReport {
        holder,
        start_certificate,
    })
}
