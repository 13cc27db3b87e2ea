//! Seeded Monte-Carlo replications of the stochastic method.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensure_dir, execute, run_options, trace_io, write_json, Prepared, RunConfig};
use crate::error::{Error, Result};
use crate::solvers::{Outcome, RunTrace};

/// Below this many replications the CI is flagged as unreliable.
pub const WIDE_CI_BELOW: u64 = 10;

/// Normal 97.5% quantile.
pub const Z_95: f64 = 1.959963984540054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub config: RunConfig,
    pub m: u64,
    pub completed: u64,
    pub epsilon: f64,
    /// Instrumented `g_R` per replication, in replication order.
    pub g_r: Vec<f64>,
    pub r: Vec<u64>,
    pub so_calls: Vec<u64>,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_high_over_epsilon: f64,
    pub wide_ci_warning: bool,
    pub trace_files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ReplicationOutput {
    pub report: ReplicationReport,
    pub traces: Vec<RunTrace>,
    pub report_path: PathBuf,
}

/// Sample mean, standard deviation (`M − 1` denominator) and the 95%
/// normal-approximation interval.
pub fn mean_sd_ci(xs: &[f64]) -> (f64, f64, f64, f64) {
    let m = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / m;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        f64::NAN
    };
    let half = Z_95 * sd / m.sqrt();
    (mean, sd, mean - half, mean + half)
}

/// Runs `m` replications on up to `workers` threads. Replication `i` uses
/// child streams `i` of the config seed, so the report does not depend on
/// scheduling. Traces go to `<stem>.rep-XXXX.trace.csv`.
pub fn replicate(prep: &Prepared, m: u64, workers: Option<usize>) -> Result<ReplicationOutput> {
    let cfg = &prep.config;
    let mut errs = Vec::new();
    if cfg.algorithm.name != super::AlgorithmKind::Rscgt {
        errs.push(format!("replicate requires a stochastic algorithm, got {}", cfg.algorithm.name.name()));
    }
    if m < 2 {
        errs.push(format!("replicate requires M >= 2, got {m}"));
    }
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    if m < WIDE_CI_BELOW {
        log::warn!("M = {m} replications: the confidence interval is unreliable");
    }
    let opts = run_options(prep);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<RunTrace>> = pool.install(|| (0..m).into_par_iter().map(|i| execute(prep, i, &opts)).collect());

    ensure_dir(&cfg.output_dir)?;
    let mut traces = Vec::new();
    let mut names = Vec::new();
    let mut first_error = None;
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok(t) if t.outcome != Outcome::Error => {
                let name = format!("{}.rep-{i:04}.trace.csv", cfg.stem());
                trace_io::write_trace(&t, &cfg.output_dir.join(&name))?;
                names.push(name);
                traces.push(t);
            }
            Ok(t) => {
                first_error = Some(format!("replication {i}: {}", t.error.unwrap_or_default()));
                break;
            }
            Err(e) => {
                first_error = Some(format!("replication {i}: {e}"));
                break;
            }
        }
    }
    let g_r: Vec<f64> = traces.iter().map(|t| t.last_gap().unwrap_or(f64::NAN)).collect();
    let (mean, sd, lo, hi) = mean_sd_ci(&g_r);
    let report = ReplicationReport {
        config: cfg.clone(),
        m,
        completed: traces.len() as u64,
        epsilon: cfg.algorithm.epsilon,
        r: traces.iter().map(|t| t.iterations()).collect(),
        so_calls: traces.iter().map(|t| t.last().so_calls).collect(),
        g_r,
        mean,
        sd,
        ci_low: lo,
        ci_high: hi,
        ci_high_over_epsilon: hi / cfg.algorithm.epsilon,
        wide_ci_warning: m < WIDE_CI_BELOW,
        trace_files: names,
        error: first_error.clone(),
    };
    let report_path = cfg.output_dir.join(format!("{}.replications.json", cfg.stem()));
    write_json(&report, &report_path)?;
    if let Some(message) = first_error {
        return Err(Error::Solver {
            algorithm: "rscgt".into(),
            message,
        });
    }
    Ok(ReplicationOutput {
        report,
        traces,
        report_path,
    })
}
