//! `cgt`: run, replicate and check conditional-gradient experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cgt_core::harness::rates::fit_trace;
use cgt_core::harness::trace_io::{gap_series, read_trace};
use cgt_core::harness::{self, file_sha256, prepare, replicate, run_suite, write_json, RunConfig, SuiteConfig};
use cgt_core::{Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cgt", version, about = "Conditional gradient type methods: experiment runner")]
struct Cli {
    /// Per-iteration logging at the monitor stride.
    #[arg(short, long, global = true)]
    verbose: bool,
    /// Upper bound on worker threads for replications and suites.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration limit N.
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its trace and summary.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Add a rate fit of the running-minimum gap to the summary.
        #[arg(long)]
        fit: bool,
    },
    /// Run M seeded replications of a stochastic configuration.
    Replicate {
        config: PathBuf,
        #[arg(long)]
        m: Option<u64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Fit convergence rates of a trace file or every trace in a directory.
    Rates { path: PathBuf },
    /// Run a complexity-order suite.
    Table1 {
        suite: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Validate a configuration and report the Hölder certificate.
    Check { config: PathBuf },
}

fn load(path: &Path, o: &Overrides) -> Result<harness::Prepared> {
    let (mut cfg, base) = RunConfig::load(path)?;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(n) = o.max_iters {
        cfg.algorithm.max_iters = Some(n);
    }
    if let Some(e) = o.epsilon {
        cfg.algorithm.epsilon = e;
    }
    if let Some(d) = &o.output_dir {
        cfg.output_dir = d.clone();
    }
    prepare(&cfg, &base)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |g| format!("{g:.6e}"))
}

fn trace_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut out: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(".trace.csv"))
            .collect();
        out.sort();
        Ok(out)
    } else if path.exists() {
        Ok(vec![path.to_path_buf()])
    } else {
        Err(Error::Config {
            path: path.to_path_buf(),
            message: "no such file or directory".into(),
        })
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, overrides, fit } => {
            let prep = load(&config, &overrides)?;
            let res = harness::run(&prep, fit);
            let stem = prep.config.stem();
            let dir = &prep.config.output_dir;
            let summary_path = dir.join(format!("{stem}.summary.json"));
            let out = res?;
            let s = &out.summary;
            println!(
                "{}: {} {:?} after {} iterations, g = {}",
                stem,
                s.algorithm,
                s.outcome,
                s.iterations,
                fmt_opt(s.terminal_gap)
            );
            println!("summary {} sha256 {}", summary_path.display(), file_sha256(&summary_path)?);
            println!("trace {}", out.trace_path.display());
        }
        Command::Replicate { config, m, overrides } => {
            let prep = load(&config, &overrides)?;
            let m = m.or(prep.config.stochastic.as_ref().map(|s| s.replications)).unwrap_or(30);
            let out = replicate(&prep, m, cli.workers)?;
            let r = &out.report;
            println!(
                "{}: E[g_R] = {:.6e} (sd {:.3e}), 95% CI [{:.6e}, {:.6e}] over M = {}{}",
                prep.config.stem(),
                r.mean,
                r.sd,
                r.ci_low,
                r.ci_high,
                r.m,
                if r.wide_ci_warning { " (warning: few replications, wide CI)" } else { "" }
            );
            println!("report {} sha256 {}", out.report_path.display(), file_sha256(&out.report_path)?);
        }
        Command::Rates { path } => {
            let files = trace_files(&path)?;
            let mut fits = Vec::new();
            for f in &files {
                let rows = read_trace(f)?;
                let fit = fit_trace(&gap_series(&rows))?;
                println!(
                    "{}: slope {:.4} (R² {:.4}), semilog slope {:.4e} (R² {:.4}), {:?}",
                    f.display(),
                    fit.slope,
                    fit.r_squared,
                    fit.semilog_slope,
                    fit.semilog_r_squared,
                    fit.kind
                );
                fits.push((f.display().to_string(), fit));
            }
            let out = if path.is_dir() {
                path.join("rates.json")
            } else {
                PathBuf::from(format!("{}.rates.json", path.display()))
            };
            write_json(&fits, &out)?;
            println!("rates {}", out.display());
        }
        Command::Table1 { suite, output_dir } => {
            let (mut cfg, base) = SuiteConfig::load(&suite)?;
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            let (report, path) = run_suite(&cfg, &base, cli.workers)?;
            for c in &report.cells {
                let slope = c.fit.as_ref().map(|f| format!("{:.4}", f.slope)).unwrap_or_else(|| "-".into());
                let theory = c
                    .theory
                    .as_ref()
                    .map(|t| t.inversion.clone())
                    .unwrap_or_else(|| "-".into());
                println!("{}: {:?} (fitted slope {slope}; {theory})", c.name, c.verdict);
            }
            println!("report {}", path.display());
        }
        Command::Check { config } => {
            let prep = load(&config, &Overrides::default())?;
            let rep = harness::check(&prep)?;
            let ratio = rep.holder.worst_ratio / rep.holder.declared_l_nu;
            println!(
                "valid; Hölder certificate ratio {ratio:.6} (worst {:.6e} vs L_nu {:.6e} over {} pairs){}",
                rep.holder.worst_ratio,
                rep.holder.declared_l_nu,
                rep.holder.pairs,
                if rep.holder.violation { ", VIOLATION" } else { "" }
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Debug
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
