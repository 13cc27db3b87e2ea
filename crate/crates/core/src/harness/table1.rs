//! Empirical check of the complexity orders: each cell runs one algorithm
//! on one problem class, fits the gap decay and compares it with the order
//! obtained by inverting the oracle complexity.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{prepare, AlgorithmKind, Prepared, RunConfig};
use super::rates::{fit_points, fit_trace, FitKind, RateFit};
use super::replicate::mean_sd_ci;
use super::{ensure_dir, execute, run_options, write_json};
use crate::error::{Error, Result};
use crate::solvers::{RscgtCase, StepsizeSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_dir")]
    pub output_dir: PathBuf,
    #[serde(default, rename = "cell")]
    pub cells: Vec<CellConfig>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out/table1")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    pub name: String,
    /// Run config, relative to the suite file.
    pub config: PathBuf,
    /// Iteration limits to sweep. Without them a deterministic cell fits
    /// the running minimum of one trace.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<u64>>,
    /// Target accuracies to sweep for stochastic case schedules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<u64>,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
}

fn default_tol() -> f64 {
    0.25
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok((cfg, path.parent().map(Path::to_path_buf).unwrap_or_default()))
    }
}

/// Predicted decay of the gap in the budget (`iterations` or `stochastic
/// oracle calls`): `N^{−exponent}`, or geometric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryOrder {
    pub cell: String,
    pub complexity: String,
    pub exponent: Option<f64>,
    pub geometric: bool,
    pub axis: String,
    pub inversion: String,
}

fn power(cell: String, c_str: &str, c: f64, axis: &str, log_factor: bool) -> TheoryOrder {
    let p = 1.0 / c;
    let lg = if log_factor { "·log(1/ε)" } else { "" };
    TheoryOrder {
        cell,
        complexity: format!("O(ε^-{c_str}{lg}) = O(ε^-{c}{lg})"),
        exponent: Some(p),
        geometric: false,
        axis: axis.into(),
        inversion: format!(
            "N ~ ε^-{c} ⇒ ε ~ N^-(1/{c}) = N^-{p:.6}{}",
            if log_factor { " (log factor ignored)" } else { "" }
        ),
    }
}

/// The order for the cell described by a validated run.
pub fn theory_for(prep: &Prepared) -> TheoryOrder {
    let c = prep.spec.constants();
    let nu = c.nu;
    let strong = c.mu > 0.0;
    let sigma = prep.config.stochastic.as_ref().map_or(0.0, |s| s.sigma);
    let f = if c.convex_f { "convex" } else { "nonconvex" };
    let h = if strong { "strongly convex" } else { "convex" };
    let cell = format!("f {f}, h {h}, sigma {}, nu {nu}", if sigma > 0.0 { ">0" } else { "0" });
    let a = &prep.config.algorithm;

    if let (AlgorithmKind::Fcgt, StepsizeSchedule::FcgtFolded { q }) = (a.name, &a.schedule) {
        let q = *q;
        let p = if c.convex_f {
            if strong { 2.0 * nu } else { nu }
        } else if strong {
            (1.0 - q).min(2.0 * q * nu)
        } else {
            (1.0 - q).min(q * nu)
        };
        let bound = if c.convex_f {
            if strong { "N^-3 + N^-2ν" } else { "N^-3 + N^-ν" }
        } else if strong {
            "N^-(1-q) + N^-2qν"
        } else {
            "N^-(1-q) + N^-qν"
        };
        return TheoryOrder {
            cell,
            complexity: format!("g ≤ O({bound}) with q = {q}"),
            exponent: Some(p),
            geometric: false,
            axis: "iterations".into(),
            inversion: format!("slowest term: N^-{p:.6}"),
        };
    }

    if a.name == AlgorithmKind::Rscgt && sigma > 0.0 {
        let axis = "stochastic oracle calls";
        if let StepsizeSchedule::RscgtSchedule { case } = a.schedule {
            match case {
                RscgtCase::SmoothStrongNonconvex => return power(cell, "2", 2.0, axis, false),
                RscgtCase::SmoothStrongConvex => return power(cell, "1", 1.0, axis, true),
                _ => {}
            }
        }
        return match (c.convex_f, strong) {
            (false, false) => power(cell, "(1+3ν)/ν", (1.0 + 3.0 * nu) / nu, axis, false),
            (false, true) => power(cell, "(1+4ν)/(2ν)", (1.0 + 4.0 * nu) / (2.0 * nu), axis, false),
            (true, false) => power(cell, "(1+2ν)/ν", (1.0 + 2.0 * nu) / nu, axis, false),
            (true, true) => power(cell, "(1+2ν)/(2ν)", (1.0 + 2.0 * nu) / (2.0 * nu), axis, false),
        };
    }

    let axis = "iterations";
    match (c.convex_f, strong) {
        (false, false) => power(cell, "(1+ν)/ν", (1.0 + nu) / nu, axis, false),
        (false, true) => power(cell, "(1+ν)/(2ν)", (1.0 + nu) / (2.0 * nu), axis, false),
        (true, false) => power(cell, "1/ν", 1.0 / nu, axis, true),
        (true, true) if nu == 1.0 => TheoryOrder {
            cell,
            complexity: "O(ε^0·log(1/ε)) = O(log(1/ε))".into(),
            exponent: None,
            geometric: true,
            axis: axis.into(),
            inversion: "N ~ log(1/ε) ⇒ ε ~ ρ^N (geometric)".into(),
        },
        (true, true) => power(cell, "(1-ν)/(2ν)", (1.0 - nu) / (2.0 * nu), axis, true),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotCovered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub name: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheoryOrder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
    /// `(budget, statistic)` pairs the fit used.
    pub points: Vec<(f64, f64)>,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub cells: Vec<CellReport>,
}

fn judge(theory: &TheoryOrder, fit: &RateFit, tol: f64) -> Verdict {
    let ok = if theory.geometric {
        fit.kind == FitKind::Superpolynomial && fit.semilog_slope < 0.0
    } else {
        theory.exponent.is_some_and(|p| (fit.slope + p).abs() <= tol)
    };
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn run_cell(cell: &CellConfig, base: &Path, out_dir: &Path) -> CellReport {
    let mut rep = CellReport {
        name: cell.name.clone(),
        verdict: Verdict::NotCovered,
        theory: None,
        fit: None,
        points: Vec::new(),
        tolerance: cell.tolerance,
        reason: None,
    };
    let res = (|| -> Result<()> {
        let path = if cell.config.is_absolute() { cell.config.clone() } else { base.join(&cell.config) };
        let (mut cfg, cfg_base) = RunConfig::load(&path)?;
        cfg.output_dir = out_dir.join(&cell.name);
        let prep = prepare(&cfg, &cfg_base)?;
        let theory = theory_for(&prep);
        rep.theory = Some(theory.clone());
        let (points, fit) = measure(cell, &cfg, &cfg_base, &prep)?;
        rep.verdict = judge(&theory, &fit, cell.tolerance);
        rep.points = points;
        rep.fit = Some(fit);
        Ok(())
    })();
    if let Err(e) = res {
        rep.reason = Some(e.to_string());
        if rep.theory.is_some() && !e.is_validation() {
            rep.verdict = Verdict::Fail;
        }
    }
    rep
}

fn measure(cell: &CellConfig, cfg: &RunConfig, base: &Path, prep: &Prepared) -> Result<(Vec<(f64, f64)>, RateFit)> {
    let stochastic = cfg.algorithm.name == AlgorithmKind::Rscgt;
    if stochastic {
        let eps = cell
            .epsilons
            .clone()
            .ok_or_else(|| Error::Validation(vec![format!("cell {}: stochastic cells need epsilons", cell.name)]))?;
        let m = cell.replications.or(cfg.stochastic.as_ref().map(|s| s.replications)).unwrap_or(30);
        let mut pts = Vec::new();
        for e in eps {
            let mut c = cfg.clone();
            c.algorithm.epsilon = e;
            let p = prepare(&c, base)?;
            let opts = run_options(&p);
            let traces = (0..m).map(|i| execute(&p, i, &opts)).collect::<Result<Vec<_>>>()?;
            let g: Vec<f64> = traces.iter().map(|t| t.last_gap().unwrap_or(f64::NAN)).collect();
            let so = traces.iter().map(|t| t.last().so_calls as f64).sum::<f64>() / m as f64;
            pts.push((so, mean_sd_ci(&g).0));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let fit = fit_points(&pts, 0.0)?;
        return Ok((pts, fit));
    }
    match &cell.budgets {
        None => {
            let t = execute(prep, 0, &run_options(prep))?;
            let series: Vec<(u64, f64)> = t.records.iter().filter_map(|r| r.g_k.map(|g| (r.k, g))).collect();
            let fit = fit_trace(&series)?;
            let pts = super::rates::min_so_far(&series);
            Ok((pts, fit))
        }
        Some(budgets) => {
            let mut pts = Vec::new();
            for &n in budgets {
                let mut c = cfg.clone();
                c.algorithm.max_iters = Some(n);
                let p = prepare(&c, base)?;
                let t = execute(&p, 0, &run_options(&p))?;
                pts.push((n as f64, t.best_gap().unwrap_or(f64::NAN)));
            }
            let fit = fit_points(&pts, 0.0)?;
            Ok((pts, fit))
        }
    }
}

/// Runs every cell (concurrently, up to `workers`) and writes
/// `table1.json` into the suite output directory. Cells that cannot run are
/// reported as not covered.
pub fn run_suite(suite: &SuiteConfig, base: &Path, workers: Option<usize>) -> Result<(Table1Report, PathBuf)> {
    ensure_dir(&suite.output_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    let cells = pool.install(|| {
        suite
            .cells
            .par_iter()
            .map(|c| run_cell(c, base, &suite.output_dir))
            .collect::<Vec<_>>()
    });
    let report = Table1Report { cells };
    let path = suite.output_dir.join("table1.json");
    write_json(&report, &path)?;
    Ok((report, path))
}
