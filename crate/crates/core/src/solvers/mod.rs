//! The four conditional-gradient-type methods and their shared trace model.

pub mod cgt;
pub mod fcgt;
pub mod line_search;
pub mod rscgt;
pub mod schedule;

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::{clamp_gap, fw_gap_raw};
use crate::linalg::NormKind;
use crate::problems::ProblemSpec;
use crate::rng::Stream;

pub use cgt::run_cgt;
pub use fcgt::run_fcgt;
pub use line_search::run_cgt_ls;
pub use rscgt::{run_rscgt, run_rscgt_with_plan, RscgtPlan};
pub use schedule::{RscgtCase, StepsizeSchedule};

/// Which candidate the folded method kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// The `α_k` step `ŷ_k`.
    Alpha,
    /// The `β_k` step `ỹ_k`.
    Beta,
}

/// One trace row. Row 0 holds `Ψ(x₀)`; row `k ≥ 1` holds the gap measured
/// at `y_{k−1}`, the step taken and `Ψ(y_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: u64,
    /// `None` on row 0 and on a terminal row where no step was taken.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub t_k: Option<u32>,
    pub g_k: Option<f64>,
    pub raw_gap: Option<f64>,
    pub grad_map_norm: Option<f64>,
    pub psi: f64,
    pub a_k: f64,
    pub grad_calls: u64,
    pub lmo_calls: u64,
    pub so_calls: u64,
    pub psi_evals: u64,
    pub batch: Option<u64>,
    pub branch: Option<Branch>,
    /// `Ψ` at the rejected line-search trials, in trial order.
    pub rejected_psi: Vec<f64>,
    pub y: Option<Vec<f64>>,
}

impl IterateRecord {
    fn initial(psi: f64, counters: &Counters, y: Option<Vec<f64>>) -> Self {
        Self {
            k: 0,
            alpha: None,
            beta: None,
            t_k: None,
            g_k: None,
            raw_gap: None,
            grad_map_norm: None,
            psi,
            a_k: 1.0,
            grad_calls: counters.grad,
            lmo_calls: counters.lmo,
            so_calls: counters.so,
            psi_evals: counters.psi,
            batch: None,
            branch: None,
            rejected_psi: Vec::new(),
            y,
        }
    }

    fn step(k: u64, probe: &Probe, psi: f64, a_k: f64, counters: &Counters) -> Self {
        Self {
            k,
            alpha: None,
            beta: None,
            t_k: None,
            g_k: Some(probe.gap),
            raw_gap: Some(probe.raw),
            grad_map_norm: Some(probe.grad_map_norm),
            psi,
            a_k,
            grad_calls: counters.grad,
            lmo_calls: counters.lmo,
            so_calls: counters.so,
            psi_evals: counters.psi,
            batch: None,
            branch: None,
            rejected_psi: Vec::new(),
            y: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    HitEpsilon,
    IterationLimit,
    WallClock,
    Error,
}

/// Derived constants a run actually used, for bound checking.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConstants {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_bar_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ls_trial_cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rscgt_case: Option<RscgtCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_f_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi0_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n3: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n4: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n5: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_first: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_last: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampled_r: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Stopping rules shared by every solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Limits {
    pub max_iters: u64,
    pub epsilon: f64,
    pub wall_clock: Option<Duration>,
}

impl Limits {
    pub fn new(max_iters: u64, epsilon: f64) -> Self {
        Self {
            max_iters,
            epsilon,
            wall_clock: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.max_iters == 0 {
            errs.push("iteration limit must be at least 1".to_string());
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            errs.push(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Store `y_k` in every record.
    pub keep_iterates: bool,
    /// Instrumented true-gap computation period for the stochastic method.
    pub monitor_stride: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            keep_iterates: false,
            monitor_stride: 1,
        }
    }
}

/// Complete record of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm: String,
    pub schedule: String,
    pub dim: usize,
    pub norm: NormKind,
    pub schedule_constants: ScheduleConstants,
    pub outcome: Outcome,
    pub error: Option<String>,
    pub records: Vec<IterateRecord>,
    pub final_y: Vec<f64>,
}

impl RunTrace {
    fn start(algorithm: &str, schedule: &str, spec: &ProblemSpec, constants: ScheduleConstants) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            schedule: schedule.to_string(),
            dim: spec.dim(),
            norm: spec.norm(),
            schedule_constants: constants,
            outcome: Outcome::IterationLimit,
            error: None,
            records: Vec::new(),
            final_y: Vec::new(),
        }
    }

    fn fail(&mut self, e: Error) {
        log::error!("{} stopped: {e}", self.algorithm);
        self.outcome = Outcome::Error;
        self.error = Some(e.to_string());
    }

    /// Index `k` of the smallest recorded gap (lowest `k` on ties).
    pub fn best_index(&self) -> Option<u64> {
        let mut best: Option<(u64, f64)> = None;
        for r in &self.records {
            if let Some(g) = r.g_k {
                if best.is_none_or(|(_, b)| g < b) {
                    best = Some((r.k, g));
                }
            }
        }
        best.map(|(k, _)| k)
    }

    pub fn best_gap(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.g_k).reduce(f64::min)
    }

    /// `(k, min_{j≤k} g_j)` for every row with a recorded gap.
    pub fn min_so_far(&self) -> Vec<(u64, f64)> {
        let mut m = f64::INFINITY;
        self.records
            .iter()
            .filter_map(|r| {
                r.g_k.map(|g| {
                    m = m.min(g);
                    (r.k, m)
                })
            })
            .collect()
    }

    pub fn last_gap(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| r.g_k)
    }

    pub fn iterations(&self) -> u64 {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn last(&self) -> &IterateRecord {
        self.records.last().expect("trace has an initial row")
    }

    /// Relative errors of the recorded `A_k` against `∏(1 − α_i/2)` and of
    /// `Σ α_k/(2A_k)` against `1/A_N − 1`.
    pub fn accumulator_errors(&self) -> (f64, f64) {
        let mut prod = 1.0;
        let mut worst_prod: f64 = 0.0;
        let mut sum = 0.0;
        for r in self.records.iter().skip(1) {
            if let Some(a) = r.alpha {
                prod *= 1.0 - a / 2.0;
                sum += a / (2.0 * r.a_k);
            }
            worst_prod = worst_prod.max(((r.a_k - prod) / prod).abs());
        }
        let a_n = self.last().a_k;
        let target = 1.0 / a_n - 1.0;
        let tele = if target == 0.0 {
            sum.abs()
        } else {
            ((sum - target) / target).abs()
        };
        (worst_prod, tele)
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Counters {
    pub grad: u64,
    pub lmo: u64,
    pub so: u64,
    pub psi: u64,
}

/// LMO point and stationarity measures at the current iterate.
#[derive(Debug, Clone)]
pub(crate) struct Probe {
    pub gap: f64,
    pub raw: f64,
    pub grad_map_norm: f64,
}

/// Solves the subproblem at `grad` into `x` and measures the gap at `y`.
pub(crate) fn probe(spec: &ProblemSpec, y: &[f64], grad: &[f64], x: &mut [f64]) -> Result<Probe> {
    spec.lmo().solve_into(grad, x)?;
    let raw = fw_gap_raw(spec, y, grad, x)?;
    let gap = clamp_gap(raw)?;
    Ok(Probe {
        gap,
        raw,
        grad_map_norm: spec.norm().distance(y, x),
    })
}

/// `out = (1 − α)·y + α·x`.
pub(crate) fn combine_into(y: &[f64], x: &[f64], alpha: f64, out: &mut [f64]) {
    for ((o, a), b) in out.iter_mut().zip(y).zip(x) {
        *o = (1.0 - alpha) * a + alpha * b;
    }
}

pub(crate) fn check_start(spec: &ProblemSpec, x0: &[f64], limits: &Limits) -> Result<f64> {
    limits.validate()?;
    crate::error::check_dim(spec.dim(), x0.len())?;
    crate::error::check_finite(x0, "starting point")?;
    spec.eval_psi(x0)
}

pub(crate) struct Clock {
    start: Instant,
    cap: Option<Duration>,
}

impl Clock {
    pub fn new(cap: Option<Duration>) -> Self {
        Self {
            start: Instant::now(),
            cap,
        }
    }

    pub fn expired(&self) -> bool {
        self.cap.is_some_and(|c| self.start.elapsed() >= c)
    }
}

/// Draws `R ∈ {1, …, N}` with `P(R = k) ∝ weights[k−1]` by inverting the
/// normalized cumulative sums.
pub fn sample_r(weights: &[f64], rng: &mut Stream) -> Result<u64> {
    if weights.is_empty() {
        return Err(Error::InvalidInput("PMF weights are empty".into()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidInput("PMF weights must be positive and finite".into()));
    }
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (i, w) in weights.iter().enumerate() {
        cum += w / total;
        if u < cum {
            return Ok(i as u64 + 1);
        }
    }
    Ok(weights.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::root_stream;

    #[test]
    fn sample_r_edge_cases() {
        let mut rng = root_stream(0);
        assert_eq!(sample_r(&[2.5], &mut rng).unwrap(), 1);
        assert!(sample_r(&[], &mut rng).is_err());
        assert!(sample_r(&[1.0, 0.0], &mut rng).is_err());
        assert!(sample_r(&[1.0, f64::NAN], &mut rng).is_err());
    }

    #[test]
    fn sample_r_frequencies() {
        let mut rng = root_stream(11);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_r(&[1.0; 4], &mut rng).unwrap() as usize - 1] += 1;
        }
        let sd = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 4.0).abs() < 3.0 * sd, "{counts:?}");
        }
        let twos = (0..n)
            .filter(|_| sample_r(&[1.0, 3.0], &mut rng).unwrap() == 2)
            .count();
        let sd = (n as f64 * 0.75 * 0.25).sqrt();
        assert!((twos as f64 - 0.75 * n as f64).abs() < 3.0 * sd);
    }

    #[test]
    fn combine_endpoints() {
        let mut out = [0.0; 2];
        combine_into(&[1.0, 2.0], &[3.0, 5.0], 0.0, &mut out);
        assert_eq!(out, [1.0, 2.0]);
        combine_into(&[1.0, 2.0], &[3.0, 5.0], 1.0, &mut out);
        assert_eq!(out, [3.0, 5.0]);
    }
}
