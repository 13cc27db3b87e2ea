//! Empirical convergence-rate fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of points left in the fitting window.
pub const MIN_FIT_POINTS: usize = 20;

/// Fraction of leading points skipped as transient.
pub const DEFAULT_SKIP: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    Power,
    Superpolynomial,
}

/// Least-squares fit of `log y` against `log x` (and `x`) over a tail window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub kind: FitKind,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `log ρ` from regressing `log y` on `x`.
    pub semilog_slope: f64,
    pub semilog_r_squared: f64,
    pub window_start: f64,
    pub window_end: f64,
    pub points: usize,
    /// Points dropped at and after the first nonpositive value.
    pub truncated: usize,
}

/// Ordinary least squares; returns `(slope, intercept, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

/// Fits `points = (x, y)` with `x > 0` ascending. The series is cut at the
/// first `y ≤ 0`, then the leading `skip` fraction is dropped.
pub fn fit_points(points: &[(f64, f64)], skip: f64) -> Result<RateFit> {
    let cut = points.iter().position(|(_, y)| !(*y > 0.0)).unwrap_or(points.len());
    let kept = &points[..cut];
    let start = ((kept.len() as f64) * skip).floor() as usize;
    let window = &kept[start..];
    if window.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidInput(format!(
            "rate fit needs at least {MIN_FIT_POINTS} positive points in the window, got {}",
            window.len()
        )));
    }
    if window.iter().any(|(x, _)| !(*x > 0.0)) {
        return Err(Error::InvalidInput("rate fit abscissae must be positive".into()));
    }
    let lx: Vec<f64> = window.iter().map(|(x, _)| x.ln()).collect();
    let xs: Vec<f64> = window.iter().map(|(x, _)| *x).collect();
    let ly: Vec<f64> = window.iter().map(|(_, y)| y.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&lx, &ly);
    let (ss, _, sr2) = linear_fit(&xs, &ly);
    let kind = if sr2 > r2 && sr2 >= 0.95 {
        FitKind::Superpolynomial
    } else {
        FitKind::Power
    };
    Ok(RateFit {
        kind,
        slope,
        intercept,
        r_squared: r2,
        semilog_slope: ss,
        semilog_r_squared: sr2,
        window_start: window[0].0,
        window_end: window[window.len() - 1].0,
        points: window.len(),
        truncated: points.len() - cut,
    })
}

/// Running minimum of a `(k, g_k)` series.
pub fn min_so_far(series: &[(u64, f64)]) -> Vec<(f64, f64)> {
    let mut m = f64::INFINITY;
    series
        .iter()
        .map(|&(k, g)| {
            m = m.min(g);
            (k as f64, m)
        })
        .collect()
}

/// Fit of the running minimum of `g_k` against `k`.
pub fn fit_trace(series: &[(u64, f64)]) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = min_so_far(series).into_iter().filter(|(k, _)| *k > 0.0).collect();
    fit_points(&pts, DEFAULT_SKIP)
}
