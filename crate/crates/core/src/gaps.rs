//! Stationarity measures: the generalized Frank–Wolfe gap `g_k` and the
//! gradient-mapping norm `‖y − x‖`, with the cross-checks relating them.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::problems::ProblemSpec;

/// Raw gaps in `(−ROUNDOFF_TOL, 0)` are round-off and silently become 0.
pub const ROUNDOFF_TOL: f64 = 1e-12;

/// Raw gaps below `−NEGATIVE_GAP_TOL` indicate a bug and raise an error.
/// Values between the two thresholds are clamped with a warning.
pub const NEGATIVE_GAP_TOL: f64 = 1e-10;

/// Slack used when checking the lemma inequalities.
pub const LEMMA_TOL: f64 = 1e-9;

/// `⟨∇f(y), y − x⟩ + h(y) − h(x)` before clamping.
pub fn fw_gap_raw(spec: &ProblemSpec, y: &[f64], grad_at_y: &[f64], x_sol: &[f64]) -> Result<f64> {
    let n = spec.dim();
    check_dim(n, y.len())?;
    check_dim(n, grad_at_y.len())?;
    check_dim(n, x_sol.len())?;
    let hy = spec.h_value(y);
    let hx = spec.h_value(x_sol);
    if !hy.is_finite() || !hx.is_finite() {
        return Err(Error::Infeasible);
    }
    let lin: f64 = grad_at_y
        .iter()
        .zip(y.iter().zip(x_sol))
        .map(|(g, (a, b))| g * (a - b))
        .sum();
    let raw = lin + hy - hx;
    if !raw.is_finite() {
        return Err(Error::NonFinite("Frank-Wolfe gap"));
    }
    Ok(raw)
}

/// Clamps round-off negatives to zero; errors on genuinely negative values.
pub fn clamp_gap(raw: f64) -> Result<f64> {
    if raw >= 0.0 {
        Ok(raw)
    } else if raw > -ROUNDOFF_TOL {
        Ok(0.0)
    } else if raw >= -NEGATIVE_GAP_TOL {
        log::warn!("clamping negative Frank-Wolfe gap {raw:e}");
        Ok(0.0)
    } else {
        Err(Error::NegativeGap(raw))
    }
}

/// Generalized Frank–Wolfe gap at `y`, given `x_sol = w(∇f(y))`.
pub fn fw_gap(spec: &ProblemSpec, y: &[f64], grad_at_y: &[f64], x_sol: &[f64]) -> Result<f64> {
    clamp_gap(fw_gap_raw(spec, y, grad_at_y, x_sol)?)
}

/// `‖y − x_sol‖` in the problem's norm.
pub fn grad_map_norm(spec: &ProblemSpec, y: &[f64], x_sol: &[f64]) -> f64 {
    spec.norm().distance(y, x_sol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub fw_gap: f64,
    pub raw_gap: f64,
    pub grad_map_norm: f64,
    /// `(M_f + M_h)·‖g_X‖` when both bounds are declared.
    pub lemma_a_bound: Option<f64>,
    /// `2g/μ` when `μ > 0`.
    pub lemma_b_bound: Option<f64>,
}

impl GapReport {
    /// `‖g_X‖² ≤ 2g/μ`, or `None` when `μ = 0`.
    pub fn lemma_b_holds(&self) -> Option<bool> {
        self.lemma_b_bound
            .map(|b| self.grad_map_norm * self.grad_map_norm <= b + LEMMA_TOL)
    }

    /// `g ≤ (M_f + M_h)‖g_X‖`, or `None` without declared bounds.
    pub fn lemma_a_holds(&self) -> Option<bool> {
        self.lemma_a_bound.map(|b| self.fw_gap <= b + LEMMA_TOL)
    }
}

pub fn gap_report(spec: &ProblemSpec, y: &[f64], grad_at_y: &[f64], x_sol: &[f64]) -> Result<GapReport> {
    let raw = fw_gap_raw(spec, y, grad_at_y, x_sol)?;
    let gap = clamp_gap(raw)?;
    Ok(report_from_parts(spec, gap, raw, grad_map_norm(spec, y, x_sol)))
}

pub(crate) fn report_from_parts(spec: &ProblemSpec, gap: f64, raw: f64, gx: f64) -> GapReport {
    let c = spec.constants();
    GapReport {
        fw_gap: gap,
        raw_gap: raw,
        grad_map_norm: gx,
        lemma_a_bound: match (c.m_f, c.m_h) {
            (Some(a), Some(b)) => Some((a + b) * gx),
            _ => None,
        },
        lemma_b_bound: (c.mu > 0.0).then(|| 2.0 * gap / c.mu),
    }
}

/// Which ε-stationarity criteria a gap report satisfies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub epsilon: f64,
    /// `g ≤ ε`.
    pub gap_ok: bool,
    /// `(ε/(L_ν·D_X))^{1/ν}`, absent for unbounded `X`.
    pub grad_map_threshold: Option<f64>,
    pub grad_map_ok: Option<bool>,
    /// `Ψ(y) − Ψ* ≤ g ≤ ε` implied for convex `f`; absent otherwise.
    pub optimality_ok: Option<bool>,
    pub notes: Vec<String>,
}

impl Certificate {
    /// True when every applicable criterion holds.
    pub fn all_hold(&self) -> bool {
        self.gap_ok && self.grad_map_ok.unwrap_or(true) && self.optimality_ok.unwrap_or(true)
    }
}

pub fn epsilon_stationarity_certificate(spec: &ProblemSpec, gap: &GapReport, epsilon: f64) -> Result<Certificate> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let c = spec.constants();
    let mut notes = Vec::new();
    let gap_ok = gap.fw_gap <= epsilon;
    let grad_map_threshold = match c.d_x {
        Some(d) => Some((epsilon / (c.l_nu * d)).powf(1.0 / c.nu)),
        None => {
            notes.push("gradient-mapping criterion skipped: X is unbounded".to_string());
            None
        }
    };
    let grad_map_ok = grad_map_threshold.map(|t| gap.grad_map_norm <= t);
    let optimality_ok = if c.convex_f {
        Some(gap_ok)
    } else {
        notes.push("optimality criterion skipped: f not declared convex".to_string());
        None
    };
    Ok(Certificate {
        epsilon,
        gap_ok,
        grad_map_threshold,
        grad_map_ok,
        optimality_ok,
        notes,
    })
}
