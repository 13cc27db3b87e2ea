//! The composite model `Ψ(x) = f(x) + h(x)`.
//!
//! `f` is reached through value/gradient oracles ([`SmoothTerm`]); `h` and
//! the feasible set live in the [`CompositeLmo`] that also solves the
//! subproblem. Problem constants (`ν`, `L_ν`, `μ`, `D_X`, …) are declared by
//! the user or the catalog and never re-estimated inside solvers.

pub mod catalog;
pub mod stochastic;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::NormKind;
use crate::rng::Stream;
use crate::subproblems::CompositeLmo;

pub use catalog::{CatalogProblem, ConvexQuadratic, HolderPower, IndefiniteQuadratic, LinearTerm};
pub use stochastic::{NoiseModel, StochasticOracle};

/// Exact first-order oracle for the (weakly) smooth term `f`.
pub trait SmoothTerm: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn grad_into(&self, x: &[f64], out: &mut [f64]);

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.grad_into(x, &mut out);
        out
    }

    /// `(ν, L_ν)` known for this term, if any.
    fn holder_constants(&self) -> Option<(f64, f64)> {
        None
    }

    /// Whether `f` is known to be convex.
    fn is_convex(&self) -> Option<bool> {
        None
    }
}

/// Declared problem constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Hölder exponent `ν ∈ (0, 1]`.
    pub nu: f64,
    /// Hölder constant `L_ν > 0`.
    pub l_nu: f64,
    /// Strong-convexity modulus of `h`, `μ ≥ 0`.
    pub mu: f64,
    /// Diameter of `X`; `None` when `X` is unbounded.
    pub d_x: Option<f64>,
    /// Known optimal value `Ψ*`.
    pub psi_star: Option<f64>,
    /// Bound on `‖f'(x)‖_*` over `X`.
    pub m_f: Option<f64>,
    /// Bound on `‖p_h(x)‖_*` over `X`.
    pub m_h: Option<f64>,
    /// Whether `f` is declared convex. Only selects schedules and PMFs.
    pub convex_f: bool,
}

impl ProblemConstants {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            errs.push(format!("nu must lie in (0, 1], got {}", self.nu));
        }
        if !(self.l_nu.is_finite() && self.l_nu > 0.0) {
            errs.push(format!("L_nu must be positive, got {}", self.l_nu));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            errs.push(format!("mu must be nonnegative, got {}", self.mu));
        }
        if let Some(d) = self.d_x {
            if !(d.is_finite() && d > 0.0) {
                errs.push(format!("D_X must be positive, got {d}"));
            }
        }
        for (name, v) in [("M_f", self.m_f), ("M_h", self.m_h)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    errs.push(format!("{name} must be nonnegative, got {v}"));
                }
            }
        }
        errs
    }
}

/// A fully specified composite problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    f: Arc<dyn SmoothTerm>,
    h: CompositeLmo,
    constants: ProblemConstants,
    norm: NormKind,
}

impl ProblemSpec {
    pub fn new(
        f: Arc<dyn SmoothTerm>,
        h: CompositeLmo,
        constants: ProblemConstants,
        norm: NormKind,
    ) -> Result<Self> {
        let dim = f.dim();
        let mut errs = constants.validate();
        if let Err(e) = h.validate(dim) {
            errs.push(e.to_string());
        }
        let implied = h.implied_mu();
        if constants.mu > implied * (1.0 + 1e-12) {
            errs.push(format!(
                "declared mu = {} exceeds the modulus {implied} of the {} regularizer",
                constants.mu,
                h.name()
            ));
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(Self {
            f,
            h,
            constants,
            norm,
        })
    }

    /// Builds a spec with `μ` and `D_X` taken from the regularizer.
    pub fn with_defaults(
        f: Arc<dyn SmoothTerm>,
        h: CompositeLmo,
        nu: f64,
        l_nu: f64,
        convex_f: bool,
    ) -> Result<Self> {
        let norm = NormKind::L2;
        let constants = ProblemConstants {
            nu,
            l_nu,
            mu: h.implied_mu(),
            d_x: h.diameter(f.dim(), norm),
            psi_star: None,
            m_f: None,
            m_h: None,
            convex_f,
        };
        Self::new(f, h, constants, norm)
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn smooth_term(&self) -> &Arc<dyn SmoothTerm> {
        &self.f
    }

    pub fn lmo(&self) -> &CompositeLmo {
        &self.h
    }

    pub fn constants(&self) -> &ProblemConstants {
        &self.constants
    }

    pub fn norm(&self) -> NormKind {
        self.norm
    }

    pub fn with_psi_star(mut self, psi_star: Option<f64>) -> Self {
        self.constants.psi_star = psi_star;
        self
    }

    pub fn f_value(&self, x: &[f64]) -> f64 {
        self.f.value(x)
    }

    pub fn f_grad(&self, x: &[f64]) -> Vec<f64> {
        self.f.grad(x)
    }

    pub fn f_grad_into(&self, x: &[f64], out: &mut [f64]) {
        self.f.grad_into(x, out)
    }

    pub fn h_value(&self, x: &[f64]) -> f64 {
        self.h.h_value(x)
    }

    pub fn h_subgrad(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.h.h_subgrad(x)
    }

    /// `Ψ(x) = f(x) + h(x)`; infeasible points are an error, never `+∞`/NaN.
    pub fn eval_psi(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let h = self.h.h_value(x);
        if !h.is_finite() {
            return Err(Error::Infeasible);
        }
        Ok(self.f.value(x) + h)
    }
}

/// Outcome of [`check_holder`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub worst_ratio: f64,
    pub declared_l_nu: f64,
    pub nu: f64,
    pub pairs: usize,
    pub skipped_degenerate: usize,
    pub violation: bool,
}

/// Relative slack allowed above the declared `L_ν`.
pub const HOLDER_TOL: f64 = 1e-9;

/// Standard deviation used when sampling points of an unbounded `X`.
pub const UNBOUNDED_SAMPLE_SCALE: f64 = 2.0;

/// `‖f'(y) − f'(x)‖_* / ‖y − x‖^ν`, or `None` when `x = y`.
pub fn holder_ratio(spec: &ProblemSpec, x: &[f64], y: &[f64]) -> Option<f64> {
    let d = spec.norm.distance(x, y);
    if d == 0.0 {
        return None;
    }
    let gx = spec.f_grad(x);
    let gy = spec.f_grad(y);
    let diff: Vec<f64> = gy.iter().zip(&gx).map(|(a, b)| a - b).collect();
    Some(spec.norm.dual_norm(&diff) / d.powf(spec.constants.nu))
}

/// Advisory certificate for the declared `(ν, L_ν)`: the worst Hölder ratio
/// over `samples` random feasible pairs.
pub fn check_holder(spec: &ProblemSpec, samples: usize, rng: &mut Stream) -> Result<HolderReport> {
    if samples < 2 {
        return Err(Error::InvalidInput("check_holder needs at least 2 samples".into()));
    }
    let dim = spec.dim();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    let mut skipped = 0;
    for _ in 0..samples {
        let x = spec.h.sample_point(dim, rng, UNBOUNDED_SAMPLE_SCALE);
        let y = spec.h.sample_point(dim, rng, UNBOUNDED_SAMPLE_SCALE);
        match holder_ratio(spec, &x, &y) {
            Some(r) => {
                worst = worst.max(r);
                pairs += 1;
            }
            None => skipped += 1,
        }
    }
    let l = spec.constants.l_nu;
    Ok(HolderReport {
        worst_ratio: worst,
        declared_l_nu: l,
        nu: spec.constants.nu,
        pairs,
        skipped_degenerate: skipped,
        violation: worst > l * (1.0 + HOLDER_TOL),
    })
}

/// Largest violation of the strong-convexity inequality
/// `h(αx + (1−α)y) ≤ αh(x) + (1−α)h(y) − ½μα(1−α)‖x − y‖²` over random
/// feasible triples. Nonpositive means no violation was found.
pub fn strong_convexity_violation(spec: &ProblemSpec, samples: usize, rng: &mut Stream) -> f64 {
    use rand::Rng;
    let dim = spec.dim();
    let mu = spec.constants.mu;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let x = spec.h.sample_point(dim, rng, UNBOUNDED_SAMPLE_SCALE);
        let y = spec.h.sample_point(dim, rng, UNBOUNDED_SAMPLE_SCALE);
        let a: f64 = rng.random();
        let z = crate::linalg::convex_combination(&y, &x, a);
        let d = spec.norm.distance(&x, &y);
        let lhs = spec.h_value(&z);
        let rhs = a * spec.h_value(&x) + (1.0 - a) * spec.h_value(&y) - 0.5 * mu * a * (1.0 - a) * d * d;
        worst = worst.max(lhs - rhs);
    }
    worst
}

/// Largest distance between sampled feasible pairs, for checking a declared
/// finite `D_X`.
pub fn sampled_diameter(spec: &ProblemSpec, samples: usize, rng: &mut Stream) -> f64 {
    let dim = spec.dim();
    (0..samples)
        .map(|_| {
            let x = spec.h.sample_point(dim, rng, UNBOUNDED_SAMPLE_SCALE);
            let y = spec.h.sample_point(dim, rng, UNBOUNDED_SAMPLE_SCALE);
            spec.norm.distance(&x, &y)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::rng::root_stream;

    fn half_square(dim: usize) -> Arc<dyn SmoothTerm> {
        Arc::new(HolderPower::new(vec![0.0; dim], 1.0, true).unwrap())
    }

    #[test]
    fn psi_of_centered_quadratic_at_origin() {
        let h = CompositeLmo::BoxLinear {
            lower: vec![-1.0; 2],
            upper: vec![1.0; 2],
        };
        let spec = ProblemSpec::with_defaults(half_square(2), h, 1.0, 1.0, true).unwrap();
        assert_eq!(spec.eval_psi(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn psi_linear_plus_half_square() {
        let f = Arc::new(LinearTerm::new(vec![1.0, 2.0]));
        let h = CompositeLmo::LpnormSquared {
            p: 2.0,
            ball_radius: None,
        };
        let spec = ProblemSpec::with_defaults(f, h, 1.0, 1e-12, true).unwrap();
        assert_eq!(spec.eval_psi(&[1.0, 1.0]).unwrap(), 4.0);
    }

    #[test]
    fn psi_weakly_smooth_power() {
        // ‖x‖ = 4, ν = ½: (1/1.5)·4^{1.5} = 16/3
        let f = Arc::new(HolderPower::new(vec![0.0; 2], 0.5, true).unwrap());
        let h = CompositeLmo::LpnormSquared {
            p: 2.0,
            ball_radius: None,
        };
        let spec = ProblemSpec::with_defaults(f, h, 0.5, 2f64.sqrt(), true).unwrap();
        let v = spec.eval_psi(&[4.0 * 0.6, 4.0 * 0.8]).unwrap() - 0.5 * 16.0;
        assert!((v - 16.0 / 3.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn infeasible_point_is_an_error() {
        let spec = ProblemSpec::with_defaults(
            half_square(2),
            CompositeLmo::SimplexLinear { radius: 1.0 },
            1.0,
            1.0,
            true,
        )
        .unwrap();
        assert!(matches!(spec.eval_psi(&[1.0, 1.0]), Err(Error::Infeasible)));
        assert!(matches!(
            spec.eval_psi(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn holder_ratio_identity_gradient() {
        let spec = ProblemSpec::with_defaults(
            half_square(3),
            CompositeLmo::BoxLinear {
                lower: vec![-1.0; 3],
                upper: vec![1.0; 3],
            },
            1.0,
            1.0,
            true,
        )
        .unwrap();
        let report = check_holder(&spec, 500, &mut root_stream(1)).unwrap();
        assert!((report.worst_ratio - 1.0).abs() < 1e-12);
        assert!(!report.violation);
        assert_eq!(holder_ratio(&spec, &[0.1; 3], &[0.1; 3]), None);
        assert!(check_holder(&spec, 1, &mut root_stream(1)).is_err());
    }

    #[test]
    fn declared_constant_too_small_is_flagged() {
        let spec = ProblemSpec::with_defaults(
            half_square(2),
            CompositeLmo::L1ballLinear { radius: 1.0 },
            1.0,
            0.5,
            true,
        )
        .unwrap();
        assert!(check_holder(&spec, 100, &mut root_stream(2)).unwrap().violation);
    }

    #[test]
    fn invalid_constants_are_all_reported() {
        let q = IndefiniteQuadratic::new(DenseMatrix::identity(2), vec![0.0; 2]).unwrap();
        let err = ProblemSpec::new(
            Arc::new(q),
            CompositeLmo::SimplexLinear { radius: 1.0 },
            ProblemConstants {
                nu: 1.5,
                l_nu: -1.0,
                mu: 0.5,
                d_x: None,
                psi_star: None,
                m_f: None,
                m_h: None,
                convex_f: false,
            },
            NormKind::L2,
        )
        .unwrap_err();
        match err {
            Error::Validation(v) => assert_eq!(v.len(), 3, "{v:?}"),
            e => panic!("{e}"),
        }
    }
}
