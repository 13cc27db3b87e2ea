//! Composite linear minimization oracles.
//!
//! A [`CompositeLmo`] owns both the feasible set `X` and the regularizer `h`,
//! and solves `argmin_{u ∈ X} ⟨g, u⟩ + h(u)` in closed form. All tie-breaks
//! are index-ordered so equal inputs give bitwise-equal outputs.

mod brute;

pub use brute::{brute_force_solve, MAX_BRUTE_FORCE_DIM};

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::linalg::{dot, norm1, norm2, norm_p, NormKind};
use crate::rng::Stream;

/// Slack accepted when testing membership of iterates, which accumulate
/// round-off through repeated convex combinations.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Entropy terms are evaluated at `max(x, ENTROPY_FLOOR)` so vertices give a
/// finite value instead of `0·(−∞)`.
pub const ENTROPY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CompositeLmo {
    /// `h = 0` on `{u ≥ 0, Σu = radius}`.
    SimplexLinear { radius: f64 },
    /// `h = 0` on `[lower, upper]`.
    BoxLinear { lower: Vec<f64>, upper: Vec<f64> },
    /// `h = 0` on `{‖u‖₁ ≤ radius}`.
    L1ballLinear { radius: f64 },
    /// `h = λ‖u‖₁` on `[lower, upper]`.
    BoxL1reg {
        lower: Vec<f64>,
        upper: Vec<f64>,
        lambda: f64,
    },
    /// `h = scale·Σ uᵢ ln uᵢ` on the probability simplex.
    SimplexEntropy { scale: f64 },
    /// `h = ½‖u‖_p²`, `p ∈ (1, 2]`, on `ℝⁿ` or an optional `ℓp` ball that
    /// must contain every minimizer the run asks for.
    LpnormSquared {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ball_radius: Option<f64>,
    },
}

impl CompositeLmo {
    pub fn name(&self) -> &'static str {
        match self {
            CompositeLmo::SimplexLinear { .. } => "simplex-linear",
            CompositeLmo::BoxLinear { .. } => "box-linear",
            CompositeLmo::L1ballLinear { .. } => "l1ball-linear",
            CompositeLmo::BoxL1reg { .. } => "box-l1reg",
            CompositeLmo::SimplexEntropy { .. } => "simplex-entropy",
            CompositeLmo::LpnormSquared { .. } => "lpnorm-squared",
        }
    }

    /// Checks the parameters against the ambient dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("{}: {msg}", self.name())));
        if dim == 0 {
            return bad("dimension must be positive".into());
        }
        match self {
            CompositeLmo::SimplexLinear { radius } | CompositeLmo::L1ballLinear { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad(format!("radius must be positive, got {radius}"));
                }
            }
            CompositeLmo::BoxLinear { lower, upper } => check_box(self, lower, upper, dim)?,
            CompositeLmo::BoxL1reg {
                lower,
                upper,
                lambda,
            } => {
                check_box(self, lower, upper, dim)?;
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return bad(format!("lambda must be nonnegative, got {lambda}"));
                }
            }
            CompositeLmo::SimplexEntropy { scale } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad(format!("scale must be positive, got {scale}"));
                }
            }
            CompositeLmo::LpnormSquared { p, ball_radius } => {
                if !(*p > 1.0 && *p <= 2.0) {
                    return bad(format!("p must lie in (1, 2], got {p}"));
                }
                if let Some(r) = ball_radius {
                    if !(r.is_finite() && *r > 0.0) {
                        return bad(format!("ball radius must be positive, got {r}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Strong-convexity modulus of `h` (w.r.t. `ℓ1` for the entropy, `ℓp`
    /// for the squared norm; both moduli also hold w.r.t. `ℓ2`).
    pub fn implied_mu(&self) -> f64 {
        match self {
            CompositeLmo::SimplexEntropy { scale } => *scale,
            CompositeLmo::LpnormSquared { p, .. } => p - 1.0,
            _ => 0.0,
        }
    }

    pub fn is_strongly_convex(&self) -> bool {
        self.implied_mu() > 0.0
    }

    pub fn is_linear(&self) -> bool {
        matches!(
            self,
            CompositeLmo::SimplexLinear { .. }
                | CompositeLmo::BoxLinear { .. }
                | CompositeLmo::L1ballLinear { .. }
        )
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(
            self,
            CompositeLmo::LpnormSquared {
                ball_radius: None,
                ..
            }
        )
    }

    /// Diameter of the feasible set in the given norm; `None` if unbounded.
    pub fn diameter(&self, dim: usize, norm: NormKind) -> Option<f64> {
        let d = match self {
            CompositeLmo::SimplexLinear { radius } => match norm {
                NormKind::L2 => radius * std::f64::consts::SQRT_2,
                NormKind::L1 => 2.0 * radius,
            },
            CompositeLmo::SimplexEntropy { .. } => match norm {
                NormKind::L2 => std::f64::consts::SQRT_2,
                NormKind::L1 => 2.0,
            },
            CompositeLmo::BoxLinear { lower, upper } | CompositeLmo::BoxL1reg { lower, upper, .. } => {
                let w: Vec<f64> = upper.iter().zip(lower).map(|(u, l)| u - l).collect();
                norm.norm(&w)
            }
            CompositeLmo::L1ballLinear { radius } => 2.0 * radius,
            CompositeLmo::LpnormSquared { p, ball_radius } => {
                let r = (*ball_radius)?;
                match norm {
                    // ‖v‖₂ ≤ ‖v‖_p for p ≤ 2, attained at ±r·e₁
                    NormKind::L2 => 2.0 * r,
                    NormKind::L1 => 2.0 * r * (dim as f64).powf(1.0 - 1.0 / p),
                }
            }
        };
        Some(d)
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        let tol = FEASIBILITY_TOL;
        match self {
            CompositeLmo::SimplexLinear { radius } => on_simplex(x, *radius, tol),
            CompositeLmo::SimplexEntropy { .. } => on_simplex(x, 1.0, tol),
            CompositeLmo::BoxLinear { lower, upper } | CompositeLmo::BoxL1reg { lower, upper, .. } => {
                x.len() == lower.len()
                    && x
                        .iter()
                        .zip(lower.iter().zip(upper))
                        .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
            }
            CompositeLmo::L1ballLinear { radius } => norm1(x) <= radius + tol * radius.max(1.0),
            CompositeLmo::LpnormSquared { p, ball_radius } => match ball_radius {
                Some(r) => norm_p(x, *p) <= r + tol * r.max(1.0),
                None => x.iter().all(|v| v.is_finite()),
            },
        }
    }

    /// `h(x)`, or `+∞` outside the feasible set.
    pub fn h_value(&self, x: &[f64]) -> f64 {
        if !self.is_feasible(x) {
            return f64::INFINITY;
        }
        match self {
            CompositeLmo::SimplexLinear { .. }
            | CompositeLmo::BoxLinear { .. }
            | CompositeLmo::L1ballLinear { .. } => 0.0,
            CompositeLmo::BoxL1reg { lambda, .. } => lambda * norm1(x),
            CompositeLmo::SimplexEntropy { scale } => {
                scale
                    * x.iter()
                        .map(|&v| {
                            let v = v.max(0.0);
                            v * v.max(ENTROPY_FLOOR).ln()
                        })
                        .sum::<f64>()
            }
            CompositeLmo::LpnormSquared { p, .. } => {
                let n = norm_p(x, *p);
                0.5 * n * n
            }
        }
    }

    /// Some element of `∂h(x)` (the zero vector for indicator kinds, which is
    /// in the normal cone at every feasible point).
    pub fn h_subgrad(&self, x: &[f64]) -> Option<Vec<f64>> {
        if !self.is_feasible(x) {
            return None;
        }
        let g = match self {
            CompositeLmo::SimplexLinear { .. }
            | CompositeLmo::BoxLinear { .. }
            | CompositeLmo::L1ballLinear { .. } => vec![0.0; x.len()],
            CompositeLmo::BoxL1reg { lambda, .. } => x
                .iter()
                .map(|&v| if v == 0.0 { 0.0 } else { lambda * v.signum() })
                .collect(),
            CompositeLmo::SimplexEntropy { scale } => x
                .iter()
                .map(|&v| scale * (1.0 + v.max(ENTROPY_FLOOR).ln()))
                .collect(),
            CompositeLmo::LpnormSquared { p, .. } => {
                let n = norm_p(x, *p);
                if n == 0.0 {
                    vec![0.0; x.len()]
                } else {
                    let s = n.powf(2.0 - p);
                    x.iter()
                        .map(|&v| s * v.signum() * v.abs().powf(p - 1.0))
                        .collect()
                }
            }
        };
        Some(g)
    }

    /// Subproblem objective `⟨g, u⟩ + h(u)`.
    pub fn objective(&self, g: &[f64], u: &[f64]) -> f64 {
        dot(g, u) + self.h_value(u)
    }

    pub fn solve(&self, g: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; g.len()];
        self.solve_into(g, &mut out)?;
        Ok(out)
    }

    /// Exact minimizer of `⟨g, u⟩ + h(u)` over the feasible set.
    pub fn solve_into(&self, g: &[f64], out: &mut [f64]) -> Result<()> {
        check_finite(g, "subproblem gradient")?;
        crate::error::check_dim(g.len(), out.len())?;
        if let Some(n) = self.fixed_dim() {
            crate::error::check_dim(n, g.len())?;
        }
        match self {
            CompositeLmo::SimplexLinear { radius } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[argmin_lowest(g)] = *radius;
            }
            CompositeLmo::BoxLinear { lower, upper } => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = if g[i] < 0.0 { upper[i] } else { lower[i] };
                }
            }
            CompositeLmo::L1ballLinear { radius } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                let i = argmax_abs_lowest(g);
                if g[i] != 0.0 {
                    out[i] = -radius * g[i].signum();
                }
            }
            CompositeLmo::BoxL1reg {
                lower,
                upper,
                lambda,
            } => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = box_l1_coordinate(g[i], *lambda, lower[i], upper[i]);
                }
            }
            CompositeLmo::SimplexEntropy { scale } => {
                // softmax(−g/scale), shifted by the max logit
                let shift = g.iter().fold(f64::INFINITY, |m, &v| m.min(v));
                let mut z = 0.0;
                for (o, &gi) in out.iter_mut().zip(g) {
                    *o = (-(gi - shift) / scale).exp();
                    z += *o;
                }
                out.iter_mut().for_each(|v| *v /= z);
            }
            CompositeLmo::LpnormSquared { p, ball_radius } => {
                if *p == 2.0 {
                    for (o, &gi) in out.iter_mut().zip(g) {
                        *o = -gi;
                    }
                } else {
                    let q = p / (p - 1.0);
                    let gq = norm_p(g, q);
                    if gq == 0.0 {
                        out.iter_mut().for_each(|v| *v = 0.0);
                    } else {
                        let s = gq.powf(2.0 - q);
                        for (o, &gi) in out.iter_mut().zip(g) {
                            *o = -gi.signum() * gi.abs().powf(q - 1.0) * s;
                        }
                    }
                }
                if let Some(r) = ball_radius {
                    let n = norm_p(out, *p);
                    if n > r * (1.0 + 1e-12) {
                        return Err(Error::BallGuard {
                            norm: n,
                            radius: *r,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Draws a feasible point. Unbounded sets are sampled from an isotropic
    /// Gaussian with standard deviation `unbounded_scale`.
    pub fn sample_point(&self, dim: usize, rng: &mut Stream, unbounded_scale: f64) -> Vec<f64> {
        match self {
            CompositeLmo::SimplexLinear { radius } => sample_simplex(dim, *radius, rng),
            CompositeLmo::SimplexEntropy { .. } => sample_simplex(dim, 1.0, rng),
            CompositeLmo::BoxLinear { lower, upper } | CompositeLmo::BoxL1reg { lower, upper, .. } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                .collect(),
            CompositeLmo::L1ballLinear { radius } => {
                // uniform on the cross-polytope: drop one coordinate of a
                // flat Dirichlet on n + 1 parts and attach random signs
                let w = sample_simplex(dim + 1, *radius, rng);
                w[..dim]
                    .iter()
                    .map(|v| if rng.random::<bool>() { *v } else { -v })
                    .collect()
            }
            CompositeLmo::LpnormSquared { p, ball_radius } => match ball_radius {
                Some(r) => {
                    // the ℓ2 ball of radius r·n^{1/2 − 1/p} sits inside the ℓp ball
                    let r2 = r * (dim as f64).powf(0.5 - 1.0 / p);
                    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
                    let nv = norm2(&v);
                    let radius = r2 * rng.random::<f64>().powf(1.0 / dim as f64);
                    v.iter_mut().for_each(|x| *x *= radius / nv);
                    v
                }
                None => (0..dim)
                    .map(|_| unbounded_scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
                    .collect(),
            },
        }
    }

    fn fixed_dim(&self) -> Option<usize> {
        match self {
            CompositeLmo::BoxLinear { lower, .. } | CompositeLmo::BoxL1reg { lower, .. } => {
                Some(lower.len())
            }
            _ => None,
        }
    }
}

fn check_box(lmo: &CompositeLmo, lower: &[f64], upper: &[f64], dim: usize) -> Result<()> {
    if lower.len() != dim || upper.len() != dim {
        return Err(Error::InvalidInput(format!(
            "{}: bounds have lengths {}/{} but dimension is {dim}",
            lmo.name(),
            lower.len(),
            upper.len()
        )));
    }
    if lower
        .iter()
        .zip(upper)
        .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
    {
        return Err(Error::InvalidInput(format!(
            "{}: every bound must be finite with lower ≤ upper",
            lmo.name()
        )));
    }
    Ok(())
}

fn on_simplex(x: &[f64], radius: f64, tol: f64) -> bool {
    let scale = radius.max(1.0);
    x.iter().all(|&v| v >= -tol * scale) && (x.iter().sum::<f64>() - radius).abs() <= tol * scale
}

fn argmin_lowest(g: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in g.iter().enumerate().skip(1) {
        if v < g[best] {
            best = i;
        }
    }
    best
}

fn argmax_abs_lowest(g: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in g.iter().enumerate().skip(1) {
        if v.abs() > g[best].abs() {
            best = i;
        }
    }
    best
}

/// Minimizer of `g·t + λ|t|` over `[l, u]`; the objective is piecewise
/// linear, so one of `{l, 0, u}` is optimal. Earlier candidates win ties.
fn box_l1_coordinate(g: f64, lambda: f64, l: f64, u: f64) -> f64 {
    let phi = |t: f64| g * t + lambda * t.abs();
    let mut best = l;
    let mut best_val = phi(l);
    let zero_inside = l <= 0.0 && 0.0 <= u;
    for t in [0.0, u] {
        if t == 0.0 && !zero_inside {
            continue;
        }
        let v = phi(t);
        if v < best_val {
            best = t;
            best_val = v;
        }
    }
    best
}

fn sample_simplex(dim: usize, radius: f64, rng: &mut Stream) -> Vec<f64> {
    let mut w: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v *= radius / s);
    w
}
