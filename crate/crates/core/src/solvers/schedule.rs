//! Stepsize, batch-size and iteration-limit formulas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a solver chooses its stepsizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StepsizeSchedule {
    AdaptiveConvexH,
    AdaptiveStronglyConvexH,
    LineSearch { gamma: f64, delta: f64 },
    FcgtFolded { q: f64 },
    Constant { value: f64 },
    #[serde(rename = "harmonic-6-over-k-plus-5")]
    Harmonic,
    RscgtSchedule { case: RscgtCase },
}

impl StepsizeSchedule {
    pub fn name(&self) -> &'static str {
        match self {
            StepsizeSchedule::AdaptiveConvexH => "adaptive-convex-h",
            StepsizeSchedule::AdaptiveStronglyConvexH => "adaptive-strongly-convex-h",
            StepsizeSchedule::LineSearch { .. } => "line-search",
            StepsizeSchedule::FcgtFolded { .. } => "fcgt-folded",
            StepsizeSchedule::Constant { .. } => "constant",
            StepsizeSchedule::Harmonic => "harmonic-6-over-k-plus-5",
            StepsizeSchedule::RscgtSchedule { .. } => "rscgt-schedule",
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        match self {
            StepsizeSchedule::LineSearch { gamma, delta } => {
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    errs.push(format!("line-search gamma must lie in (0, 1), got {gamma}"));
                }
                if !(delta.is_finite() && *delta > 0.0) {
                    errs.push(format!("line-search delta must be positive, got {delta}"));
                }
            }
            StepsizeSchedule::FcgtFolded { q } => {
                if !(*q > 0.0 && *q < 1.0) {
                    errs.push(format!("fcgt q must lie in (0, 1), got {q}"));
                }
            }
            StepsizeSchedule::Constant { value } => {
                if !(*value > 0.0 && *value <= 1.0) {
                    errs.push(format!("constant stepsize must lie in (0, 1], got {value}"));
                }
            }
            _ => {}
        }
        errs
    }
}

/// The six parameter regimes of the randomized stochastic method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RscgtCase {
    NonconvexGeneral,
    ConvexGeneral,
    NonconvexStrong,
    ConvexStrong,
    SmoothStrongNonconvex,
    SmoothStrongConvex,
}

impl RscgtCase {
    pub const ALL: [RscgtCase; 6] = [
        RscgtCase::NonconvexGeneral,
        RscgtCase::ConvexGeneral,
        RscgtCase::NonconvexStrong,
        RscgtCase::ConvexStrong,
        RscgtCase::SmoothStrongNonconvex,
        RscgtCase::SmoothStrongConvex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RscgtCase::NonconvexGeneral => "nonconvex-general",
            RscgtCase::ConvexGeneral => "convex-general",
            RscgtCase::NonconvexStrong => "nonconvex-strong",
            RscgtCase::ConvexStrong => "convex-strong",
            RscgtCase::SmoothStrongNonconvex => "smooth-strong-nonconvex",
            RscgtCase::SmoothStrongConvex => "smooth-strong-convex",
        }
    }

    pub fn requires_convex_f(self) -> bool {
        matches!(
            self,
            RscgtCase::ConvexGeneral | RscgtCase::ConvexStrong | RscgtCase::SmoothStrongConvex
        )
    }

    pub fn requires_strong_h(self) -> bool {
        !matches!(self, RscgtCase::NonconvexGeneral | RscgtCase::ConvexGeneral)
    }

    pub fn requires_smooth(self) -> bool {
        matches!(self, RscgtCase::SmoothStrongNonconvex | RscgtCase::SmoothStrongConvex)
    }

    pub fn requires_bounded(self) -> bool {
        !self.requires_smooth()
    }

    /// Cases whose PMF weights are `α_k/A_k` rather than `α_k`.
    pub fn weights_by_accumulator(self) -> bool {
        self.requires_convex_f()
    }
}

/// `4L_ν/(1+ν)`, shared by both adaptive rules.
fn adaptive_coefficient(nu: f64, l_nu: f64) -> f64 {
    4.0 * l_nu / (1.0 + nu)
}

/// Adaptive rule for merely convex `h` on bounded `X`:
/// `α = (g/(g + (4L/(1+ν))‖x − y‖^{1+ν}))^{1/ν}`.
pub fn adaptive_convex_alpha(g: f64, dist: f64, nu: f64, l_nu: f64) -> f64 {
    let den = g + adaptive_coefficient(nu, l_nu) * dist.powf(1.0 + nu);
    if den <= 0.0 {
        return 1.0;
    }
    (g / den).powf(1.0 / nu).min(1.0)
}

/// Adaptive rule for strongly convex `h`:
/// `α = (g^{(1−ν)/2}/(g^{(1−ν)/2} + (4L/(1+ν))(2/μ)^{(1+ν)/2}))^{1/ν}`.
pub fn adaptive_strong_alpha(g: f64, nu: f64, l_nu: f64, mu: f64) -> f64 {
    let gp = g.powf(0.5 * (1.0 - nu));
    let den = gp + adaptive_coefficient(nu, l_nu) * (2.0 / mu).powf(0.5 * (1.0 + nu));
    (gp / den).powf(1.0 / nu).min(1.0)
}

/// Floor of the convex-`h` rule while `g > ε`: `D_X` replaces `‖x − y‖`.
pub fn alpha_bar_eps(epsilon: f64, nu: f64, l_nu: f64, d_x: f64) -> f64 {
    adaptive_convex_alpha(epsilon, d_x, nu, l_nu)
}

/// Floor of the strongly-convex-`h` rule while `g > ε`.
pub fn alpha_eps(epsilon: f64, nu: f64, l_nu: f64, mu: f64) -> f64 {
    adaptive_strong_alpha(epsilon, nu, l_nu, mu)
}

/// Iterations after which `4Δ(1 − α/2)^N/α ≤ ε`, using `−ln(1 − α/2) ≥ α/2`:
/// `⌈(2/α)·ln(4Δ/(αε))⌉`, at least 1.
pub fn linear_budget(alpha_floor: f64, psi0_gap: f64, epsilon: f64) -> u64 {
    let arg = 4.0 * psi0_gap / (alpha_floor * epsilon);
    if arg <= 1.0 {
        return 1;
    }
    ((2.0 / alpha_floor) * arg.ln()).ceil().max(1.0) as u64
}

/// `L̂_{ν,δ} = (L_ν/[2(1+ν)δ/(1−ν)]^{(1−ν)/2})^{2/(1+ν)}`, equal to `L₁` at `ν = 1`.
pub fn l_hat(nu: f64, l_nu: f64, delta: f64) -> f64 {
    if nu >= 1.0 {
        return l_nu;
    }
    let base = 2.0 * (1.0 + nu) * delta / (1.0 - nu);
    (l_nu / base.powf(0.5 * (1.0 - nu))).powf(2.0 / (1.0 + nu))
}

/// `α_{δ,ν} = (1/(1 + L̂/μ))^{(1+ν)/(2ν)}`.
pub fn alpha_delta(nu: f64, l_hat: f64, mu: f64) -> f64 {
    (1.0 / (1.0 + l_hat / mu)).powf((1.0 + nu) / (2.0 * nu))
}

/// `⌈log α_{δ,ν}/log γ⌉`, at least 1.
pub fn ls_trial_cap(alpha_delta: f64, gamma: f64) -> u32 {
    (alpha_delta.ln() / gamma.ln()).ceil().max(1.0) as u32
}

/// Hard cap on backtracking trials regardless of constants.
pub const LS_HARD_CAP: u32 = 128;

/// `α₁ = 6/7`, `α_k = 6/(k+5)` for `k ≥ 2`.
pub fn harmonic_alpha(k: u64) -> f64 {
    if k <= 1 {
        6.0 / 7.0
    } else {
        6.0 / (k as f64 + 5.0)
    }
}

/// Closed form of `∏_{i≤k}(1 − α_i/2)` under [`harmonic_alpha`].
pub fn harmonic_accumulator(k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let k = k as f64;
    480.0 / (7.0 * (k + 3.0) * (k + 4.0) * (k + 5.0))
}

/// `β = 1/(2N^q)`.
pub fn fcgt_beta(n: u64, q: f64) -> f64 {
    1.0 / (2.0 * (n as f64).powf(q))
}

/// `C̄_ν = L_ν D_X^{1+ν}/(1+ν)`.
pub fn c_bar(nu: f64, l_nu: f64, d_x: f64) -> f64 {
    l_nu * d_x.powf(1.0 + nu) / (1.0 + nu)
}

/// `C_ν = L_ν D_X^ν/(μ(1+ν))`.
pub fn c_nu(nu: f64, l_nu: f64, d_x: f64, mu: f64) -> f64 {
    l_nu * d_x.powf(nu) / (mu * (1.0 + nu))
}

fn ceil_count(v: f64, what: &str) -> Result<u64> {
    if !v.is_finite() || v < 0.0 || v > 1e15 {
        return Err(Error::InvalidInput(format!("{what} = {v:e} is not a usable count")));
    }
    Ok((v.ceil() as u64).max(1))
}

/// `N₀ = ⌈(2D_{f,X}/ε)^{(1+ν)/ν}⌉`.
pub fn n0(d_f_x: f64, epsilon: f64, nu: f64) -> Result<u64> {
    ceil_count((2.0 * d_f_x / epsilon).powf((1.0 + nu) / nu), "N0")
}

/// `b̄_ε = ⌈(1+ν)σ²D_{f,X}/(L_ν ε²)⌉`.
pub fn b_bar(sigma: f64, d_f_x: f64, l_nu: f64, epsilon: f64, nu: f64) -> Result<u64> {
    ceil_count((1.0 + nu) * sigma * sigma * d_f_x / (l_nu * epsilon * epsilon), "b")
}

/// `N₁ = ⌈4(216 L_ν D_X²/((1+ν)ε))^{1/ν}⌉`.
pub fn n1(l_nu: f64, d_x: f64, epsilon: f64, nu: f64) -> Result<u64> {
    ceil_count(4.0 * (216.0 * l_nu * d_x * d_x / ((1.0 + nu) * epsilon)).powf(1.0 / nu), "N1")
}

/// `b_k = ⌈((1+ν)σ(k+3)^ν/(2^{2ν+1.5} L_ν D_X))²⌉`.
pub fn b_convex_general(k: u64, sigma: f64, l_nu: f64, d_x: f64, nu: f64) -> Result<u64> {
    let r = (1.0 + nu) * sigma * (k as f64 + 3.0).powf(nu) / (2f64.powf(2.0 * nu + 1.5) * l_nu * d_x);
    ceil_count(r * r, "b_k")
}

/// `b_ε = ⌈2σ²/(με)⌉`.
pub fn b_eps(sigma: f64, mu: f64, epsilon: f64) -> Result<u64> {
    ceil_count(2.0 * sigma * sigma / (mu * epsilon), "b")
}

/// `N₂ = ⌈((14/(3ε))[Δ/3 + μ(6^ν C_ν/7^ν)²])^{(1+2ν)/(2ν)}⌉`.
pub fn n2(psi0_gap: f64, mu: f64, c_nu: f64, epsilon: f64, nu: f64) -> Result<u64> {
    let t = 6f64.powf(nu) * c_nu / 7f64.powf(nu);
    let inner = 14.0 / (3.0 * epsilon) * (psi0_gap / 3.0 + mu * t * t);
    ceil_count(inner.powf((1.0 + 2.0 * nu) / (2.0 * nu)), "N2")
}

/// `α = 6/(7 N₂^{1/(1+2ν)})`.
pub fn alpha_nonconvex_strong(n2: u64, nu: f64) -> f64 {
    6.0 / (7.0 * (n2 as f64).powf(1.0 / (1.0 + 2.0 * nu)))
}

/// `N₃ = ⌈(56·36^ν μ C_ν²/ε)^{1/(2ν)}⌉`.
pub fn n3(mu: f64, c_nu: f64, epsilon: f64, nu: f64) -> Result<u64> {
    ceil_count((56.0 * 36f64.powf(nu) * mu * c_nu * c_nu / epsilon).powf(1.0 / (2.0 * nu)), "N3")
}

/// `ᾱ = μ/(L₁ + μ)`.
pub fn alpha_smooth(mu: f64, l1: f64) -> f64 {
    mu / (l1 + mu)
}

/// `N₄ = ⌈4(μ+L₁)Δ/(3με)⌉`.
pub fn n4(mu: f64, l1: f64, psi0_gap: f64, epsilon: f64) -> Result<u64> {
    ceil_count(4.0 * (mu + l1) * psi0_gap / (3.0 * mu * epsilon), "N4")
}

/// `N₅ = ⌈(2(μ+L₁)/μ)·ln(4(μ+L₁)Δ/(με))⌉`.
pub fn n5(mu: f64, l1: f64, psi0_gap: f64, epsilon: f64) -> Result<u64> {
    let arg = 4.0 * (mu + l1) * psi0_gap / (mu * epsilon);
    ceil_count(2.0 * (mu + l1) / mu * arg.max(1.0).ln(), "N5")
}
