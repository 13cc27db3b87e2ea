//! Randomized stochastic conditional gradient type method: mini-batch
//! gradients and a random termination index.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::schedule::{self, RscgtCase};
use super::{check_start, combine_into, probe, sample_r, Clock, Counters, IterateRecord, Limits, Outcome, RunOptions, RunTrace, ScheduleConstants};
use crate::error::{Error, Result};
use crate::problems::{ProblemSpec, StochasticOracle};
use crate::rng::{child_stream, StreamRole};

/// Largest iteration limit a plan may derive.
pub const MAX_PLAN_LEN: u64 = 50_000_000;

/// Target accuracy and the quantities the schedules need beyond the
/// problem constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RscgtInputs {
    pub epsilon: f64,
    /// Upper bound on `Ψ(x₀) − Ψ*`; derived from a known `Ψ*` when absent.
    pub psi0_gap: Option<f64>,
    /// `D_{f,X} ≥ Ψ(x₀) − Ψ* + 2L_ν D_X²/(1+ν)`; derived when absent.
    pub d_f_x: Option<f64>,
}

/// The stepsizes, batch sizes and PMF weights for one case.
#[derive(Debug, Clone, PartialEq)]
pub struct RscgtPlan {
    pub case: Option<RscgtCase>,
    pub alphas: Vec<f64>,
    pub batches: Vec<u64>,
    pub weights: Vec<f64>,
    pub constants: ScheduleConstants,
}

fn resolved_gap(spec: &ProblemSpec, inputs: &RscgtInputs, x0: &[f64]) -> Result<Option<f64>> {
    if let Some(g) = inputs.psi0_gap {
        return Ok(Some(g));
    }
    match spec.constants().psi_star {
        Some(s) => Ok(Some((spec.eval_psi(x0)? - s).max(0.0))),
        None => Ok(None),
    }
}

pub fn check_rscgt_preconditions(
    spec: &ProblemSpec,
    case: RscgtCase,
    sigma: f64,
    inputs: &RscgtInputs,
    psi0_gap: Option<f64>,
) -> Vec<String> {
    let c = spec.constants();
    let name = case.name();
    let mut errs = Vec::new();
    if !(inputs.epsilon.is_finite() && inputs.epsilon > 0.0) {
        errs.push(format!("epsilon must be positive, got {}", inputs.epsilon));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        errs.push(format!("sigma must be nonnegative, got {sigma}"));
    }
    if case.requires_strong_h() && c.mu <= 0.0 {
        errs.push(format!("rscgt case {name} requires mu > 0"));
    }
    if case.requires_smooth() && c.nu != 1.0 {
        errs.push(format!("rscgt case {name} requires nu = 1, got {}", c.nu));
    }
    if case.requires_convex_f() && !c.convex_f {
        errs.push(format!("rscgt case {name} requires f declared convex"));
    }
    if case.requires_bounded() && c.d_x.is_none() {
        errs.push(format!("rscgt case {name} requires a bounded feasible set (finite D_X)"));
    }
    match case {
        RscgtCase::NonconvexGeneral => {
            if inputs.d_f_x.is_none() && (psi0_gap.is_none() || c.d_x.is_none()) {
                errs.push("rscgt case nonconvex-general requires d_f_x (or psi_star to derive it)".into());
            }
        }
        RscgtCase::NonconvexStrong | RscgtCase::SmoothStrongNonconvex | RscgtCase::SmoothStrongConvex => {
            if psi0_gap.is_none() {
                errs.push(format!("rscgt case {name} requires psi0_gap (or psi_star to derive it)"));
            }
        }
        _ => {}
    }
    errs
}

impl RscgtPlan {
    /// Derives `(α_k, b_k, N)` and the PMF for `case`.
    pub fn from_case(
        spec: &ProblemSpec,
        case: RscgtCase,
        sigma: f64,
        inputs: &RscgtInputs,
        x0: &[f64],
    ) -> Result<Self> {
        let psi0_gap = resolved_gap(spec, inputs, x0)?;
        let errs = check_rscgt_preconditions(spec, case, sigma, inputs, psi0_gap);
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        let c = spec.constants();
        let (nu, l, mu, eps) = (c.nu, c.l_nu, c.mu, inputs.epsilon);
        let mut k = ScheduleConstants {
            rscgt_case: Some(case),
            psi0_gap,
            ..Default::default()
        };
        let n;
        let mut alphas: Vec<f64>;
        let batches: Vec<u64>;
        match case {
            RscgtCase::NonconvexGeneral => {
                let d = c.d_x.expect("checked");
                let dfx = match inputs.d_f_x {
                    Some(v) => v,
                    None => psi0_gap.expect("checked") + 2.0 * l * d * d / (1.0 + nu),
                };
                if d < 1.0 {
                    k.notes.push(format!(
                        "D_X = {d} < 1 lies outside the hypothesis D_X >= 1 of the nonconvex-general bound"
                    ));
                }
                k.d_f_x = Some(dfx);
                n = guard(schedule::n0(dfx, eps, nu)?)?;
                k.n0 = Some(n);
                let a = 1.0 / (n as f64).powf(1.0 / (1.0 + nu));
                alphas = vec![a; n as usize];
                batches = vec![schedule::b_bar(sigma, dfx, l, eps, nu)?; n as usize];
            }
            RscgtCase::ConvexGeneral => {
                let d = c.d_x.expect("checked");
                n = guard(schedule::n1(l, d, eps, nu)?)?;
                k.n1 = Some(n);
                alphas = (1..=n).map(schedule::harmonic_alpha).collect();
                batches = (1..=n)
                    .map(|i| schedule::b_convex_general(i, sigma, l, d, nu))
                    .collect::<Result<_>>()?;
            }
            RscgtCase::NonconvexStrong => {
                let d = c.d_x.expect("checked");
                let cn = schedule::c_nu(nu, l, d, mu);
                k.c_nu = Some(cn);
                n = guard(schedule::n2(psi0_gap.expect("checked"), mu, cn, eps, nu)?)?;
                k.n2 = Some(n);
                alphas = vec![schedule::alpha_nonconvex_strong(n, nu); n as usize];
                batches = vec![schedule::b_eps(sigma, mu, eps)?; n as usize];
            }
            RscgtCase::ConvexStrong => {
                let d = c.d_x.expect("checked");
                let cn = schedule::c_nu(nu, l, d, mu);
                k.c_nu = Some(cn);
                n = guard(schedule::n3(mu, cn, eps, nu)?)?;
                k.n3 = Some(n);
                alphas = (1..=n).map(schedule::harmonic_alpha).collect();
                batches = vec![schedule::b_eps(sigma, mu, eps)?; n as usize];
            }
            RscgtCase::SmoothStrongNonconvex | RscgtCase::SmoothStrongConvex => {
                let gap = psi0_gap.expect("checked");
                n = if case == RscgtCase::SmoothStrongNonconvex {
                    let n = guard(schedule::n4(mu, l, gap, eps)?)?;
                    k.n4 = Some(n);
                    n
                } else {
                    let n = guard(schedule::n5(mu, l, gap, eps)?)?;
                    k.n5 = Some(n);
                    n
                };
                alphas = vec![schedule::alpha_smooth(mu, l); n as usize];
                batches = vec![schedule::b_eps(sigma, mu, eps)?; n as usize];
            }
        }
        alphas.truncate(n as usize);
        let weights = pmf_weights(&alphas, case.weights_by_accumulator());
        k.batch_first = batches.first().copied();
        k.batch_last = batches.last().copied();
        if alphas.iter().all(|a| *a == alphas[0]) {
            k.constant_alpha = Some(alphas[0]);
        }
        Ok(Self {
            case: Some(case),
            alphas,
            batches,
            weights,
            constants: k,
        })
    }

    /// Constant stepsize and batch size with the uniform PMF over `1..=n`.
    pub fn constant(alpha: f64, batch: u64, n: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) || batch == 0 || n == 0 {
            return Err(Error::InvalidInput("constant plan needs alpha in (0,1], batch >= 1, n >= 1".into()));
        }
        guard(n)?;
        let alphas = vec![alpha; n as usize];
        Ok(Self {
            case: None,
            weights: pmf_weights(&alphas, false),
            alphas,
            batches: vec![batch; n as usize],
            constants: ScheduleConstants {
                constant_alpha: Some(alpha),
                batch_first: Some(batch),
                batch_last: Some(batch),
                ..Default::default()
            },
        })
    }

    pub fn len(&self) -> u64 {
        self.alphas.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `Σ_{k ≤ r} b_k`.
    pub fn so_calls_through(&self, r: u64) -> u64 {
        self.batches.iter().take(r as usize).sum()
    }
}

fn guard(n: u64) -> Result<u64> {
    if n > MAX_PLAN_LEN {
        return Err(Error::Validation(vec![format!(
            "derived iteration limit N = {n} exceeds the supported maximum {MAX_PLAN_LEN}"
        )]));
    }
    Ok(n)
}

/// `α_k` (uniform for constant stepsizes) or `α_k/A_k`.
pub fn pmf_weights(alphas: &[f64], by_accumulator: bool) -> Vec<f64> {
    if !by_accumulator {
        return alphas.to_vec();
    }
    let mut a = 1.0;
    alphas
        .iter()
        .map(|&al| {
            a *= 1.0 - al / 2.0;
            al / a
        })
        .collect()
}

/// Derives the plan for `case` and runs one replication.
pub fn run_rscgt(
    spec: &ProblemSpec,
    oracle: &StochasticOracle,
    case: RscgtCase,
    inputs: &RscgtInputs,
    x0: &[f64],
    replication: u64,
    opts: &RunOptions,
) -> Result<RunTrace> {
    let plan = RscgtPlan::from_case(spec, case, oracle.sigma(), inputs, x0)?;
    run_rscgt_with_plan(spec, oracle, &plan, x0, replication, opts, None)
}

/// Samples `R` from the plan's PMF and runs exactly `R` iterations with
/// mini-batch gradients. The recorded `g_k` uses the true gradient and a
/// separate subproblem solve; neither is counted as an oracle call.
pub fn run_rscgt_with_plan(
    spec: &ProblemSpec,
    oracle: &StochasticOracle,
    plan: &RscgtPlan,
    x0: &[f64],
    replication: u64,
    opts: &RunOptions,
    wall_clock: Option<Duration>,
) -> Result<RunTrace> {
    crate::error::check_dim(spec.dim(), oracle.dim())?;
    let limits = Limits {
        max_iters: plan.len().max(1),
        epsilon: f64::MIN_POSITIVE,
        wall_clock,
    };
    let psi0 = check_start(spec, x0, &limits)?;
    let r = sample_r(
        &plan.weights,
        &mut child_stream(oracle.seed(), replication, StreamRole::Termination),
    )?;
    let mut constants = plan.constants.clone();
    constants.sampled_r = Some(r);
    let schedule = plan.case.map_or("constant", |c| c.name());
    let mut trace = RunTrace::start("rscgt", schedule, spec, constants);

    let n = spec.dim();
    let mut noise = oracle.stream(replication);
    let mut counters = Counters::default();
    let mut y = x0.to_vec();
    let mut gbar = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut true_grad = vec![0.0; n];
    let mut x_true = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut a_k = 1.0;
    trace
        .records
        .push(IterateRecord::initial(psi0, &counters, opts.keep_iterates.then(|| y.clone())));
    let clock = Clock::new(wall_clock);
    let stride = opts.monitor_stride.max(1);

    for k in 1..=r {
        if clock.expired() {
            trace.outcome = Outcome::WallClock;
            break;
        }
        let b = plan.batches[k as usize - 1];
        let alpha = plan.alphas[k as usize - 1];
        if let Err(e) = oracle.minibatch_grad_into(&y, b as usize, &mut noise, &mut gbar) {
            trace.fail(e);
            break;
        }
        counters.so += b;
        if let Err(e) = spec.lmo().solve_into(&gbar, &mut x) {
            trace.fail(e);
            break;
        }
        counters.lmo += 1;
        let monitored = if k % stride == 0 || k == r {
            spec.f_grad_into(&y, &mut true_grad);
            match probe(spec, &y, &true_grad, &mut x_true) {
                Ok(p) => Some(p),
                Err(e) => {
                    trace.fail(e);
                    break;
                }
            }
        } else {
            None
        };
        combine_into(&y, &x, alpha, &mut next);
        let psi = match spec.eval_psi(&next) {
            Ok(v) => v,
            Err(e) => {
                trace.fail(e);
                break;
            }
        };
        std::mem::swap(&mut y, &mut next);
        a_k *= 1.0 - alpha / 2.0;
        let mut rec = IterateRecord::initial(psi, &counters, opts.keep_iterates.then(|| y.clone()));
        rec.k = k;
        rec.a_k = a_k;
        rec.alpha = Some(alpha);
        rec.batch = Some(b);
        if let Some(p) = monitored {
            rec.g_k = Some(p.gap);
            rec.raw_gap = Some(p.raw);
            rec.grad_map_norm = Some(p.grad_map_norm);
            if k % stride == 0 {
                log::debug!("rscgt k={k} g={:.6e} b={b} psi={psi:.12e}", p.gap);
            }
        }
        trace.records.push(rec);
    }
    trace.final_y = y;
    Ok(trace)
}
