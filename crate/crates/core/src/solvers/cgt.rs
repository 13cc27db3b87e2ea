//! Conditional gradient type method with parameter-dependent stepsizes.

use super::schedule::{self, StepsizeSchedule};
use super::{check_start, combine_into, probe, Clock, Counters, IterateRecord, Limits, Outcome, RunOptions, RunTrace, ScheduleConstants};
use crate::error::{Error, Result};
use crate::problems::ProblemSpec;

/// Constants for the deterministic schedules: the stepsize floors and, when
/// `Ψ(x₀) − Ψ*` can be bounded, the linear-rate iteration budget.
pub fn cgt_constants(spec: &ProblemSpec, schedule: &StepsizeSchedule, epsilon: f64, psi0_gap: Option<f64>) -> ScheduleConstants {
    let c = spec.constants();
    let mut out = ScheduleConstants::default();
    match schedule {
        StepsizeSchedule::AdaptiveConvexH => {
            if let Some(d) = c.d_x {
                out.alpha_bar_eps = Some(schedule::alpha_bar_eps(epsilon, c.nu, c.l_nu, d));
            }
        }
        StepsizeSchedule::AdaptiveStronglyConvexH => {
            if c.mu > 0.0 {
                out.alpha_eps = Some(schedule::alpha_eps(epsilon, c.nu, c.l_nu, c.mu));
            }
        }
        StepsizeSchedule::Constant { value } => out.constant_alpha = Some(*value),
        _ => {}
    }
    let floor = out.alpha_bar_eps.or(out.alpha_eps);
    if let (Some(a), Some(gap)) = (floor, psi0_gap) {
        out.psi0_gap = Some(gap);
        if c.convex_f {
            out.linear_budget = Some(schedule::linear_budget(a, gap, epsilon));
        }
    }
    out
}

pub fn check_cgt_preconditions(spec: &ProblemSpec, schedule: &StepsizeSchedule) -> Vec<String> {
    let c = spec.constants();
    let mut errs = schedule.validate();
    match schedule {
        StepsizeSchedule::AdaptiveConvexH => {
            if c.d_x.is_none() {
                errs.push("adaptive-convex-h requires a bounded feasible set (finite D_X)".into());
            }
        }
        StepsizeSchedule::AdaptiveStronglyConvexH => {
            if c.mu <= 0.0 {
                errs.push("adaptive-strongly-convex-h requires mu > 0".into());
            }
        }
        StepsizeSchedule::Constant { .. } | StepsizeSchedule::Harmonic => {}
        other => errs.push(format!("schedule {} is not valid for cgt", other.name())),
    }
    errs
}

/// Runs the conditional gradient type method from `x0`.
///
/// Each iteration evaluates the gradient, solves the subproblem, measures
/// the gap, chooses `α_k` and takes the convex combination. The run stops
/// at the first `g_k ≤ ε` without taking that step.
pub fn run_cgt(
    spec: &ProblemSpec,
    schedule: &StepsizeSchedule,
    x0: &[f64],
    limits: &Limits,
    opts: &RunOptions,
) -> Result<RunTrace> {
    let errs = check_cgt_preconditions(spec, schedule);
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    let psi0 = check_start(spec, x0, limits)?;
    let c = spec.constants();
    let psi0_gap = c.psi_star.map(|s| psi0 - s);
    let constants = cgt_constants(spec, schedule, limits.epsilon, psi0_gap);
    let mut trace = RunTrace::start("cgt", schedule.name(), spec, constants);

    let n = spec.dim();
    let mut counters = Counters::default();
    let mut y = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut psi = psi0;
    let mut a_k = 1.0;
    trace
        .records
        .push(IterateRecord::initial(psi, &counters, opts.keep_iterates.then(|| y.clone())));
    let clock = Clock::new(limits.wall_clock);

    for k in 1..=limits.max_iters {
        if clock.expired() {
            trace.outcome = Outcome::WallClock;
            break;
        }
        spec.f_grad_into(&y, &mut grad);
        counters.grad += 1;
        let p = match probe(spec, &y, &grad, &mut x) {
            Ok(p) => p,
            Err(e) => {
                trace.fail(e);
                break;
            }
        };
        counters.lmo += 1;
        if p.gap <= limits.epsilon {
            let mut rec = IterateRecord::step(k, &p, psi, a_k, &counters);
            rec.y = opts.keep_iterates.then(|| y.clone());
            trace.records.push(rec);
            trace.outcome = Outcome::HitEpsilon;
            break;
        }
        let alpha = match schedule {
            StepsizeSchedule::AdaptiveConvexH => schedule::adaptive_convex_alpha(p.gap, p.grad_map_norm, c.nu, c.l_nu),
            StepsizeSchedule::AdaptiveStronglyConvexH => schedule::adaptive_strong_alpha(p.gap, c.nu, c.l_nu, c.mu),
            StepsizeSchedule::Constant { value } => *value,
            StepsizeSchedule::Harmonic => schedule::harmonic_alpha(k),
            _ => unreachable!("rejected by precondition check"),
        };
        combine_into(&y, &x, alpha, &mut next);
        psi = match spec.eval_psi(&next) {
            Ok(v) => v,
            Err(e) => {
                trace.fail(e);
                break;
            }
        };
        std::mem::swap(&mut y, &mut next);
        a_k *= 1.0 - alpha / 2.0;
        let mut rec = IterateRecord::step(k, &p, psi, a_k, &counters);
        rec.alpha = Some(alpha);
        rec.y = opts.keep_iterates.then(|| y.clone());
        if k % opts.monitor_stride.max(1) == 0 {
            log::debug!("cgt k={k} g={:.6e} alpha={alpha:.6e} psi={psi:.12e}", p.gap);
        }
        trace.records.push(rec);
    }
    trace.final_y = y;
    Ok(trace)
}
