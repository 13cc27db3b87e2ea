//! Folded conditional gradient type method: two candidate steps per
//! iteration, keep the one with smaller objective.

use super::schedule::{self, StepsizeSchedule};
use super::{check_start, combine_into, probe, Branch, Clock, Counters, IterateRecord, Limits, Outcome, RunOptions, RunTrace, ScheduleConstants};
use crate::error::{Error, Result};
use crate::problems::ProblemSpec;

pub fn fcgt_constants(spec: &ProblemSpec, q: f64, n: u64) -> ScheduleConstants {
    let c = spec.constants();
    let mut out = ScheduleConstants {
        q: Some(q),
        beta: Some(schedule::fcgt_beta(n, q)),
        ..Default::default()
    };
    if let Some(d) = c.d_x {
        out.c_bar = Some(schedule::c_bar(c.nu, c.l_nu, d));
        if c.mu > 0.0 {
            out.c_nu = Some(schedule::c_nu(c.nu, c.l_nu, d, c.mu));
        }
    }
    out
}

pub fn check_fcgt_preconditions(spec: &ProblemSpec, q: f64) -> Vec<String> {
    let mut errs = StepsizeSchedule::FcgtFolded { q }.validate();
    if spec.constants().d_x.is_none() {
        errs.push("fcgt requires a bounded feasible set (finite D_X)".into());
    }
    errs
}

/// Runs the folded method for exactly `limits.max_iters` iterations unless
/// `g_k ≤ ε` first. `β = 1/(2N^q)` is fixed by `N`; `α_k` follows the
/// `6/(k+5)` schedule with `α₁ = 6/7`. Ties go to the `α` candidate.
pub fn run_fcgt(spec: &ProblemSpec, q: f64, x0: &[f64], limits: &Limits, opts: &RunOptions) -> Result<RunTrace> {
    let errs = check_fcgt_preconditions(spec, q);
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    let psi0 = check_start(spec, x0, limits)?;
    let n_iters = limits.max_iters;
    let constants = fcgt_constants(spec, q, n_iters);
    let beta = schedule::fcgt_beta(n_iters, q);
    let mut trace = RunTrace::start("fcgt", "fcgt-folded", spec, constants);

    let n = spec.dim();
    let mut counters = Counters {
        psi: 1,
        ..Default::default()
    };
    let mut y = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut hat = vec![0.0; n];
    let mut tilde = vec![0.0; n];
    let mut psi = psi0;
    let mut a_k = 1.0;
    trace
        .records
        .push(IterateRecord::initial(psi, &counters, opts.keep_iterates.then(|| y.clone())));
    let clock = Clock::new(limits.wall_clock);

    for k in 1..=n_iters {
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
            rec.beta = Some(beta);
            rec.y = opts.keep_iterates.then(|| y.clone());
            trace.records.push(rec);
            trace.outcome = Outcome::HitEpsilon;
            break;
        }
        let alpha = schedule::harmonic_alpha(k);
        combine_into(&y, &x, alpha, &mut hat);
        combine_into(&y, &x, beta, &mut tilde);
        let (v_hat, v_tilde) = match (spec.eval_psi(&hat), spec.eval_psi(&tilde)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                trace.fail(e);
                break;
            }
        };
        counters.psi += 2;
        let branch = if v_hat <= v_tilde {
            std::mem::swap(&mut y, &mut hat);
            psi = v_hat;
            Branch::Alpha
        } else {
            std::mem::swap(&mut y, &mut tilde);
            psi = v_tilde;
            Branch::Beta
        };
        a_k *= 1.0 - alpha / 2.0;
        let mut rec = IterateRecord::step(k, &p, psi, a_k, &counters);
        rec.alpha = Some(alpha);
        rec.beta = Some(beta);
        rec.branch = Some(branch);
        rec.y = opts.keep_iterates.then(|| y.clone());
        if k % opts.monitor_stride.max(1) == 0 {
            log::debug!("fcgt k={k} g={:.6e} branch={branch:?} psi={psi:.12e}", p.gap);
        }
        trace.records.push(rec);
    }
    trace.final_y = y;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{HolderPower, ProblemSpec};
    use crate::subproblems::CompositeLmo;
    use std::sync::Arc;

    #[test]
    fn fold_keeps_better_candidate_and_closed_form_accumulator() {
        let f = Arc::new(HolderPower::new(vec![0.2, 0.3, 0.5], 1.0, true).unwrap());
        let spec =
            ProblemSpec::with_defaults(f, CompositeLmo::SimplexLinear { radius: 1.0 }, 1.0, 1.0, true).unwrap();
        let t = run_fcgt(&spec, 0.5, &[1.0, 0.0, 0.0], &Limits::new(100, 1e-300), &RunOptions::default()).unwrap();
        assert_eq!(t.schedule_constants.beta, Some(0.05));
        assert_eq!(t.iterations(), 100);
        for w in t.records.windows(2) {
            let cur = &w[1];
            let c_bar = t.schedule_constants.c_bar.unwrap();
            assert!(cur.psi <= w[0].psi + c_bar * 0.05f64.powi(2) + 1e-9);
            let closed = schedule::harmonic_accumulator(cur.k);
            assert!((cur.a_k / closed - 1.0).abs() < 1e-12);
        }
        assert_eq!(t.records[1].alpha, Some(6.0 / 7.0));
    }

    #[test]
    fn unbounded_set_rejected() {
        let f = Arc::new(HolderPower::new(vec![0.0], 1.0, true).unwrap());
        let spec = ProblemSpec::with_defaults(
            f,
            CompositeLmo::LpnormSquared {
                p: 2.0,
                ball_radius: None,
            },
            1.0,
            1.0,
            true,
        )
        .unwrap();
        assert!(run_fcgt(&spec, 0.5, &[0.0], &Limits::new(10, 1e-3), &RunOptions::default())
            .unwrap_err()
            .is_validation());
    }
}
