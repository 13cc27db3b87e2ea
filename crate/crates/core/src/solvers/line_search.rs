//! Conditional gradient type method with a backtracking line search that
//! needs no smoothness constants.

use super::schedule::{self, StepsizeSchedule, LS_HARD_CAP};
use super::{check_start, combine_into, probe, Clock, Counters, IterateRecord, Limits, Outcome, RunOptions, RunTrace, ScheduleConstants};
use crate::error::{Error, Result};
use crate::problems::ProblemSpec;

/// `L̂_{ν,δ}`, `α_{δ,ν}` and the per-iteration trial bound. These use the
/// declared `(ν, L_ν, μ)` for reporting only; the search itself does not.
pub fn line_search_constants(spec: &ProblemSpec, gamma: f64, delta: f64) -> ScheduleConstants {
    let c = spec.constants();
    let mut out = ScheduleConstants {
        gamma: Some(gamma),
        delta: Some(delta),
        ..Default::default()
    };
    if c.mu > 0.0 {
        let lh = schedule::l_hat(c.nu, c.l_nu, delta);
        let ad = schedule::alpha_delta(c.nu, lh, c.mu);
        out.l_hat = Some(lh);
        out.alpha_delta = Some(ad);
        out.ls_trial_cap = Some(schedule::ls_trial_cap(ad, gamma));
    }
    out
}

pub fn check_ls_preconditions(spec: &ProblemSpec, gamma: f64, delta: f64) -> Vec<String> {
    let mut errs = StepsizeSchedule::LineSearch { gamma, delta }.validate();
    if spec.constants().mu <= 0.0 {
        errs.push("cgt-ls requires a strongly convex regularizer (mu > 0)".into());
    }
    errs
}

/// Runs the line-search variant. Per iteration the subproblem is solved
/// once; `α_k = γ^t` for the smallest `t ≥ 1` with
/// `Ψ(y_k) ≤ Ψ(y_{k−1}) − α_k g_k + δ α_k`.
pub fn run_cgt_ls(
    spec: &ProblemSpec,
    gamma: f64,
    delta: f64,
    x0: &[f64],
    limits: &Limits,
    opts: &RunOptions,
) -> Result<RunTrace> {
    let errs = check_ls_preconditions(spec, gamma, delta);
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    let psi0 = check_start(spec, x0, limits)?;
    let constants = line_search_constants(spec, gamma, delta);
    let mut trace = RunTrace::start("cgt-ls", "line-search", spec, constants);

    let n = spec.dim();
    let mut counters = Counters {
        psi: 1,
        ..Default::default()
    };
    let mut y = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut psi = psi0;
    let mut a_k = 1.0;
    trace
        .records
        .push(IterateRecord::initial(psi, &counters, opts.keep_iterates.then(|| y.clone())));
    let clock = Clock::new(limits.wall_clock);

    'outer: for k in 1..=limits.max_iters {
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
        let mut rejected = Vec::new();
        let mut accepted = None;
        for t in 1..=LS_HARD_CAP {
            let alpha = gamma.powi(t as i32);
            combine_into(&y, &x, alpha, &mut trial);
            let v = match spec.eval_psi(&trial) {
                Ok(v) => v,
                Err(e) => {
                    trace.fail(e);
                    break 'outer;
                }
            };
            counters.psi += 1;
            if v <= psi - alpha * p.gap + delta * alpha {
                accepted = Some((t, alpha, v));
                break;
            }
            rejected.push(v);
        }
        let Some((t, alpha, v)) = accepted else {
            trace.fail(Error::LineSearchCap {
                k: k as usize,
                cap: LS_HARD_CAP,
            });
            break;
        };
        std::mem::swap(&mut y, &mut trial);
        psi = v;
        a_k *= 1.0 - alpha / 2.0;
        let mut rec = IterateRecord::step(k, &p, psi, a_k, &counters);
        rec.alpha = Some(alpha);
        rec.t_k = Some(t);
        rec.rejected_psi = rejected;
        rec.y = opts.keep_iterates.then(|| y.clone());
        if k % opts.monitor_stride.max(1) == 0 {
            log::debug!("cgt-ls k={k} g={:.6e} t={t} psi={psi:.12e}", p.gap);
        }
        trace.records.push(rec);
    }
    trace.final_y = y;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{IndefiniteQuadratic, ProblemConstants};
    use crate::linalg::{DenseMatrix, NormKind};
    use crate::subproblems::CompositeLmo;
    use std::sync::Arc;

    fn spec(mu_declared: f64, h: CompositeLmo) -> ProblemSpec {
        let q = DenseMatrix::from_col_major(2, 2, vec![1.0, 0.0, 0.0, 0.5]).unwrap();
        let f = Arc::new(IndefiniteQuadratic::new(q, vec![1.0, -1.0]).unwrap());
        ProblemSpec::new(
            f,
            h,
            ProblemConstants {
                nu: 1.0,
                l_nu: 1.0,
                mu: mu_declared,
                d_x: None,
                psi_star: None,
                m_f: None,
                m_h: None,
                convex_f: true,
            },
            NormKind::L2,
        )
        .unwrap()
    }

    #[test]
    fn every_trial_accepted_when_floor_is_half() {
        let s = spec(
            1.0,
            CompositeLmo::LpnormSquared {
                p: 2.0,
                ball_radius: None,
            },
        );
        let t = run_cgt_ls(&s, 0.5, 0.025, &[2.0, 2.0], &Limits::new(200, 1e-10), &RunOptions::default()).unwrap();
        assert_eq!(t.schedule_constants.alpha_delta, Some(0.5));
        assert_eq!(t.schedule_constants.ls_trial_cap, Some(1));
        assert!(t.records[1..].iter().all(|r| r.t_k.is_none_or(|t| t == 1)));
        for w in t.records.windows(2) {
            let (prev, cur) = (&w[0], &w[1]);
            if let (Some(a), Some(g)) = (cur.alpha, cur.g_k) {
                assert!(cur.psi <= prev.psi - a * g + 0.025 * a);
            }
        }
    }

    #[test]
    fn requires_positive_mu() {
        let s = spec(0.0, CompositeLmo::L1ballLinear { radius: 1.0 });
        let e = run_cgt_ls(&s, 0.5, 0.1, &[0.0, 0.0], &Limits::new(10, 1e-3), &RunOptions::default()).unwrap_err();
        assert!(e.is_validation());
        assert!(e.to_string().contains("mu > 0"));
    }
}
