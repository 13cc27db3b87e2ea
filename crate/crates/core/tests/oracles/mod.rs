//! Reference computations written independently of the library: derivative
//! free minimizers for the composite subproblem and plain-loop formulas.
#![allow(dead_code)]

use cgt_core::subproblems::CompositeLmo;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimizer of a unimodal `f` on `[a, b]`.
pub fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let (lo, hi) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    // linear objectives put the minimizer at an endpoint
    let mid = 0.5 * (a + b);
    [mid, lo, hi]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap()
}

/// `⟨g, u⟩ + h(u)` evaluated from the written-out regularizer formulas.
pub fn composite_objective(lmo: &CompositeLmo, g: &[f64], u: &[f64]) -> f64 {
    let lin: f64 = g.iter().zip(u).map(|(a, b)| a * b).sum();
    let h = match lmo {
        CompositeLmo::BoxL1reg { lambda, .. } => lambda * u.iter().map(|v| v.abs()).sum::<f64>(),
        CompositeLmo::SimplexEntropy { scale } => {
            scale * u.iter().map(|v| if *v > 0.0 { v * v.ln() } else { 0.0 }).sum::<f64>()
        }
        CompositeLmo::LpnormSquared { p, .. } => {
            0.5 * u.iter().map(|v| v.abs().powf(*p)).sum::<f64>().powf(2.0 / p)
        }
        _ => 0.0,
    };
    lin + h
}

/// Minimizes over convex weights on `vertices` by pairwise mass transfer with
/// a golden-section line search per pair.
fn vertex_hull_minimize(obj: &dyn Fn(&[f64]) -> f64, vertices: &[Vec<f64>]) -> Vec<f64> {
    let m = vertices.len();
    let n = vertices[0].len();
    let point = |w: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (wi, v) in w.iter().zip(vertices) {
            for (xj, vj) in x.iter_mut().zip(v) {
                *xj += wi * vj;
            }
        }
        x
    };
    let mut w = vec![1.0 / m as f64; m];
    let mut best = obj(&point(&w));
    for _ in 0..400 {
        let before = best;
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let (wi, wj) = (w[i], w[j]);
                let moved = |t: f64| {
                    let mut v = w.clone();
                    v[i] = wi - t;
                    v[j] = wj + t;
                    obj(&point(&v))
                };
                let t = golden(moved, -wj, wi);
                let val = moved(t);
                if val < best {
                    w[i] = wi - t;
                    w[j] = wj + t;
                    best = val;
                }
            }
        }
        if before - best <= 1e-16 * (1.0 + best.abs()) {
            break;
        }
    }
    point(&w)
}

/// Cyclic coordinate golden-section search on `[lo_i, hi_i]`.
fn coordinate_minimize(obj: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], start: Vec<f64>, sweeps: usize) -> Vec<f64> {
    let mut x = start;
    let mut best = obj(&x);
    for _ in 0..sweeps {
        let before = best;
        for i in 0..x.len() {
            let base = x.clone();
            let line = |t: f64| {
                let mut v = base.clone();
                v[i] = t;
                obj(&v)
            };
            let t = golden(line, lo[i], hi[i]);
            if line(t) <= best {
                x[i] = t;
                best = line(t);
            }
        }
        if before - best <= 1e-17 * (1.0 + best.abs()) {
            break;
        }
    }
    x
}

/// Generic minimizer of `⟨g, u⟩ + h(u)` over the feasible set, using only
/// objective evaluations.
pub fn generic_minimize(lmo: &CompositeLmo, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let obj = |u: &[f64]| composite_objective(lmo, g, u);
    match lmo {
        CompositeLmo::SimplexLinear { radius } => {
            let vs: Vec<Vec<f64>> = (0..n).map(|i| unit(n, i, *radius)).collect();
            vertex_hull_minimize(&obj, &vs)
        }
        CompositeLmo::SimplexEntropy { .. } => {
            let vs: Vec<Vec<f64>> = (0..n).map(|i| unit(n, i, 1.0)).collect();
            vertex_hull_minimize(&obj, &vs)
        }
        CompositeLmo::L1ballLinear { radius } => {
            let vs: Vec<Vec<f64>> = (0..n)
                .flat_map(|i| [unit(n, i, *radius), unit(n, i, -radius)])
                .collect();
            vertex_hull_minimize(&obj, &vs)
        }
        CompositeLmo::BoxLinear { lower, upper } | CompositeLmo::BoxL1reg { lower, upper, .. } => {
            let start: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect();
            coordinate_minimize(&obj, lower, upper, start, 5)
        }
        CompositeLmo::LpnormSquared { p, ball_radius } => {
            // the unconstrained minimizer has ‖u‖_p = ‖g‖_q
            let q = p / (p - 1.0);
            let gq = g.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q);
            let b = gq * 1.01 + 1e-12;
            let free = coordinate_minimize(&obj, &vec![-b; n], &vec![b; n], vec![0.0; n], 20_000);
            // on each sphere ‖u‖_p = ρ the best direction is the same, so the
            // ball only shortens the free minimizer
            let np = free.iter().map(|v| v.abs().powf(*p)).sum::<f64>().powf(1.0 / p);
            match ball_radius {
                Some(r) if np > *r => free.iter().map(|v| v * r / np).collect(),
                _ => free,
            }
        }
    }
}

fn unit(n: usize, i: usize, s: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = s;
    v
}

/// `∏_{i≤k} (1 − α_i/2)` by a plain loop.
pub fn accumulator(alphas: &[f64]) -> f64 {
    alphas.iter().fold(1.0, |a, x| a * (1.0 - x / 2.0))
}

/// Sample mean of `‖v‖²` over the draws.
pub fn mean_sq_norm(draws: &[Vec<f64>]) -> f64 {
    draws.iter().map(|d| d.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() / draws.len() as f64
}

/// Least-squares slope of `ln y` on `ln x` and its R².
pub fn loglog_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    (sxy / sxx, sxy * sxy / (sxx * syy))
}
