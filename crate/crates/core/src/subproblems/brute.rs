//! Grid-search reference solver for low-dimensional subproblems.

use super::CompositeLmo;
use crate::error::{check_finite, Error, Result};
use crate::linalg::{norm1, norm_p};

pub const MAX_BRUTE_FORCE_DIM: usize = 4;

/// Minimizes `⟨g, u⟩ + h(u)` over a feasible grid with `resolution` points
/// per axis. Simplex kinds use the barycentric lattice, ball kinds filter a
/// tensor grid over their bounding box, and the unconstrained squared norm is
/// gridded over `[−‖g‖_q, ‖g‖_q]ⁿ`, which contains its minimizer.
pub fn brute_force_solve(lmo: &CompositeLmo, g: &[f64], resolution: usize) -> Result<Vec<f64>> {
    let dim = g.len();
    if dim == 0 || dim > MAX_BRUTE_FORCE_DIM {
        return Err(Error::InvalidInput(format!(
            "brute force supports dimensions 1..={MAX_BRUTE_FORCE_DIM}, got {dim}"
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidInput("resolution must be at least 2".into()));
    }
    check_finite(g, "subproblem gradient")?;
    lmo.validate(dim)?;

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |u: &[f64]| {
        let v = lmo.objective(g, u);
        if v.is_finite() && best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, u.to_vec()));
        }
    };

    match lmo {
        CompositeLmo::SimplexLinear { radius } => simplex_lattice(dim, resolution - 1, *radius, &mut consider),
        CompositeLmo::SimplexEntropy { .. } => simplex_lattice(dim, resolution - 1, 1.0, &mut consider),
        CompositeLmo::BoxLinear { lower, upper } | CompositeLmo::BoxL1reg { lower, upper, .. } => {
            let axes: Vec<Vec<f64>> = lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| {
                    let mut axis = linspace(l, u, resolution);
                    if l < 0.0 && 0.0 < u {
                        axis.push(0.0);
                    }
                    axis
                })
                .collect();
            tensor_grid(&axes, &mut consider);
        }
        CompositeLmo::L1ballLinear { radius } => {
            let r = *radius;
            let axes = vec![linspace(-r, r, resolution); dim];
            tensor_grid(&axes, &mut |u: &[f64]| {
                if norm1(u) <= r * (1.0 + 1e-12) {
                    consider(u)
                }
            });
        }
        CompositeLmo::LpnormSquared { p, ball_radius } => {
            let q = p / (p - 1.0);
            let mut b = norm_p(g, q);
            if b == 0.0 {
                b = 1.0;
            }
            if let Some(r) = ball_radius {
                b = b.min(*r);
            }
            let axes = vec![linspace(-b, b, resolution); dim];
            tensor_grid(&axes, &mut |u: &[f64]| match ball_radius {
                Some(r) if norm_p(u, *p) > r * (1.0 + 1e-12) => {}
                _ => consider(u),
            });
        }
    }

    best.map(|(_, u)| u)
        .ok_or_else(|| Error::InvalidInput("grid contains no feasible point".into()))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect()
}

fn tensor_grid(axes: &[Vec<f64>], visit: &mut impl FnMut(&[f64])) {
    let dim = axes.len();
    let mut idx = vec![0usize; dim];
    let mut point: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    loop {
        visit(&point);
        let mut d = 0;
        loop {
            if d == dim {
                return;
            }
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                point[d] = axes[d][idx[d]];
                break;
            }
            idx[d] = 0;
            point[d] = axes[d][0];
            d += 1;
        }
    }
}

/// Visits `radius·k/m` for every composition `k` of `m` into `dim` parts.
fn simplex_lattice(dim: usize, m: usize, radius: f64, visit: &mut impl FnMut(&[f64])) {
    fn rec(
        pos: usize,
        remaining: usize,
        m: usize,
        radius: f64,
        point: &mut Vec<f64>,
        visit: &mut impl FnMut(&[f64]),
    ) {
        let dim = point.len();
        if pos == dim - 1 {
            point[pos] = radius * remaining as f64 / m as f64;
            visit(point);
            return;
        }
        for k in 0..=remaining {
            point[pos] = radius * k as f64 / m as f64;
            rec(pos + 1, remaining - k, m, radius, point, visit);
        }
    }
    let mut point = vec![0.0; dim];
    rec(0, m, m, radius, &mut point, visit);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;

    #[test]
    fn rejects_large_dimensions() {
        let lmo = CompositeLmo::SimplexLinear { radius: 1.0 };
        assert!(brute_force_solve(&lmo, &[0.0; 5], 3).is_err());
        assert!(brute_force_solve(&lmo, &[0.0; 2], 1).is_err());
    }

    #[test]
    fn linear_kinds_dim_two() {
        let g = [0.7, -0.3];
        let kinds = [
            CompositeLmo::SimplexLinear { radius: 1.0 },
            CompositeLmo::BoxLinear {
                lower: vec![-1.0, -2.0],
                upper: vec![1.0, 0.5],
            },
            CompositeLmo::L1ballLinear { radius: 1.0 },
        ];
        for lmo in &kinds {
            let exact = lmo.objective(&g, &lmo.solve(&g).unwrap());
            let grid = lmo.objective(&g, &brute_force_solve(lmo, &g, 201).unwrap());
            assert!(grid - exact <= 1e-2 * norm2(&g), "{}", lmo.name());
            assert!(exact <= grid + 1e-12);
        }
    }

    #[test]
    fn entropy_dim_three() {
        let lmo = CompositeLmo::SimplexEntropy { scale: 1.0 };
        let g = [0.4, -1.1, 0.9];
        let exact = lmo.objective(&g, &lmo.solve(&g).unwrap());
        let grid = lmo.objective(&g, &brute_force_solve(&lmo, &g, 401).unwrap());
        assert!(grid - exact <= 5e-3 && exact <= grid + 1e-12);
    }

    #[test]
    fn zero_gradient_symmetric_sets() {
        let g = [0.0, 0.0];
        for lmo in [
            CompositeLmo::L1ballLinear { radius: 1.0 },
            CompositeLmo::LpnormSquared {
                p: 1.5,
                ball_radius: None,
            },
        ] {
            let exact = lmo.objective(&g, &lmo.solve(&g).unwrap());
            let grid = lmo.objective(&g, &brute_force_solve(&lmo, &g, 51).unwrap());
            assert!((exact - grid).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_counts() {
        let mut n = 0;
        simplex_lattice(3, 4, 1.0, &mut |p: &[f64]| {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            n += 1;
        });
        // C(4 + 2, 2)
        assert_eq!(n, 15);
    }
}
