//! Small dense linear-algebra helpers over `&[f64]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `‖v‖_p` for `p ≥ 1`, scaled by the largest magnitude to avoid overflow.
pub fn norm_p(v: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return norm1(v);
    }
    if p == 2.0 {
        return norm2(v);
    }
    if p.is_infinite() {
        return norm_inf(v);
    }
    let scale = norm_inf(v);
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = v.iter().map(|x| (x.abs() / scale).powf(p)).sum();
    scale * s.powf(1.0 / p)
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `(1 − t)·a + t·b`, written so that `t = 0` and `t = 1` return the
/// endpoints exactly.
pub fn convex_combination(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

/// Which norm measures distances (gradient-mapping norm, diameters, the
/// Hölder condition). The dual of `L1` is `ℓ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    #[default]
    L2,
    L1,
}

impl NormKind {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormKind::L2 => norm2(v),
            NormKind::L1 => norm1(v),
        }
    }

    pub fn dual_norm(self, v: &[f64]) -> f64 {
        match self {
            NormKind::L2 => norm2(v),
            NormKind::L1 => norm_inf(v),
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            NormKind::L2 => dist2(a, b),
            NormKind::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

/// Dense matrix stored column-major, matching the on-disk numeric format.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_major(&self) -> &[f64] {
        &self.data
    }

    /// `out = M·x`
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, m) in out.iter_mut().zip(self.column(j)) {
                *o += m * xj;
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `out = Mᵀ·y`
    pub fn mul_t_vec_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (j, o) in out.iter_mut().enumerate() {
            *o = dot(self.column(j), y);
        }
    }

    pub fn mul_t_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.mul_t_vec_into(y, &mut out);
        out
    }

    pub fn transpose_mul_self(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.cols, |i, j| {
            dot(self.column(i), self.column(j))
        })
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

/// Largest-magnitude eigenvalue of a symmetric matrix by power iteration,
/// together with the converged unit eigenvector.
pub fn power_iteration(m: &DenseMatrix, max_iters: usize, tol: f64) -> (f64, Vec<f64>) {
    let n = m.cols();
    // deterministic start with no special alignment to coordinate axes
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut w = vec![0.0; n];
    let mut lambda: f64 = 0.0;
    for _ in 0..max_iters {
        m.mul_vec_into(&v, &mut w);
        let rayleigh = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            return (0.0, v);
        }
        // two steps of M flip the sign of a negative dominant eigenvector, so
        // compare against the magnitude
        let converged = (nw - lambda.abs()).abs() <= tol * nw;
        lambda = if rayleigh < 0.0 { -nw } else { nw };
        w.iter_mut().for_each(|x| *x /= nw);
        std::mem::swap(&mut v, &mut w);
        if converged {
            break;
        }
    }
    (lambda, v)
}

/// Solve `M x = b` for symmetric positive definite `M`.
pub fn cholesky_solve(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = m.rows();
    if m.cols() != n || b.len() != n {
        return Err(Error::InvalidInput("cholesky_solve: shape mismatch".into()));
    }
    // lower factor, row-major
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::InvalidInput(
                        "matrix is not positive definite".into(),
                    ));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut z = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            z[i] -= l[i * n + k] * z[k];
        }
        z[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            z[i] -= l[k * n + i] * z[k];
        }
        z[i] /= l[i * n + i];
    }
    Ok(z)
}

/// Orthonormalize the columns of `m` in place (modified Gram-Schmidt).
pub fn orthonormalize(m: &DenseMatrix) -> Result<DenseMatrix> {
    let mut cols: Vec<Vec<f64>> = (0..m.cols()).map(|j| m.column(j).to_vec()).collect();
    for j in 0..cols.len() {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj = dot(&done[k], &rest[0]);
            for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                *x -= proj * q;
            }
        }
        let nrm = norm2(&cols[j]);
        if nrm < 1e-12 {
            return Err(Error::InvalidInput("columns are linearly dependent".into()));
        }
        cols[j].iter_mut().for_each(|x| *x /= nrm);
    }
    let data = cols.concat();
    DenseMatrix::from_col_major(m.rows(), m.cols(), data)
}
