//! Test problems with known constants.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SmoothTerm;
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_solve, dot, norm2, orthonormalize, power_iteration, DenseMatrix,
};
use crate::rng::Stream;
use crate::subproblems::CompositeLmo;

const POWER_ITERS: usize = 100_000;
const POWER_TOL: f64 = 1e-15;

/// `f(x) = ⟨c, x⟩`.
#[derive(Debug, Clone)]
pub struct LinearTerm {
    c: Vec<f64>,
}

impl LinearTerm {
    pub fn new(c: Vec<f64>) -> Self {
        Self { c }
    }
}

impl SmoothTerm for LinearTerm {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        dot(&self.c, x)
    }

    fn grad_into(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.c);
    }

    fn is_convex(&self) -> Option<bool> {
        Some(true)
    }
}

/// `f(x) = ½‖Ax − b‖²`, convex with `L₁ = ‖AᵀA‖₂`.
#[derive(Debug, Clone)]
pub struct ConvexQuadratic {
    a: DenseMatrix,
    b: Vec<f64>,
    l1: f64,
}

impl ConvexQuadratic {
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::InvalidInput(format!(
                "b has length {} but A has {} rows",
                b.len(),
                a.rows()
            )));
        }
        let (l1, _) = power_iteration(&a.transpose_mul_self(), POWER_ITERS, POWER_TOL);
        Ok(Self { a, b, l1 })
    }

    /// Gaussian `A` (entries `N(0, scale²/rows)`); `b = A·planted` when a
    /// planted point is given, otherwise Gaussian.
    pub fn generate(
        rows: usize,
        dim: usize,
        scale: f64,
        planted: Option<&[f64]>,
        rng: &mut Stream,
    ) -> Result<Self> {
        let s = scale / (rows as f64).sqrt();
        let a = DenseMatrix::from_fn(rows, dim, |_, _| {
            s * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
        });
        let b = match planted {
            Some(x) => a.mul_vec(x),
            None => (0..rows).map(|_| StandardNormal.sample(rng)).collect(),
        };
        Self::new(a, b)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn lipschitz(&self) -> f64 {
        self.l1
    }
}

impl SmoothTerm for ConvexQuadratic {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r: Vec<f64> = self.a.mul_vec(x).iter().zip(&self.b).map(|(p, q)| p - q).collect();
        0.5 * dot(&r, &r)
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        let mut r = self.a.mul_vec(x);
        r.iter_mut().zip(&self.b).for_each(|(p, q)| *p -= q);
        self.a.mul_t_vec_into(&r, out);
    }

    fn holder_constants(&self) -> Option<(f64, f64)> {
        Some((1.0, self.l1))
    }

    fn is_convex(&self) -> Option<bool> {
        Some(true)
    }
}

/// `f(x) = ½xᵀQx + cᵀx` with symmetric, possibly indefinite `Q`.
#[derive(Debug, Clone)]
pub struct IndefiniteQuadratic {
    q: DenseMatrix,
    c: Vec<f64>,
    spectral_norm: f64,
    min_eigenvalue: f64,
}

impl IndefiniteQuadratic {
    pub fn new(q: DenseMatrix, c: Vec<f64>) -> Result<Self> {
        if !q.is_symmetric(1e-12 * (1.0 + q.col_major().iter().fold(0.0f64, |m, v| m.max(v.abs())))) {
            return Err(Error::InvalidInput("Q must be square and symmetric".into()));
        }
        if c.len() != q.rows() {
            return Err(Error::InvalidInput(format!(
                "c has length {} but Q is {}x{}",
                c.len(),
                q.rows(),
                q.cols()
            )));
        }
        let (top, _) = power_iteration(&q, POWER_ITERS, POWER_TOL);
        let spectral_norm = top.abs();
        // λ_min(Q) = ‖Q‖ − λ_max(‖Q‖·I − Q), the shifted matrix being PSD
        let shifted = DenseMatrix::from_fn(q.rows(), q.cols(), |i, j| {
            let d = if i == j { spectral_norm } else { 0.0 };
            d - q.get(i, j)
        });
        let (top_shifted, _) = power_iteration(&shifted, POWER_ITERS, POWER_TOL);
        let min_eigenvalue = spectral_norm - top_shifted.abs();
        Ok(Self {
            q,
            c,
            spectral_norm,
            min_eigenvalue,
        })
    }

    /// `Q = U·diag(λ)·Uᵀ` with a random orthonormal `U` and eigenvalues
    /// evenly spaced on `[eig_min, eig_max]`; `c ~ N(0, c_scale²·I)`.
    pub fn generate(
        dim: usize,
        eig_min: f64,
        eig_max: f64,
        c_scale: f64,
        rng: &mut Stream,
    ) -> Result<Self> {
        if eig_min > eig_max {
            return Err(Error::InvalidInput("eig_min must not exceed eig_max".into()));
        }
        let g = DenseMatrix::from_fn(dim, dim, |_, _| {
            <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
        });
        let u = orthonormalize(&g)?;
        let eigs: Vec<f64> = (0..dim)
            .map(|i| {
                if dim == 1 {
                    eig_max
                } else {
                    eig_min + (eig_max - eig_min) * i as f64 / (dim - 1) as f64
                }
            })
            .collect();
        let mut q = DenseMatrix::from_fn(dim, dim, |i, j| {
            (0..dim).map(|k| u.get(i, k) * eigs[k] * u.get(j, k)).sum()
        });
        // symmetrize exactly
        q = DenseMatrix::from_fn(dim, dim, |i, j| 0.5 * (q.get(i, j) + q.get(j, i)));
        let c = (0..dim)
            .map(|_| c_scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            .collect();
        Self::new(q, c)
    }

    /// `Q = diag(P, off_face·I)` with `P` positive definite (eigenvalues on
    /// `[0.2, 1]`) on the first `face_dim` coordinates; nonconvex when
    /// `off_face < 0`. `c` makes the
    /// barycenter `x*` of the face spanned by the first `face_dim` vertices of
    /// `{x ≥ 0, Σx = radius}` a strict local minimizer: the gradient at `x*`
    /// is `0` on the face and `margin` off it. Returns the term and `x*`.
    pub fn with_face_minimizer(
        dim: usize,
        face_dim: usize,
        radius: f64,
        margin: f64,
        off_face: f64,
        rng: &mut Stream,
    ) -> Result<(Self, Vec<f64>)> {
        if face_dim < 2 || face_dim >= dim {
            return Err(Error::InvalidInput(format!(
                "face_dim must lie in [2, dim), got {face_dim} with dim = {dim}"
            )));
        }
        if !(margin > 0.0 && radius > 0.0) {
            return Err(Error::InvalidInput("margin and radius must be positive".into()));
        }
        let g = DenseMatrix::from_fn(face_dim, face_dim, |_, _| {
            <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
        });
        let u = orthonormalize(&g)?;
        let eigs: Vec<f64> = (0..face_dim)
            .map(|i| 0.2 + 0.8 * i as f64 / (face_dim - 1) as f64)
            .collect();
        let p = DenseMatrix::from_fn(face_dim, face_dim, |i, j| {
            (0..face_dim).map(|k| u.get(i, k) * eigs[k] * u.get(j, k)).sum()
        });
        let q = DenseMatrix::from_fn(dim, dim, |i, j| match (i < face_dim, j < face_dim) {
            (true, true) => 0.5 * (p.get(i, j) + p.get(j, i)),
            (false, false) if i == j => off_face,
            _ => 0.0,
        });
        let x_star: Vec<f64> = (0..dim)
            .map(|i| if i < face_dim { radius / face_dim as f64 } else { 0.0 })
            .collect();
        let qx = q.mul_vec(&x_star);
        let c = (0..dim)
            .map(|i| if i < face_dim { -qx[i] } else { margin })
            .collect();
        Ok((Self::new(q, c)?, x_star))
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn linear(&self) -> &[f64] {
        &self.c
    }

    pub fn spectral_norm(&self) -> f64 {
        self.spectral_norm
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }
}

impl SmoothTerm for IndefiniteQuadratic {
    fn dim(&self) -> usize {
        self.q.cols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.q.mul_vec(x)) + dot(&self.c, x)
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        self.q.mul_vec_into(x, out);
        out.iter_mut().zip(&self.c).for_each(|(o, c)| *o += c);
    }

    fn holder_constants(&self) -> Option<(f64, f64)> {
        Some((1.0, self.spectral_norm))
    }

    fn is_convex(&self) -> Option<bool> {
        Some(self.min_eigenvalue >= 0.0)
    }
}

/// `f(x) = ±(1/(1+ν))‖x − c‖^{1+ν}`: weakly smooth with `L_ν = 2^{1−ν}`;
/// convex with the `+` sign, nonconvex with `−`.
#[derive(Debug, Clone)]
pub struct HolderPower {
    center: Vec<f64>,
    nu: f64,
    sign: f64,
}

impl HolderPower {
    pub fn new(center: Vec<f64>, nu: f64, convex: bool) -> Result<Self> {
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(Error::InvalidInput(format!("nu must lie in (0, 1], got {nu}")));
        }
        Ok(Self {
            center,
            nu,
            sign: if convex { 1.0 } else { -1.0 },
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn holder_constant(nu: f64) -> f64 {
        2f64.powf(1.0 - nu)
    }
}

impl SmoothTerm for HolderPower {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = crate::linalg::dist2(x, &self.center);
        self.sign * r.powf(1.0 + self.nu) / (1.0 + self.nu)
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        let r = crate::linalg::dist2(x, &self.center);
        if r == 0.0 {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        let s = self.sign * r.powf(self.nu - 1.0);
        for ((o, xi), ci) in out.iter_mut().zip(x).zip(&self.center) {
            *o = s * (xi - ci);
        }
    }

    fn holder_constants(&self) -> Option<(f64, f64)> {
        Some((self.nu, Self::holder_constant(self.nu)))
    }

    fn is_convex(&self) -> Option<bool> {
        Some(self.sign > 0.0)
    }
}

/// Discriminant for the catalog entries, as named in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatalogKind {
    Linear,
    ConvexQuadratic,
    IndefiniteQuadratic,
    HolderPower,
}

/// One catalog term behind a common interface.
#[derive(Debug, Clone)]
pub enum CatalogProblem {
    Linear(LinearTerm),
    ConvexQuadratic(ConvexQuadratic),
    IndefiniteQuadratic(IndefiniteQuadratic),
    HolderPower(HolderPower),
}

impl CatalogProblem {
    pub fn kind(&self) -> CatalogKind {
        match self {
            CatalogProblem::Linear(_) => CatalogKind::Linear,
            CatalogProblem::ConvexQuadratic(_) => CatalogKind::ConvexQuadratic,
            CatalogProblem::IndefiniteQuadratic(_) => CatalogKind::IndefiniteQuadratic,
            CatalogProblem::HolderPower(_) => CatalogKind::HolderPower,
        }
    }

    fn term(&self) -> &dyn SmoothTerm {
        match self {
            CatalogProblem::Linear(t) => t,
            CatalogProblem::ConvexQuadratic(t) => t,
            CatalogProblem::IndefiniteQuadratic(t) => t,
            CatalogProblem::HolderPower(t) => t,
        }
    }

    /// `(Ψ*, x*)` when it follows in closed form from the catalog structure:
    /// quadratics with `h = ½‖·‖²` on `ℝⁿ` (a linear solve), planted or
    /// centered problems whose zero-valued minimizer is feasible and `h ≡ 0`.
    pub fn known_optimum(&self, h: &CompositeLmo, planted: Option<&[f64]>) -> Option<(f64, Vec<f64>)> {
        let unconstrained_half_square = matches!(
            h,
            CompositeLmo::LpnormSquared {
                p,
                ball_radius: None
            } if *p == 2.0
        );
        match self {
            CatalogProblem::ConvexQuadratic(t) if unconstrained_half_square => {
                // (AᵀA + I)x = Aᵀb
                let mut m = t.a.transpose_mul_self();
                m = DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| {
                    m.get(i, j) + if i == j { 1.0 } else { 0.0 }
                });
                let x = cholesky_solve(&m, &t.a.mul_t_vec(&t.b)).ok()?;
                let v = t.value(&x) + h.h_value(&x);
                Some((v, x))
            }
            CatalogProblem::IndefiniteQuadratic(t) if unconstrained_half_square => {
                if t.min_eigenvalue + 1.0 <= 0.0 {
                    return None;
                }
                // (Q + I)x = −c
                let m = DenseMatrix::from_fn(t.q.rows(), t.q.cols(), |i, j| {
                    t.q.get(i, j) + if i == j { 1.0 } else { 0.0 }
                });
                let rhs: Vec<f64> = t.c.iter().map(|v| -v).collect();
                let x = cholesky_solve(&m, &rhs).ok()?;
                let v = t.value(&x) + h.h_value(&x);
                Some((v, x))
            }
            CatalogProblem::ConvexQuadratic(_) if h.is_linear() => {
                let x = planted?;
                (h.is_feasible(x) && self.value(x).abs() < 1e-12).then(|| (0.0, x.to_vec()))
            }
            CatalogProblem::HolderPower(t) if t.sign > 0.0 && h.is_linear() => {
                h.is_feasible(&t.center).then(|| (0.0, t.center.clone()))
            }
            _ => None,
        }
    }
}

impl SmoothTerm for CatalogProblem {
    fn dim(&self) -> usize {
        self.term().dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.term().value(x)
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        self.term().grad_into(x, out)
    }

    fn holder_constants(&self) -> Option<(f64, f64)> {
        self.term().holder_constants()
    }

    fn is_convex(&self) -> Option<bool> {
        self.term().is_convex()
    }
}

/// Bound on `‖f'(x)‖₂` over a set of diameter `d_x` containing `x0`, for
/// Lipschitz-gradient terms: `‖f'(x0)‖ + L₁·D_X`.
pub fn gradient_bound(term: &dyn SmoothTerm, x0: &[f64], l1: f64, d_x: f64) -> f64 {
    norm2(&term.grad(x0)) + l1 * d_x
}
