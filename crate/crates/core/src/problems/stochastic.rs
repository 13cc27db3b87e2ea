//! Noisy first-order oracle: `G(x, ξ) = f'(x) + ξ` with `E[ξ] = 0` and
//! `E‖ξ‖² = σ²`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ProblemSpec, SmoothTerm};
use crate::error::{check_dim, Error, Result};
use crate::rng::{child_stream, Stream, StreamRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    /// `ξ ~ N(0, (σ²/n)·I)`.
    #[default]
    GaussianIsotropic,
    /// `ξᵢ ~ U[−a, a]` independently, `a = σ·√(3/n)`.
    BoundedUniform,
}

#[derive(Debug, Clone)]
pub struct StochasticOracle {
    f: Arc<dyn SmoothTerm>,
    sigma: f64,
    noise: NoiseModel,
    seed: u64,
}

impl StochasticOracle {
    pub fn new(f: Arc<dyn SmoothTerm>, sigma: f64, noise: NoiseModel, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidInput(format!("sigma must be nonnegative, got {sigma}")));
        }
        Ok(Self {
            f,
            sigma,
            noise,
            seed,
        })
    }

    pub fn for_problem(spec: &ProblemSpec, sigma: f64, noise: NoiseModel, seed: u64) -> Result<Self> {
        Self::new(spec.smooth_term().clone(), sigma, noise, seed)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn noise_model(&self) -> NoiseModel {
        self.noise
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    /// Independent noise stream for one replication.
    pub fn stream(&self, replication: u64) -> Stream {
        child_stream(self.seed, replication, StreamRole::Oracle)
    }

    /// One draw of `G(x, ξ)`.
    pub fn stochastic_grad(&self, x: &[f64], rng: &mut Stream) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.f.grad_into(x, &mut out);
        if self.sigma > 0.0 {
            let mut acc = vec![0.0; x.len()];
            self.accumulate_noise(rng, &mut acc);
            out.iter_mut().zip(&acc).for_each(|(o, n)| *o += n);
        }
        out
    }

    pub fn minibatch_grad(&self, x: &[f64], b: usize, rng: &mut Stream) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.minibatch_grad_into(x, b, rng, &mut out)?;
        Ok(out)
    }

    /// Mean of `b` independent draws, `f'(x) + (1/b)·Σξᵢ`. With `σ = 0` the
    /// exact gradient is returned untouched.
    pub fn minibatch_grad_into(&self, x: &[f64], b: usize, rng: &mut Stream, out: &mut [f64]) -> Result<()> {
        if b == 0 {
            return Err(Error::InvalidInput("mini-batch size must be at least 1".into()));
        }
        check_dim(self.dim(), x.len())?;
        self.f.grad_into(x, out);
        if self.sigma == 0.0 {
            return Ok(());
        }
        let mut acc = vec![0.0; x.len()];
        for _ in 0..b {
            self.accumulate_noise(rng, &mut acc);
        }
        let inv = 1.0 / b as f64;
        out.iter_mut().zip(&acc).for_each(|(o, n)| *o += n * inv);
        Ok(())
    }

    fn accumulate_noise(&self, rng: &mut Stream, acc: &mut [f64]) {
        let n = acc.len() as f64;
        match self.noise {
            NoiseModel::GaussianIsotropic => {
                let sd = self.sigma / n.sqrt();
                for a in acc.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *a += sd * z;
                }
            }
            NoiseModel::BoundedUniform => {
                let half = self.sigma * (3.0 / n).sqrt();
                for a in acc.iter_mut() {
                    *a += half * (2.0 * rng.random::<f64>() - 1.0);
                }
            }
        }
    }
}
