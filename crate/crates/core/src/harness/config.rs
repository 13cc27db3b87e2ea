//! Declarative run configuration (TOML) and problem construction.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, NormKind};
use crate::problems::catalog::CatalogKind;
use crate::problems::{
    CatalogProblem, ConvexQuadratic, HolderPower, IndefiniteQuadratic, LinearTerm, NoiseModel, ProblemConstants,
    ProblemSpec, SmoothTerm, StochasticOracle,
};
use crate::rng::{child_stream, StreamRole};
use crate::solvers::rscgt::{RscgtInputs, RscgtPlan};
use crate::solvers::{cgt, fcgt, line_search, StepsizeSchedule};
use crate::subproblems::CompositeLmo;

/// One experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Stem of the output files; defaults to `"run"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub problem: ProblemConfig,
    pub regularizer: CompositeLmo,
    pub algorithm: AlgorithmConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stochastic: Option<StochasticConfig>,
    #[serde(default, skip_serializing_if = "ConstantsConfig::is_empty")]
    pub constants: ConstantsConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: CatalogKind,
    pub dim: usize,
    /// Rows of `A` for the convex quadratic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    /// Entry scale of a generated `A`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Generate `b = A·planted`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<Vec<f64>>,
    /// Column-major `A` or `Q`: a `rows cols` header, then the entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_file: Option<PathBuf>,
    /// `b` or `c`, whitespace separated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eig_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eig_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_scale: Option<f64>,
    /// Indefinite quadratic with a local minimizer inside this face of the
    /// simplex (see `IndefiniteQuadratic::with_face_minimizer`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_dim: Option<usize>,
    /// Gradient margin off the face.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    /// Eigenvalue of `Q` off the face; negative for a nonconvex term.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub off_face_eig: Option<f64>,
    /// Linear coefficients, quadratic linear term or power-term center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
    /// Exponent of the power term.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Sign of the power term.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convex: Option<bool>,
    /// Seed for generated data; defaults to the run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Starting point; defaults to the subproblem solution at a zero gradient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    Cgt,
    CgtLs,
    Fcgt,
    Rscgt,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Cgt => "cgt",
            AlgorithmKind::CgtLs => "cgt-ls",
            AlgorithmKind::Fcgt => "fcgt",
            AlgorithmKind::Rscgt => "rscgt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub name: AlgorithmKind,
    pub schedule: StepsizeSchedule,
    pub epsilon: f64,
    /// Iteration limit `N`. Required except for RSCGT case schedules,
    /// which derive their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_secs: Option<f64>,
    #[serde(default = "default_stride")]
    pub monitor_stride: u64,
}

fn default_stride() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticConfig {
    pub sigma: f64,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default = "default_replications")]
    pub replications: u64,
    /// Batch size for a constant-stepsize RSCGT plan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi0_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_f_x: Option<f64>,
}

fn default_replications() -> u64 {
    30
}

/// Diameter declaration: a number or the word `"unbounded"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiameterDecl {
    Finite(f64),
    Keyword(String),
}

/// Overrides of the catalog-derived constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_x: Option<DiameterDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convex_f: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormKind>,
}

impl ConstantsConfig {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Reads and parses a config file. Relative data paths inside it are
    /// resolved against its directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let cfg = Self::from_toml_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn stem(&self) -> &str {
        self.name.as_deref().unwrap_or("run")
    }
}

/// A validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub spec: ProblemSpec,
    pub x0: Vec<f64>,
    pub oracle: Option<StochasticOracle>,
    pub plan: Option<RscgtPlan>,
}

fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>().map_err(|e| Error::Config {
                path: path.to_path_buf(),
                message: format!("bad number {t:?}: {e}"),
            })
        })
        .collect()
}

/// Loads a column-major matrix with a `rows cols` header.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let nums = read_numbers(path)?;
    let bad = |m: String| Error::Config {
        path: path.to_path_buf(),
        message: m,
    };
    if nums.len() < 2 {
        return Err(bad("missing `rows cols` header".into()));
    }
    let (r, c) = (nums[0], nums[1]);
    if r.fract() != 0.0 || c.fract() != 0.0 || r < 1.0 || c < 1.0 {
        return Err(bad(format!("bad header {r} {c}")));
    }
    let (r, c) = (r as usize, c as usize);
    if nums.len() - 2 != r * c {
        return Err(bad(format!("expected {} entries, found {}", r * c, nums.len() - 2)));
    }
    DenseMatrix::from_col_major(r, c, nums[2..].to_vec())
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn build_term(cfg: &RunConfig, base: &Path, errs: &mut Vec<String>) -> Option<CatalogProblem> {
    let p = &cfg.problem;
    let seed = p.seed.unwrap_or(cfg.seed);
    let mut rng = child_stream(seed, 0, StreamRole::Problem);
    let vector = || -> Result<Option<Vec<f64>>> {
        match (&p.vector, &p.vector_file) {
            (Some(v), _) => Ok(Some(v.clone())),
            (None, Some(f)) => read_numbers(&resolve(base, f)).map(Some),
            (None, None) => Ok(None),
        }
    };
    let dim_check = |v: &[f64], what: &str, errs: &mut Vec<String>| {
        if v.len() != p.dim {
            errs.push(format!("problem.{what} has length {} but dim = {}", v.len(), p.dim));
            false
        } else {
            true
        }
    };
    if p.dim == 0 {
        errs.push("problem.dim must be positive".into());
        return None;
    }
    if let Some(x) = &p.planted {
        if !dim_check(x, "planted", errs) {
            return None;
        }
    }
    let built: Result<CatalogProblem> = (|| match p.kind {
        CatalogKind::Linear => {
            let c = match vector()? {
                Some(c) => c,
                None => (0..p.dim)
                    .map(|_| rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng))
                    .collect(),
            };
            Ok(CatalogProblem::Linear(LinearTerm::new(c)))
        }
        CatalogKind::ConvexQuadratic => {
            if let Some(f) = &p.matrix_file {
                let a = read_matrix(&resolve(base, f))?;
                let b = match (vector()?, &p.planted) {
                    (Some(b), _) => b,
                    (None, Some(x)) => a.mul_vec(x),
                    (None, None) => vec![0.0; a.rows()],
                };
                Ok(CatalogProblem::ConvexQuadratic(ConvexQuadratic::new(a, b)?))
            } else {
                let rows = p.rows.unwrap_or(p.dim);
                Ok(CatalogProblem::ConvexQuadratic(ConvexQuadratic::generate(
                    rows,
                    p.dim,
                    p.scale.unwrap_or(1.0),
                    p.planted.as_deref(),
                    &mut rng,
                )?))
            }
        }
        CatalogKind::IndefiniteQuadratic => {
            if let Some(f) = &p.matrix_file {
                let q = read_matrix(&resolve(base, f))?;
                let c = vector()?.unwrap_or_else(|| vec![0.0; q.rows()]);
                Ok(CatalogProblem::IndefiniteQuadratic(IndefiniteQuadratic::new(q, c)?))
            } else if let Some(face) = p.face_dim {
                let radius = match &cfg.regularizer {
                    CompositeLmo::SimplexLinear { radius } => *radius,
                    _ => 1.0,
                };
                let (t, _) = IndefiniteQuadratic::with_face_minimizer(
                    p.dim,
                    face,
                    radius,
                    p.margin.unwrap_or(0.5),
                    p.off_face_eig.unwrap_or(-0.5),
                    &mut rng,
                )?;
                Ok(CatalogProblem::IndefiniteQuadratic(t))
            } else {
                let mut t = IndefiniteQuadratic::generate(
                    p.dim,
                    p.eig_min.unwrap_or(-1.0),
                    p.eig_max.unwrap_or(1.0),
                    p.c_scale.unwrap_or(1.0),
                    &mut rng,
                )?;
                if let Some(c) = vector()? {
                    t = IndefiniteQuadratic::new(t.matrix().clone(), c)?;
                }
                Ok(CatalogProblem::IndefiniteQuadratic(t))
            }
        }
        CatalogKind::HolderPower => {
            let center = vector()?.unwrap_or_else(|| vec![0.0; p.dim]);
            Ok(CatalogProblem::HolderPower(HolderPower::new(
                center,
                p.nu.unwrap_or(1.0),
                p.convex.unwrap_or(true),
            )?))
        }
    })();
    match built {
        Ok(t) => {
            if t.dim() != p.dim {
                errs.push(format!("problem data has dimension {} but dim = {}", t.dim(), p.dim));
                return None;
            }
            Some(t)
        }
        Err(Error::Validation(v)) => {
            errs.extend(v);
            None
        }
        Err(e) => {
            errs.push(format!("problem: {e}"));
            None
        }
    }
}

/// Builds the problem, checks every precondition of the chosen algorithm
/// and collects all violations into one validation error.
pub fn prepare(cfg: &RunConfig, base: &Path) -> Result<Prepared> {
    let mut errs = Vec::new();
    let a = &cfg.algorithm;
    if !(a.epsilon.is_finite() && a.epsilon > 0.0) {
        errs.push(format!("algorithm.epsilon must be positive, got {}", a.epsilon));
    }
    if a.monitor_stride == 0 {
        errs.push("algorithm.monitor_stride must be at least 1".into());
    }
    if let Some(w) = a.wall_clock_secs {
        if !(w.is_finite() && w > 0.0) {
            errs.push(format!("algorithm.wall_clock_secs must be positive, got {w}"));
        }
    }
    if let Err(e) = cfg.regularizer.validate(cfg.problem.dim) {
        errs.push(format!("regularizer: {e}"));
    }
    let term = build_term(cfg, base, &mut errs);
    let Some(term) = term else {
        return Err(Error::Validation(errs));
    };

    let h = cfg.regularizer.clone();
    let k = &cfg.constants;
    let norm = k.norm.unwrap_or(NormKind::L2);
    let (cat_nu, cat_l) = term.holder_constants().unwrap_or((1.0, 1.0));
    let planted = cfg.problem.planted.as_deref();
    let known = term.known_optimum(&h, planted);
    let d_x = match &k.d_x {
        None => h.diameter(cfg.problem.dim, norm),
        Some(DiameterDecl::Finite(d)) => Some(*d),
        Some(DiameterDecl::Keyword(s)) if s == "unbounded" => None,
        Some(DiameterDecl::Keyword(s)) => {
            errs.push(format!("constants.d_x must be a number or \"unbounded\", got {s:?}"));
            None
        }
    };
    let constants = ProblemConstants {
        nu: k.nu.unwrap_or(cat_nu),
        l_nu: k.l_nu.unwrap_or(cat_l),
        mu: k.mu.unwrap_or_else(|| h.implied_mu()),
        d_x,
        psi_star: k.psi_star.or(known.as_ref().map(|(v, _)| *v)),
        m_f: k.m_f,
        m_h: k.m_h,
        convex_f: k.convex_f.unwrap_or_else(|| term.is_convex().unwrap_or(false)),
    };
    if constants.d_x.is_none() && constants.mu <= 0.0 && h.implied_mu() <= 0.0 {
        errs.push("an unbounded feasible set requires a strongly convex regularizer (mu > 0)".into());
    }
    let f: Arc<dyn SmoothTerm> = Arc::new(term);
    let spec = match ProblemSpec::new(f, h, constants, norm) {
        Ok(s) => Some(s),
        Err(Error::Validation(v)) => {
            errs.extend(v);
            None
        }
        Err(e) => {
            errs.push(e.to_string());
            None
        }
    };
    let Some(spec) = spec else {
        return Err(Error::Validation(errs));
    };

    let x0 = match &cfg.problem.x0 {
        Some(x) => x.clone(),
        None => spec
            .lmo()
            .solve(&vec![0.0; spec.dim()])
            .map_err(|e| Error::Validation(vec![format!("cannot build a default x0: {e}")]))?,
    };
    if x0.len() != spec.dim() {
        errs.push(format!("problem.x0 has length {} but dim = {}", x0.len(), spec.dim()));
    } else if !spec.lmo().is_feasible(&x0) {
        errs.push("problem.x0 is infeasible for the regularizer".into());
    }

    let needs_n = !(a.name == AlgorithmKind::Rscgt && matches!(a.schedule, StepsizeSchedule::RscgtSchedule { .. }));
    match a.max_iters {
        Some(0) => errs.push("algorithm.max_iters must be at least 1".into()),
        None if needs_n => errs.push(format!("algorithm.max_iters is required for {}", a.name.name())),
        _ => {}
    }

    let mut oracle = None;
    let mut plan = None;
    match a.name {
        AlgorithmKind::Cgt => errs.extend(cgt::check_cgt_preconditions(&spec, &a.schedule)),
        AlgorithmKind::CgtLs => match a.schedule {
            StepsizeSchedule::LineSearch { gamma, delta } => {
                errs.extend(line_search::check_ls_preconditions(&spec, gamma, delta))
            }
            ref s => errs.push(format!("cgt-ls needs schedule line-search, got {}", s.name())),
        },
        AlgorithmKind::Fcgt => match a.schedule {
            StepsizeSchedule::FcgtFolded { q } => errs.extend(fcgt::check_fcgt_preconditions(&spec, q)),
            ref s => errs.push(format!("fcgt needs schedule fcgt-folded, got {}", s.name())),
        },
        AlgorithmKind::Rscgt => match &cfg.stochastic {
            None => errs.push("rscgt requires a [stochastic] section".into()),
            Some(st) => {
                match StochasticOracle::for_problem(&spec, st.sigma, st.noise, cfg.seed) {
                    Ok(o) => oracle = Some(o),
                    Err(e) => errs.push(format!("stochastic: {e}")),
                }
                if st.replications == 0 {
                    errs.push("stochastic.replications must be at least 1".into());
                }
                if errs.is_empty() {
                    match build_plan(cfg, st, &spec, &x0) {
                        Ok(p) => plan = Some(p),
                        Err(Error::Validation(v)) => errs.extend(v),
                        Err(e) => errs.push(e.to_string()),
                    }
                }
            }
        },
    }
    if a.name != AlgorithmKind::Rscgt && cfg.stochastic.is_some() {
        errs.push(format!("{} is deterministic; remove the [stochastic] section", a.name.name()));
    }

    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    Ok(Prepared {
        config: cfg.clone(),
        spec,
        x0,
        oracle,
        plan,
    })
}

fn build_plan(cfg: &RunConfig, st: &StochasticConfig, spec: &ProblemSpec, x0: &[f64]) -> Result<RscgtPlan> {
    let a = &cfg.algorithm;
    match a.schedule {
        StepsizeSchedule::RscgtSchedule { case } => {
            let inputs = RscgtInputs {
                epsilon: a.epsilon,
                psi0_gap: st.psi0_gap,
                d_f_x: st.d_f_x,
            };
            let plan = RscgtPlan::from_case(spec, case, st.sigma, &inputs, x0)?;
            if let Some(n) = a.max_iters {
                if plan.len() > n {
                    return Err(Error::Validation(vec![format!(
                        "case {} derives N = {} above algorithm.max_iters = {n}",
                        case.name(),
                        plan.len()
                    )]));
                }
            }
            Ok(plan)
        }
        StepsizeSchedule::Constant { value } => {
            let b = st.batch.unwrap_or(1);
            RscgtPlan::constant(value, b, a.max_iters.unwrap_or(1))
        }
        ref s => Err(Error::Validation(vec![format!(
            "rscgt needs schedule rscgt-schedule or constant, got {}",
            s.name()
        )])),
    }
}
