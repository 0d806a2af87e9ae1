//! Finite-dimensional samplers as involutive kernels.
//!
//! Every constructor here builds `S = R ∘ Ŝ` from an `R`-reversible
//! integrator `Ŝ` and the momentum flip `R`, so the acceptance ratio takes
//! the energy form `1 ∧ exp(ℋ(q, v) − ℋ(S(q, v)))` (times `|det ∇Ŝ|` when
//! the integrator is not volume preserving).

mod relativistic;
mod riemannian;

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::integrators::{
    Field, Leapfrog, Palindrome, StormerVerlet, DEFAULT_JACOBIAN_CAP,
};
use crate::involutive::{
    AuxiliaryKernel, ExtendedMap, ExtendedPoint, FlipInvolution, InvolutiveKernel,
    JacobianMode, Potential,
};

pub use relativistic::{relativistic_hmc, RelativisticAux};
pub use riemannian::{rmhmc, ConstantMetric, DiagonalMetric, Metric, RiemannianAux};

/// Positive-definite mass matrix `M`; the momentum law is `N(0, M)`.
#[derive(Clone, Debug)]
pub enum MassMatrix {
    Identity(usize),
    /// Diagonal entries of `M`.
    Diagonal(Vec<f64>),
    Dense(DenseMass),
}

/// A dense mass matrix stored with its Cholesky factor.
#[derive(Clone, Debug)]
pub struct DenseMass {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl MassMatrix {
    pub fn identity(dim: usize) -> Self {
        MassMatrix::Identity(dim)
    }

    pub fn diagonal(diag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || diag.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::Config(
                "diagonal mass entries must be finite and positive".into(),
            ));
        }
        Ok(MassMatrix::Diagonal(diag))
    }

    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Config("mass matrix must be square and non-empty".into()));
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-12 * (1.0 + matrix.amax()) {
            return Err(Error::Config("mass matrix is not symmetric".into()));
        }
        let chol = Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::Config("mass matrix is not positive definite".into()))?;
        Ok(MassMatrix::Dense(DenseMass { matrix, chol }))
    }

    pub fn dim(&self) -> usize {
        match self {
            MassMatrix::Identity(d) => *d,
            MassMatrix::Diagonal(m) => m.len(),
            MassMatrix::Dense(m) => m.matrix.nrows(),
        }
    }

    /// `M⁻¹ v`.
    pub fn apply_inverse(&self, v: &[f64]) -> Vec<f64> {
        match self {
            MassMatrix::Identity(_) => v.to_vec(),
            MassMatrix::Diagonal(m) => v.iter().zip(m).map(|(a, b)| a / b).collect(),
            MassMatrix::Dense(m) => m
                .chol
                .solve(&DVector::from_column_slice(v))
                .iter()
                .copied()
                .collect(),
        }
    }

    /// `½ ⟨M⁻¹ v, v⟩`.
    pub fn kinetic(&self, v: &[f64]) -> f64 {
        0.5 * self
            .apply_inverse(v)
            .iter()
            .zip(v)
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }

    /// A draw from `N(0, M)`.
    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let xi: Vec<f64> = (0..self.dim()).map(|_| StandardNormal.sample(rng)).collect();
        match self {
            MassMatrix::Identity(_) => xi,
            MassMatrix::Diagonal(m) => xi.iter().zip(m).map(|(x, s)| s.sqrt() * x).collect(),
            MassMatrix::Dense(m) => (m.chol.l() * DVector::from_vec(xi)).iter().copied().collect(),
        }
    }
}

/// `V(q, ·) = N(0, M)` independent of `q`; log-density `−½ ⟨M⁻¹ v, v⟩`.
#[derive(Clone, Debug)]
pub struct GaussianAux {
    mass: MassMatrix,
}

impl GaussianAux {
    pub fn new(mass: MassMatrix) -> Self {
        Self { mass }
    }

    pub fn standard(dim: usize) -> Self {
        Self::new(MassMatrix::identity(dim))
    }

    /// `N(0, σ² I)`.
    pub fn isotropic(dim: usize, sigma: f64) -> Result<Self> {
        Ok(Self::new(MassMatrix::diagonal(vec![sigma * sigma; dim])?))
    }

    pub fn mass(&self) -> &MassMatrix {
        &self.mass
    }
}

impl AuxiliaryKernel for GaussianAux {
    fn dim(&self) -> usize {
        self.mass.dim()
    }

    fn sample(&self, _q: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        Ok(self.mass.sample(rng))
    }

    fn log_density(&self, _q: &[f64], v: &[f64]) -> f64 {
        -self.mass.kinetic(v)
    }
}

/// Step size, number of leapfrog steps and mass matrix.
#[derive(Clone, Debug)]
pub struct HmcConfig {
    pub delta: f64,
    pub n_steps: usize,
    pub mass: MassMatrix,
}

impl HmcConfig {
    pub fn new(delta: f64, n_steps: usize, mass: MassMatrix) -> Self {
        Self {
            delta,
            n_steps,
            mass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Config(format!("step size must be positive, got {}", self.delta)));
        }
        if self.n_steps == 0 {
            return Err(Error::Config("number of integration steps must be >= 1".into()));
        }
        Ok(())
    }
}

/// `−∇U` as a field; NaN where the gradient is unavailable so that the
/// trajectory is flagged as divergent and rejected.
pub(crate) fn neg_gradient(target: &Arc<dyn Potential>) -> Result<Field> {
    if !target.has_gradient() {
        return Err(Error::Config("this sampler needs the gradient of the potential".into()));
    }
    let t = Arc::clone(target);
    Ok(Arc::new(move |q: &[f64]| match t.gradient(q) {
        Some(g) => g.into_iter().map(|x| -x).collect(),
        None => vec![f64::NAN; q.len()],
    }))
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite and positive, got {x}")))
    }
}

fn flip_kernel(
    target: Arc<dyn Potential>,
    aux: Arc<dyn AuxiliaryKernel>,
    integrator: Arc<dyn ExtendedMap>,
    jacobian: JacobianMode,
) -> InvolutiveKernel {
    let inv = FlipInvolution::new(Arc::clone(&target), Arc::clone(&aux), integrator, jacobian);
    InvolutiveKernel::new(target, aux, Arc::new(inv))
}

/// Random-walk Metropolis: `S(q, v) = (q + v, −v)` with `v` drawn from the
/// jump law `jump` (independent of `q`).
pub fn rwmc(target: Arc<dyn Potential>, jump: Arc<dyn AuxiliaryKernel>) -> Result<InvolutiveKernel> {
    check_dim(target.dim(), jump.dim())?;
    let shift = |z: &ExtendedPoint| -> Result<ExtendedPoint> {
        let q = z.q.iter().zip(&z.v).map(|(a, b)| a + b).collect();
        Ok(ExtendedPoint::new(q, z.v.clone()))
    };
    Ok(flip_kernel(target, jump, Arc::new(shift), JacobianMode::VolumePreserving))
}

/// RWMC with an `N(0, σ² I)` jump.
pub fn rwmc_gaussian(target: Arc<dyn Potential>, sigma: f64) -> Result<InvolutiveKernel> {
    positive("sigma", sigma)?;
    let d = target.dim();
    rwmc(target, Arc::new(GaussianAux::isotropic(d, sigma)?))
}

/// MALA with proposal `q − δ²/2 ∇U(q) + δ v`, `v ~ N(0, I)`, realized as one
/// leapfrog step (`δ₁ = δ/2`, `δ₂ = δ`) followed by the momentum flip.
pub fn mala(target: Arc<dyn Potential>, delta: f64) -> Result<InvolutiveKernel> {
    positive("delta", delta)?;
    let f2 = neg_gradient(&target)?;
    let f1: Field = Arc::new(|v: &[f64]| v.to_vec());
    let d = target.dim();
    let lf = Leapfrog::new(1, 0.5 * delta, delta, f1, f2);
    Ok(flip_kernel(
        target,
        Arc::new(GaussianAux::standard(d)),
        Arc::new(lf),
        JacobianMode::VolumePreserving,
    ))
}

/// MALA proposal map `F(q, v) = q − δ²/2 ∇U(q) + δ v`.
pub fn mala_proposal(target: &dyn Potential, delta: f64, q: &[f64], v: &[f64]) -> Vec<f64> {
    let g = target.gradient(q).unwrap_or_else(|| vec![f64::NAN; q.len()]);
    q.iter()
        .zip(&g)
        .zip(v)
        .map(|((q, g), v)| q - 0.5 * delta * delta * g + delta * v)
        .collect()
}

fn mala_log_q(target: &dyn Potential, delta: f64, from: &[f64], to: &[f64]) -> f64 {
    let mean = mala_proposal(target, delta, from, &vec![0.0; from.len()]);
    -to.iter()
        .zip(&mean)
        .map(|(a, m)| (a - m) * (a - m))
        .sum::<f64>()
        / (2.0 * delta * delta)
}

/// Log of the classical MALA ratio
/// `p(q̃) q(q̃, q) / (p(q) q(q, q̃))` with Gaussian transition densities.
pub fn mala_log_ratio(target: &dyn Potential, delta: f64, q: &[f64], q_new: &[f64]) -> f64 {
    let r = target.value(q) - target.value(q_new) + mala_log_q(target, delta, q_new, q)
        - mala_log_q(target, delta, q, q_new);
    if r.is_nan() {
        f64::NEG_INFINITY
    } else {
        r
    }
}

/// Classical HMC: `v ~ N(0, M)`, `n` leapfrog steps with `f₁ = M⁻¹ v`,
/// `f₂ = −∇U`, `δ₁ = δ/2`, `δ₂ = δ`, then the momentum flip.
pub fn hmc(target: Arc<dyn Potential>, cfg: HmcConfig) -> Result<InvolutiveKernel> {
    cfg.validate()?;
    check_dim(target.dim(), cfg.mass.dim())?;
    let f2 = neg_gradient(&target)?;
    let mass = cfg.mass.clone();
    let f1: Field = Arc::new(move |v: &[f64]| mass.apply_inverse(v));
    let lf = Leapfrog::new(cfg.n_steps, 0.5 * cfg.delta, cfg.delta, f1, f2);
    Ok(flip_kernel(
        target,
        Arc::new(GaussianAux::new(cfg.mass)),
        Arc::new(lf),
        JacobianMode::VolumePreserving,
    ))
}

/// The integrator `Ŝ` of a surrogate-dynamics kernel.
#[derive(Clone)]
pub enum Scheme {
    Leapfrog(Leapfrog),
    Palindrome(Palindrome),
    StormerVerlet(StormerVerlet),
    /// Any other `R`-reversible map.
    Custom(Arc<dyn ExtendedMap>),
}

impl Scheme {
    fn into_map(self) -> Arc<dyn ExtendedMap> {
        match self {
            Scheme::Leapfrog(s) => Arc::new(s),
            Scheme::Palindrome(s) => Arc::new(s),
            Scheme::StormerVerlet(s) => Arc::new(s),
            Scheme::Custom(s) => s,
        }
    }
}

/// HMC with arbitrary surrogate dynamics.
///
/// `aux` is the momentum law (its log-density is `−𝒦`). The scheme must be
/// reversible with respect to the momentum flip. With `volume_preserving`
/// unset, `log |det ∇Ŝ|` is computed by finite differences, which limits the
/// flat dimension `dim(q) + dim(v)` to [`DEFAULT_JACOBIAN_CAP`].
pub fn surrogate_hmc(
    target: Arc<dyn Potential>,
    aux: Arc<dyn AuxiliaryKernel>,
    scheme: Scheme,
    volume_preserving: bool,
) -> Result<InvolutiveKernel> {
    let jacobian = if volume_preserving {
        JacobianMode::VolumePreserving
    } else {
        let flat = target.dim() + aux.dim();
        if flat > DEFAULT_JACOBIAN_CAP {
            return Err(Error::Config(format!(
                "numerical Jacobian limited to {DEFAULT_JACOBIAN_CAP} phase-space dimensions, got {flat}"
            )));
        }
        JacobianMode::Numerical {
            cap: DEFAULT_JACOBIAN_CAP,
        }
    };
    Ok(flip_kernel(target, aux, scheme.into_map(), jacobian))
}
