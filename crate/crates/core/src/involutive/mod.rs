//! The generic involutive Metropolis–Hastings kernel.
//!
//! A kernel is the triple (target, auxiliary kernel, involution). One step
//! draws `v ~ V(q, ·)`, maps `(q, v)` through the involution `S` and accepts
//! the position part of `S(q, v)` with probability `1 ∧ exp(log_rn(q, v))`,
//! where `log_rn` is the log Radon–Nikodym derivative `log dS*M/dM` of the
//! extended measure `M(dq, dv) = V(q, dv) μ(dq)`.
//!
//! All densities are unnormalized. Normalization constants cancel in every
//! acceptance ratio and are never computed.

mod classic;
mod flip;
mod oracle;
mod proposal_map;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{check_dim, Error, Result};

pub use classic::{classic_mh_kernel, ClassicInvolution, FnAuxiliary};
pub use flip::{FlipInvolution, JacobianMode};
pub use oracle::{generic_log_rn, generic_log_rn_with_cap};
pub use proposal_map::{involution_from_proposal_map, ProposalMapInvolution};

/// A point `(q, v)` of the extended phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedPoint {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl ExtendedPoint {
    pub fn new(q: Vec<f64>, v: Vec<f64>) -> Self {
        Self { q, v }
    }

    /// Concatenation `(q, v)` as a single vector.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.q.len() + self.v.len());
        out.extend_from_slice(&self.q);
        out.extend_from_slice(&self.v);
        out
    }

    /// Inverse of [`ExtendedPoint::to_flat`]; the first `q_dim` entries are positions.
    pub fn from_flat(flat: &[f64], q_dim: usize) -> Self {
        Self {
            q: flat[..q_dim].to_vec(),
            v: flat[q_dim..].to_vec(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// `‖self − other‖∞` over both blocks.
    pub fn max_abs_diff(&self, other: &ExtendedPoint) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, |m, d| if d.is_nan() { f64::INFINITY } else { m.max(d) })
    }

    pub fn sup_norm(&self) -> f64 {
        self.q.iter().chain(&self.v).fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Unnormalized negative log-density `U(q)` (or `Φ(q)`) of the target.
///
/// `value` returns a finite number or `+∞`, the latter encoding zero density.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, q: &[f64]) -> f64;

    fn gradient(&self, _q: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn has_gradient(&self) -> bool {
        false
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VecFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A [`Potential`] assembled from closures.
#[derive(Clone)]
pub struct FnPotential {
    dim: usize,
    value: Arc<ValueFn>,
    gradient: Option<Arc<VecFn>>,
}

impl FnPotential {
    pub fn new(dim: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }
}

impl fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnPotential")
            .field("dim", &self.dim)
            .field("has_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl Potential for FnPotential {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, q: &[f64]) -> f64 {
        (self.value)(q)
    }

    fn gradient(&self, q: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(q))
    }

    fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }
}

/// The auxiliary law `V(q, dv)`: a sampler plus the log-density terms it
/// contributes to the extended measure (with respect to Lebesgue measure on
/// the auxiliary block, constants dropped).
pub trait AuxiliaryKernel: Send + Sync {
    /// Dimension of the auxiliary variable.
    fn dim(&self) -> usize;

    fn sample(&self, q: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>>;

    /// `−K(q, v) − ln Z_K(q)`; `−∞` where the density vanishes or is undefined.
    fn log_density(&self, q: &[f64], v: &[f64]) -> f64;
}

/// A map on the extended phase space.
pub trait ExtendedMap: Send + Sync {
    fn apply(&self, z: &ExtendedPoint) -> Result<ExtendedPoint>;
}

impl<F> ExtendedMap for F
where
    F: Fn(&ExtendedPoint) -> Result<ExtendedPoint> + Send + Sync,
{
    fn apply(&self, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        self(z)
    }
}

/// The image of a point under an involution together with `log dS*M/dM`.
#[derive(Clone, Debug)]
pub struct Proposal {
    pub image: Option<ExtendedPoint>,
    pub log_rn: f64,
}

/// An involution `S` bundled with the log Radon–Nikodym derivative of the
/// pushforward of the extended measure.
pub trait Involution: ExtendedMap {
    fn log_rn(&self, z: &ExtendedPoint) -> f64;

    /// Image and log-RN in one pass. Implementations that record a
    /// trajectory override this to avoid integrating twice.
    fn propose(&self, z: &ExtendedPoint) -> Proposal {
        match self.apply(z) {
            Ok(image) if image.is_finite() => Proposal {
                log_rn: self.log_rn(z),
                image: Some(image),
            },
            _ => Proposal {
                image: None,
                log_rn: f64::NEG_INFINITY,
            },
        }
    }
}

/// `min(1, exp(log_rn))`, with NaN and `−∞` mapped to 0.
pub fn accept_prob(log_rn: f64) -> f64 {
    if log_rn.is_nan() {
        0.0
    } else if log_rn >= 0.0 {
        1.0
    } else {
        log_rn.exp()
    }
}

/// Outcome of one Metropolis step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub proposal: Vec<f64>,
    pub alpha: f64,
    pub accepted: bool,
    pub next: Vec<f64>,
}

/// Anything that advances a chain by one step.
pub trait Transition: Send + Sync {
    fn dim(&self) -> usize;

    fn step(&self, q: &[f64], rng: &mut dyn RngCore) -> Result<StepResult>;
}

/// The kernel `P(q, dq̃)` assembled from a target, an auxiliary kernel and
/// an involution. Immutable and shareable across threads.
#[derive(Clone)]
pub struct InvolutiveKernel {
    target: Arc<dyn Potential>,
    aux: Arc<dyn AuxiliaryKernel>,
    involution: Arc<dyn Involution>,
}

impl fmt::Debug for InvolutiveKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InvolutiveKernel")
            .field("dim", &self.target.dim())
            .field("aux_dim", &self.aux.dim())
            .finish()
    }
}

impl InvolutiveKernel {
    pub fn new(
        target: Arc<dyn Potential>,
        aux: Arc<dyn AuxiliaryKernel>,
        involution: Arc<dyn Involution>,
    ) -> Self {
        Self {
            target,
            aux,
            involution,
        }
    }

    pub fn target(&self) -> &Arc<dyn Potential> {
        &self.target
    }

    pub fn aux(&self) -> &Arc<dyn AuxiliaryKernel> {
        &self.aux
    }

    pub fn involution(&self) -> &Arc<dyn Involution> {
        &self.involution
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    /// Unnormalized log-density of the extended measure, `−U(q) + log V(q, v)`.
    pub fn ext_log_density(&self, z: &ExtendedPoint) -> f64 {
        let u = self.target.value(&z.q);
        if u == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        -u + self.aux.log_density(&z.q, &z.v)
    }

    /// One Metropolis step from `q`: exactly one auxiliary draw and one uniform.
    pub fn mh_step(&self, q: &[f64], rng: &mut dyn RngCore) -> Result<StepResult> {
        check_dim(self.dim(), q.len())?;
        let v = self.aux.sample(q, rng)?;
        let z = ExtendedPoint::new(q.to_vec(), v);
        let proposal = self.involution.propose(&z);
        Ok(finish_step(q, proposal.image.map(|p| p.q), proposal.log_rn, rng))
    }
}

impl Transition for InvolutiveKernel {
    fn dim(&self) -> usize {
        InvolutiveKernel::dim(self)
    }

    fn step(&self, q: &[f64], rng: &mut dyn RngCore) -> Result<StepResult> {
        self.mh_step(q, rng)
    }
}

fn finish_step(
    q: &[f64],
    proposal: Option<Vec<f64>>,
    log_rn: f64,
    rng: &mut dyn RngCore,
) -> StepResult {
    let (proposal, alpha) = match proposal {
        Some(p) => (p, accept_prob(log_rn)),
        None => (q.to_vec(), 0.0),
    };
    let u: f64 = rng.random();
    let accepted = u < alpha;
    let next = if accepted { proposal.clone() } else { q.to_vec() };
    StepResult {
        proposal,
        alpha,
        accepted,
        next,
    }
}

/// Per-step record kept alongside the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSummary {
    pub alpha: f64,
    pub accepted: bool,
}

/// A finished chain: `states[0]` is the initial point, `steps[k]` describes
/// the transition from `states[k]` to `states[k + 1]`.
#[derive(Clone, Debug, Default)]
pub struct Chain {
    pub states: Vec<Vec<f64>>,
    pub steps: Vec<StepSummary>,
}

impl Chain {
    pub fn acceptance_rate(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().filter(|s| s.accepted).count() as f64 / self.steps.len() as f64
    }

    /// Coordinate `i` of every state.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

/// Runs `n_steps` transitions from `q0`. Deterministic given the RNG state.
pub fn run_chain<T, R>(kernel: &T, q0: &[f64], n_steps: usize, rng: &mut R) -> Result<Chain>
where
    T: Transition + ?Sized,
    R: RngCore,
{
    check_dim(kernel.dim(), q0.len())?;
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut steps = Vec::with_capacity(n_steps);
    states.push(q0.to_vec());
    let mut current = q0.to_vec();
    for _ in 0..n_steps {
        let res = kernel.step(&current, rng)?;
        steps.push(StepSummary {
            alpha: res.alpha,
            accepted: res.accepted,
        });
        current = res.next;
        states.push(current.clone());
    }
    Ok(Chain { states, steps })
}

type WeightFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A state-dependent mixture of involutive kernels.
///
/// Kernel `j` is selected with probability `κ_j(q)`; its acceptance ratio
/// picks up the factor `κ_j(q̃) / κ_j(q)` so that the mixture stays
/// reversible.
#[derive(Clone)]
pub struct Mixture {
    kernels: Vec<InvolutiveKernel>,
    weights: Arc<WeightFn>,
}

impl Mixture {
    pub fn new(
        kernels: Vec<InvolutiveKernel>,
        weights: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let first = kernels
            .first()
            .ok_or_else(|| Error::Config("mixture needs at least one kernel".into()))?;
        let dim = first.dim();
        for k in &kernels {
            check_dim(dim, k.dim())?;
        }
        Ok(Self {
            kernels,
            weights: Arc::new(weights),
        })
    }

    /// Mixture with state-independent weights.
    pub fn constant(kernels: Vec<InvolutiveKernel>, weights: Vec<f64>) -> Result<Self> {
        Self::new(kernels, move |_| weights.clone())
    }

    pub fn kernels(&self) -> &[InvolutiveKernel] {
        &self.kernels
    }

    fn checked_weights(&self, q: &[f64]) -> Result<Vec<f64>> {
        let w = (self.weights)(q);
        check_dim(self.kernels.len(), w.len())?;
        let total: f64 = w.iter().sum();
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "mixture weights must lie on the simplex, got {w:?}"
            )));
        }
        Ok(w)
    }

    /// One mixture step. Consumes one selection uniform, one auxiliary draw
    /// and one acceptance uniform.
    pub fn mixture_step(&self, q: &[f64], rng: &mut dyn RngCore) -> Result<(usize, StepResult)> {
        check_dim(self.kernels[0].dim(), q.len())?;
        let w = self.checked_weights(q)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut j = w.iter().rposition(|x| *x > 0.0).unwrap_or(0);
        for (i, wi) in w.iter().enumerate() {
            acc += wi;
            if u < acc && *wi > 0.0 {
                j = i;
                break;
            }
        }
        let kernel = &self.kernels[j];
        let v = kernel.aux.sample(q, rng)?;
        let z = ExtendedPoint::new(q.to_vec(), v);
        let proposal = kernel.involution.propose(&z);
        let log_rn = match &proposal.image {
            Some(image) => {
                let w_new = self.checked_weights(&image.q).map(|w| w[j]).unwrap_or(0.0);
                proposal.log_rn + w_new.ln() - w[j].ln()
            }
            None => f64::NEG_INFINITY,
        };
        Ok((j, finish_step(q, proposal.image.map(|p| p.q), log_rn, rng)))
    }
}

impl Transition for Mixture {
    fn dim(&self) -> usize {
        self.kernels[0].dim()
    }

    fn step(&self, q: &[f64], rng: &mut dyn RngCore) -> Result<StepResult> {
        self.mixture_step(q, rng).map(|(_, r)| r)
    }
}
