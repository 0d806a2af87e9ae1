//! Samplers for targets `μ(dq) ∝ exp(−Φ(q)) μ₀(dq)` with a Gaussian reference
//! `μ₀ = N(0, C)`: pCN, ∞MALA, ∞HMC and the generalized Langevin kernel.
//!
//! All of them are `S = R ∘ Ŝ` where `Ŝ` is the preconditioned Strang
//! splitting of
//!
//! `dq/dt = v,  dv/dt = −q − f(q)`
//!
//! into the exact rotation and kicks by a surrogate force `f` with values in
//! the Cameron–Martin space. Their acceptance ratios are computed from the
//! recorded trajectory and stay well defined as the truncation dimension
//! grows.
//!
//! For finite-dimensional checks each kernel also exposes the Lebesgue
//! form of its extended density: the kernel target is
//! `Φ(q) + ½ ‖C^{−1/2} q‖²` and the auxiliary log-density is
//! `−H̃(q, v) − ½ ‖C^{−1/2} v‖²`.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::gaussian::SpectralGaussian;
use crate::integrators::{momentum_flip, rotation, strang_hilbert, Field, HilbertTrajectory};
use crate::involutive::{
    AuxiliaryKernel, ExtendedMap, ExtendedPoint, FnPotential, Involution, InvolutiveKernel,
    Potential, Proposal,
};

/// `Φ`, the reference `μ₀` and the surrogate force `f`.
#[derive(Clone)]
pub struct HilbertTarget {
    phi: Arc<dyn Potential>,
    reference: SpectralGaussian,
    surrogate: Field,
}

impl fmt::Debug for HilbertTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HilbertTarget")
            .field("reference", &self.reference)
            .finish()
    }
}

impl HilbertTarget {
    /// The surrogate defaults to `C ∇Φ` when `Φ` has a gradient and to
    /// `f ≡ 0` otherwise.
    pub fn new(phi: Arc<dyn Potential>, reference: SpectralGaussian) -> Result<Self> {
        check_dim(reference.dim(), phi.dim())?;
        let surrogate = if phi.has_gradient() {
            preconditioned_gradient(&phi, &reference)
        } else {
            zero_field()
        };
        Ok(Self {
            phi,
            reference,
            surrogate,
        })
    }

    pub fn with_surrogate(mut self, f: Field) -> Self {
        self.surrogate = f;
        self
    }

    pub fn dim(&self) -> usize {
        self.reference.dim()
    }

    pub fn phi(&self) -> &Arc<dyn Potential> {
        &self.phi
    }

    pub fn reference(&self) -> &SpectralGaussian {
        &self.reference
    }

    pub fn surrogate(&self) -> &Field {
        &self.surrogate
    }

    /// `Φ + ½ ‖C^{−1/2} q‖²`, the potential of `μ` with respect to Lebesgue
    /// measure on the truncation.
    pub fn lebesgue_potential(&self) -> Arc<dyn Potential> {
        Arc::new(LebesguePotential {
            phi: Arc::clone(&self.phi),
            reference: self.reference.clone(),
        })
    }

    /// Same target with `f = C ∇Φ`.
    fn with_gradient_surrogate(&self) -> Result<Self> {
        if !self.phi.has_gradient() {
            return Err(Error::Config("this sampler needs the gradient of Φ".into()));
        }
        Ok(self
            .clone()
            .with_surrogate(preconditioned_gradient(&self.phi, &self.reference)))
    }
}

fn zero_field() -> Field {
    Arc::new(|q: &[f64]| vec![0.0; q.len()])
}

fn preconditioned_gradient(phi: &Arc<dyn Potential>, reference: &SpectralGaussian) -> Field {
    let phi = Arc::clone(phi);
    let reference = reference.clone();
    Arc::new(move |q: &[f64]| match phi.gradient(q) {
        Some(g) => reference.frac_power(1.0, &g),
        None => vec![f64::NAN; q.len()],
    })
}

struct LebesguePotential {
    phi: Arc<dyn Potential>,
    reference: SpectralGaussian,
}

impl Potential for LebesguePotential {
    fn dim(&self) -> usize {
        self.reference.dim()
    }

    fn value(&self, q: &[f64]) -> f64 {
        self.phi.value(q) + 0.5 * self.reference.cm_norm_sq(q)
    }

    fn gradient(&self, q: &[f64]) -> Option<Vec<f64>> {
        let g = self.phi.gradient(q)?;
        Some(
            g.iter()
                .zip(self.reference.frac_power(-1.0, q))
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    fn has_gradient(&self) -> bool {
        self.phi.has_gradient()
    }
}

type VarianceFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// The auxiliary law `V(q, ·)`.
#[derive(Clone)]
pub enum AuxLaw {
    /// `V(q, ·) = μ₀`, `H̃ ≡ 0`.
    Reference,
    /// `V(q, ·) = N(0, diag(k₁(q), …, k_d(q)))` in the eigenbasis, with
    /// `H̃(q, v) = Σ ½ vᵢ² (1/kᵢ − 1/λᵢ) + ½ log(kᵢ/λᵢ)`.
    Diagonal(Arc<VarianceFn>),
}

impl fmt::Debug for AuxLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuxLaw::Reference => f.write_str("Reference"),
            AuxLaw::Diagonal(_) => f.write_str("Diagonal(..)"),
        }
    }
}

impl AuxLaw {
    pub fn diagonal(k: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        AuxLaw::Diagonal(Arc::new(k))
    }

    fn variances(&self, reference: &SpectralGaussian, q: &[f64]) -> Option<Vec<f64>> {
        match self {
            AuxLaw::Reference => Some(reference.eigenvalues().to_vec()),
            AuxLaw::Diagonal(k) => {
                let k = k(q);
                if k.len() == reference.dim() && k.iter().all(|x| x.is_finite() && *x > 0.0) {
                    Some(k)
                } else {
                    None
                }
            }
        }
    }

    /// `H̃(q, v)`; `+∞` where the variances are invalid.
    pub fn h_tilde(&self, reference: &SpectralGaussian, q: &[f64], v: &[f64]) -> f64 {
        match self {
            AuxLaw::Reference => 0.0,
            AuxLaw::Diagonal(_) => match self.variances(reference, q) {
                Some(k) => k
                    .iter()
                    .zip(reference.eigenvalues())
                    .zip(v)
                    .map(|((k, l), v)| 0.5 * v * v * (1.0 / k - 1.0 / l) + 0.5 * (k / l).ln())
                    .sum(),
                None => f64::INFINITY,
            },
        }
    }

    /// Monte Carlo estimate of `∫ exp(−H̃(q, v)) μ₀(dv)`, which must be 1 for
    /// `V(q, ·)` to be a probability measure.
    pub fn normalization_estimate(
        &self,
        reference: &SpectralGaussian,
        q: &[f64],
        draws: usize,
        rng: &mut dyn RngCore,
    ) -> f64 {
        let total: f64 = (0..draws)
            .map(|_| {
                let v = reference.sample(rng);
                (-self.h_tilde(reference, q, &v)).exp()
            })
            .sum();
        total / draws as f64
    }
}

/// Auxiliary kernel for an [`AuxLaw`], with Lebesgue log-density
/// `−H̃(q, v) − ½ ‖C^{−1/2} v‖²`.
#[derive(Clone, Debug)]
pub struct HilbertAux {
    reference: SpectralGaussian,
    law: AuxLaw,
}

impl HilbertAux {
    pub fn new(reference: SpectralGaussian, law: AuxLaw) -> Self {
        Self { reference, law }
    }
}

impl AuxiliaryKernel for HilbertAux {
    fn dim(&self) -> usize {
        self.reference.dim()
    }

    fn sample(&self, q: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        match &self.law {
            AuxLaw::Reference => Ok(self.reference.sample(rng)),
            AuxLaw::Diagonal(_) => {
                let k = self.law.variances(&self.reference, q).ok_or_else(|| {
                    Error::Sampler("auxiliary variances must be finite and positive".into())
                })?;
                Ok(k.iter()
                    .map(|k| {
                        let xi: f64 = StandardNormal.sample(rng);
                        k.sqrt() * xi
                    })
                    .collect())
            }
        }
    }

    fn log_density(&self, q: &[f64], v: &[f64]) -> f64 {
        let h = self.law.h_tilde(&self.reference, q, v);
        if h == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        -h - 0.5 * self.reference.cm_norm_sq(v)
    }
}

/// Closed-form log-RN of `S = R ∘ Ŝ` along a recorded Strang trajectory
/// `(qᵢ, vᵢ)`, `i = 0..=n`, with forces `fᵢ = f(qᵢ)`:
///
/// `Φ(q₀) + H̃(q₀, v₀) − Φ(q_n) − H̃(q_n, −v_n)`
/// `− δ₁²/2 (‖f₀‖² − ‖f_n‖²) + 2δ₁ Σ_{i=1}^{n−1} ⟨vᵢ, fᵢ⟩ + δ₁ (⟨v₀, f₀⟩ + ⟨v_n, f_n⟩)`,
///
/// all norms and inner products taken in the Cameron–Martin space.
pub fn hilbert_log_rn_from_trajectory(
    target: &HilbertTarget,
    law: &AuxLaw,
    delta1: f64,
    traj: &HilbertTrajectory,
) -> f64 {
    let n = traj.len() - 1;
    let g = &target.reference;
    let (q0, v0, f0) = (&traj.q[0], &traj.v[0], &traj.forces[0]);
    let (qn, vn, fn_) = (&traj.q[n], &traj.v[n], &traj.forces[n]);
    let vn_flip: Vec<f64> = vn.iter().map(|x| -x).collect();

    let phi0 = target.phi.value(q0);
    let phin = target.phi.value(qn);
    if phin == f64::INFINITY || !phi0.is_finite() {
        return f64::NEG_INFINITY;
    }
    let mut value = phi0 + law.h_tilde(g, q0, v0) - phin - law.h_tilde(g, qn, &vn_flip);
    value -= 0.5 * delta1 * delta1 * (g.cm_norm_sq(f0) - g.cm_norm_sq(fn_));
    let inner: f64 = (1..n).map(|i| g.cm_inner(&traj.v[i], &traj.forces[i])).sum();
    value += 2.0 * delta1 * inner;
    value += delta1 * (g.cm_inner(v0, f0) + g.cm_inner(vn, fn_));
    if value.is_nan() {
        f64::NEG_INFINITY
    } else {
        value
    }
}

/// Runs the Strang scheme from `z` and evaluates the closed-form log-RN;
/// `−∞` if the trajectory diverges.
pub fn hilbert_log_rn(
    target: &HilbertTarget,
    law: &AuxLaw,
    delta1: f64,
    delta2: f64,
    n: usize,
    z: &ExtendedPoint,
) -> f64 {
    match strang_hilbert(n, delta1, delta2, &*target.surrogate, z) {
        Ok(traj) => hilbert_log_rn_from_trajectory(target, law, delta1, &traj),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// `S = R ∘ (Ξ¹_{δ₁} ∘ Ξ²_{δ₂} ∘ Ξ¹_{δ₁})ⁿ` with the closed-form log-RN.
pub struct StrangInvolution {
    target: HilbertTarget,
    law: AuxLaw,
    delta1: f64,
    delta2: f64,
    n: usize,
}

impl StrangInvolution {
    pub fn new(target: HilbertTarget, law: AuxLaw, delta1: f64, delta2: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("number of integration steps must be >= 1".into()));
        }
        if !(delta1.is_finite() && delta2.is_finite()) {
            return Err(Error::Config("step sizes must be finite".into()));
        }
        Ok(Self {
            target,
            law,
            delta1,
            delta2,
            n,
        })
    }

    pub fn trajectory(&self, z: &ExtendedPoint) -> Result<HilbertTrajectory> {
        strang_hilbert(self.n, self.delta1, self.delta2, &*self.target.surrogate, z)
    }
}

impl ExtendedMap for StrangInvolution {
    fn apply(&self, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        self.trajectory(z).map(|t| momentum_flip(&t.last()))
    }
}

impl Involution for StrangInvolution {
    fn log_rn(&self, z: &ExtendedPoint) -> f64 {
        self.propose(z).log_rn
    }

    fn propose(&self, z: &ExtendedPoint) -> Proposal {
        match self.trajectory(z) {
            Ok(traj) => Proposal {
                log_rn: hilbert_log_rn_from_trajectory(&self.target, &self.law, self.delta1, &traj),
                image: Some(momentum_flip(&traj.last())),
            },
            Err(_) => Proposal {
                image: None,
                log_rn: f64::NEG_INFINITY,
            },
        }
    }
}

/// `S = R ∘ rotation(arccos ρ)` with log-RN `Φ(q) − Φ(q̃)`.
pub struct PcnInvolution {
    phi: Arc<dyn Potential>,
    angle: f64,
}

impl ExtendedMap for PcnInvolution {
    fn apply(&self, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        Ok(momentum_flip(&rotation(self.angle, z)))
    }
}

impl Involution for PcnInvolution {
    fn log_rn(&self, z: &ExtendedPoint) -> f64 {
        self.propose(z).log_rn
    }

    fn propose(&self, z: &ExtendedPoint) -> Proposal {
        let image = momentum_flip(&rotation(self.angle, z));
        if !image.is_finite() {
            return Proposal {
                image: None,
                log_rn: f64::NEG_INFINITY,
            };
        }
        Proposal {
            log_rn: pcn_log_ratio(&*self.phi, &z.q, &image.q),
            image: Some(image),
        }
    }
}

/// Step parameter of the Crank–Nicolson family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PcnStep {
    /// Autoregression coefficient `ρ ∈ (−1, 1]`.
    Rho(f64),
    /// `δ ≥ 0`, mapped to `ρ = (4 − δ)/(4 + δ)`.
    Delta(f64),
}

impl PcnStep {
    pub fn rho(self) -> Result<f64> {
        let rho = match self {
            PcnStep::Rho(r) => r,
            PcnStep::Delta(d) => {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::Config(format!("delta must be non-negative, got {d}")));
                }
                (4.0 - d) / (4.0 + d)
            }
        };
        if rho.is_finite() && rho > -1.0 && rho <= 1.0 {
            Ok(rho)
        } else {
            Err(Error::Config(format!("rho must lie in (-1, 1], got {rho}")))
        }
    }
}

fn kernel(target: &HilbertTarget, law: AuxLaw, involution: Arc<dyn Involution>) -> InvolutiveKernel {
    InvolutiveKernel::new(
        target.lebesgue_potential(),
        Arc::new(HilbertAux::new(target.reference.clone(), law)),
        involution,
    )
}

/// Preconditioned Crank–Nicolson: `q̃ = ρ q + √(1 − ρ²) v`, `v ~ μ₀`,
/// accepted with `1 ∧ exp(Φ(q) − Φ(q̃))`.
pub fn pcn(target: &HilbertTarget, step: PcnStep) -> Result<InvolutiveKernel> {
    let rho = step.rho()?;
    let inv = PcnInvolution {
        phi: Arc::clone(&target.phi),
        angle: rho.acos(),
    };
    Ok(kernel(target, AuxLaw::Reference, Arc::new(inv)))
}

/// `log(1 ∧ α)` argument for pCN, `Φ(q) − Φ(q̃)`.
pub fn pcn_log_ratio(phi: &dyn Potential, q: &[f64], q_new: &[f64]) -> f64 {
    let new = phi.value(q_new);
    if new == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    let r = phi.value(q) - new;
    if r.is_nan() {
        f64::NEG_INFINITY
    } else {
        r
    }
}

fn rho_of_delta(delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    Ok((4.0 - delta) / (4.0 + delta))
}

/// The generalized Langevin kernel with surrogate force `f`:
/// `q̃ = ρ q + √(1 − ρ²)(v − √δ/2 f(q))`, `ρ = (4 − δ)/(4 + δ)`.
pub fn gen_langevin(target: &HilbertTarget, f: Field, delta: f64) -> Result<InvolutiveKernel> {
    let rho = rho_of_delta(delta)?;
    let t = target.clone().with_surrogate(f);
    let inv = StrangInvolution::new(t.clone(), AuxLaw::Reference, 0.5 * delta.sqrt(), rho.acos(), 1)?;
    Ok(kernel(&t, AuxLaw::Reference, Arc::new(inv)))
}

/// ∞MALA: the generalized Langevin kernel with `f = C ∇Φ`.
pub fn inf_mala(target: &HilbertTarget, delta: f64) -> Result<InvolutiveKernel> {
    let t = target.with_gradient_surrogate()?;
    let f = Arc::clone(&t.surrogate);
    gen_langevin(&t, f, delta)
}

/// ∞HMC: `v ~ V(q, ·)`, `n` Strang steps with the target's surrogate force,
/// then the momentum flip.
pub fn inf_hmc(
    target: &HilbertTarget,
    law: AuxLaw,
    delta1: f64,
    delta2: f64,
    n: usize,
) -> Result<InvolutiveKernel> {
    let inv = StrangInvolution::new(target.clone(), law.clone(), delta1, delta2, n)?;
    Ok(kernel(target, law, Arc::new(inv)))
}

/// Generalized Langevin proposal `F(q, v)`.
pub fn gen_langevin_proposal(f: &dyn Fn(&[f64]) -> Vec<f64>, delta: f64, q: &[f64], v: &[f64]) -> Vec<f64> {
    let rho = (4.0 - delta) / (4.0 + delta);
    let s = (1.0 - rho * rho).sqrt();
    let h = 0.5 * delta.sqrt();
    q.iter()
        .zip(v)
        .zip(f(q))
        .map(|((q, v), f)| rho * q + s * (v - h * f))
        .collect()
}

/// `v` such that `F(q, v) = q̃`.
pub fn gen_langevin_inverse(f: &dyn Fn(&[f64]) -> Vec<f64>, delta: f64, q: &[f64], q_new: &[f64]) -> Vec<f64> {
    let rho = (4.0 - delta) / (4.0 + delta);
    let s = (1.0 - rho * rho).sqrt();
    let h = 0.5 * delta.sqrt();
    q.iter()
        .zip(q_new)
        .zip(f(q))
        .map(|((q, qn), f)| (qn - rho * q) / s + h * f)
        .collect()
}

fn log_beta(target: &HilbertTarget, f: &dyn Fn(&[f64]) -> Vec<f64>, delta: f64, q: &[f64], q_new: &[f64]) -> f64 {
    let g = &target.reference;
    let rho = (4.0 - delta) / (4.0 + delta);
    let s = (1.0 - rho * rho).sqrt();
    let fq = f(q);
    let w: Vec<f64> = q.iter().zip(q_new).map(|(q, qn)| (qn - rho * q) / s).collect();
    -target.phi.value(q) - delta / 8.0 * g.cm_norm_sq(&fq) - 0.5 * delta.sqrt() * g.cm_inner(&w, &fq)
}

/// `log β(q̃, q) − log β(q, q̃)` for the generalized Langevin kernel, with
/// `log β(q, q̃) = −Φ(q) − δ/8 ‖f(q)‖² − √δ/2 ⟨(q̃ − ρ q)/√(1 − ρ²), f(q)⟩`
/// in the Cameron–Martin geometry.
pub fn gen_langevin_log_ratio(
    target: &HilbertTarget,
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    delta: f64,
    q: &[f64],
    q_new: &[f64],
) -> f64 {
    let r = log_beta(target, f, delta, q_new, q) - log_beta(target, f, delta, q, q_new);
    if r.is_nan() {
        f64::NEG_INFINITY
    } else {
        r
    }
}

/// The β-ratio for ∞MALA (`f = C ∇Φ`).
pub fn inf_mala_log_ratio(target: &HilbertTarget, delta: f64, q: &[f64], q_new: &[f64]) -> Result<f64> {
    let t = target.with_gradient_surrogate()?;
    Ok(gen_langevin_log_ratio(&t, &*t.surrogate, delta, q, q_new))
}

/// `Φ(q) = ½ ‖q‖⁴ / (1 + ‖q‖²)`: smooth, bounded below, quadratic growth.
pub fn phi_quartic_bounded(dim: usize) -> FnPotential {
    FnPotential::new(dim, |q: &[f64]| {
        let s: f64 = q.iter().map(|x| x * x).sum();
        0.5 * s * s / (1.0 + s)
    })
    .with_gradient(|q: &[f64]| {
        let s: f64 = q.iter().map(|x| x * x).sum();
        let k = (s * s + 2.0 * s) / ((1.0 + s) * (1.0 + s));
        q.iter().map(|x| k * x).collect()
    })
}

/// `Φ(q) = ⟨a, q⟩`.
pub fn phi_linear(a: Vec<f64>) -> FnPotential {
    let grad = a.clone();
    FnPotential::new(a.len(), move |q: &[f64]| a.iter().zip(q).map(|(a, q)| a * q).sum())
        .with_gradient(move |_q: &[f64]| grad.clone())
}

/// `Φ ≡ 0`.
pub fn phi_zero(dim: usize) -> FnPotential {
    FnPotential::new(dim, |_q: &[f64]| 0.0).with_gradient(|q: &[f64]| vec![0.0; q.len()])
}

/// Per-dimension statistics of [`leapfrog_refinement_probe`].
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementRow {
    pub dim: usize,
    /// Median over draws of `δ² ‖C^{−1/2}(q + f(q))‖²`, the Cameron–Martin
    /// norm of the kick of a splitting that treats `−q − f(q)` as one force.
    pub naive_median: f64,
    /// Median over draws of `|log_rn|` for the preconditioned splitting.
    pub splitting_median: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementReport {
    pub rows: Vec<RefinementRow>,
}

impl RefinementReport {
    /// Whether the naive statistic increases strictly along the sequence.
    pub fn naive_is_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].naive_median > w[0].naive_median)
    }

    /// Splitting median at the largest dimension over that at the smallest.
    pub fn splitting_ratio(&self) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => b.splitting_median / a.splitting_median,
            _ => f64::NAN,
        }
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Compares a naive leapfrog splitting with the preconditioned one under
/// mesh refinement.
///
/// For each `d`, draws `q, v ~ μ₀` and records the Cameron–Martin norm of
/// the naive kick `δ (q + f(q))` (infinite in the limit, so it grows with
/// `d`) and `|log_rn|` of the preconditioned splitting with `δ₁ = δ/2`,
/// `δ₂ = δ` and `n_steps` steps (which converges).
pub fn leapfrog_refinement_probe(
    make_target: &dyn Fn(usize) -> Result<HilbertTarget>,
    delta: f64,
    n_steps: usize,
    dims: &[usize],
    draws: usize,
    rng: &mut dyn RngCore,
) -> Result<RefinementReport> {
    if dims.is_empty() || dims.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("dimension sequence must be non-empty and increasing".into()));
    }
    if draws == 0 {
        return Err(Error::Config("need at least one draw".into()));
    }
    let mut rows = Vec::with_capacity(dims.len());
    for &d in dims {
        let target = make_target(d)?;
        check_dim(d, target.dim())?;
        let g = &target.reference;
        let mut naive = Vec::with_capacity(draws);
        let mut split = Vec::with_capacity(draws);
        for _ in 0..draws {
            let q = g.sample(rng);
            let v = g.sample(rng);
            let shift: Vec<f64> = q.iter().zip((target.surrogate)(&q)).map(|(a, b)| a + b).collect();
            naive.push(delta * delta * g.cm_norm_sq(&shift));
            let lr = hilbert_log_rn(&target, &AuxLaw::Reference, 0.5 * delta, delta, n_steps, &ExtendedPoint::new(q, v));
            split.push(lr.abs());
        }
        rows.push(RefinementRow {
            dim: d,
            naive_median: median(naive),
            splitting_median: median(split),
        });
    }
    Ok(RefinementReport { rows })
}
