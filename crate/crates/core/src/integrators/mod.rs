//! Flow maps on the extended phase space and the reversible integrators
//! composed from them.
//!
//! Sign conventions: a *kick* moves the auxiliary block, a *drift* moves
//! the position block.
//!
//! | map            | image of `(q, v)`                               |
//! |----------------|-------------------------------------------------|
//! | `kick`         | `(q, v + t f₂(q))`                              |
//! | `drift`        | `(q + t f₁(v), v)`                              |
//! | `precond_kick` | `(q, v − t f(q))`                               |
//! | `rotation`     | `(cos t q + sin t v, −sin t q + cos t v)`       |
//! | `momentum_flip`| `(q, −v)`                                       |

mod checks;
mod implicit;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::involutive::{ExtendedMap, ExtendedPoint};

pub use checks::{
    check_reversibility, numerical_logdet_jacobian, numerical_logdet_jacobian_with_cap,
    ReversibilityReport, DEFAULT_JACOBIAN_CAP,
};
pub use implicit::{euler_a_step, euler_b_step, stormer_verlet, ImplicitOptions, StormerVerlet};

/// A vector field of one block (`f(q)` or `f(v)`).
pub type Field = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A vector field on the whole phase space, `f(q, v)`.
pub type PhaseField = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// A one-parameter family of maps `t ↦ Ξ_t`.
pub trait FlowMap: Send + Sync {
    fn flow(&self, t: f64, z: &ExtendedPoint) -> Result<ExtendedPoint>;
}

pub fn momentum_flip(z: &ExtendedPoint) -> ExtendedPoint {
    ExtendedPoint::new(z.q.clone(), z.v.iter().map(|x| -x).collect())
}

fn axpy(t: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(b, a)| b + t * a).collect()
}

pub fn kick(t: f64, f2: &dyn Fn(&[f64]) -> Vec<f64>, z: &ExtendedPoint) -> ExtendedPoint {
    let force = f2(&z.q);
    ExtendedPoint::new(z.q.clone(), axpy(t, &force, &z.v))
}

pub fn drift(t: f64, f1: &dyn Fn(&[f64]) -> Vec<f64>, z: &ExtendedPoint) -> ExtendedPoint {
    let vel = f1(&z.v);
    ExtendedPoint::new(axpy(t, &vel, &z.q), z.v.clone())
}

pub fn precond_kick(t: f64, f: &dyn Fn(&[f64]) -> Vec<f64>, z: &ExtendedPoint) -> ExtendedPoint {
    let force = f(&z.q);
    ExtendedPoint::new(z.q.clone(), axpy(-t, &force, &z.v))
}

pub fn rotation(t: f64, z: &ExtendedPoint) -> ExtendedPoint {
    let (s, c) = t.sin_cos();
    let q = z.q.iter().zip(&z.v).map(|(q, v)| c * q + s * v).collect();
    let v = z.q.iter().zip(&z.v).map(|(q, v)| -s * q + c * v).collect();
    ExtendedPoint::new(q, v)
}

fn ensure_finite(z: &ExtendedPoint, steps: usize) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence { steps })
    }
}

/// `(Ξ¹_{δ₁} ∘ Ξ²_{δ₂} ∘ Ξ¹_{δ₁})ⁿ` with `Ξ¹` the kick by `f2(q)` and `Ξ²`
/// the drift by `f1(v)`.
pub fn leapfrog(
    n: usize,
    delta1: f64,
    delta2: f64,
    f1: &dyn Fn(&[f64]) -> Vec<f64>,
    f2: &dyn Fn(&[f64]) -> Vec<f64>,
    z: &ExtendedPoint,
) -> Result<ExtendedPoint> {
    if n == 0 {
        return Err(Error::Config("leapfrog needs n >= 1".into()));
    }
    let mut q = z.q.clone();
    let mut v = z.v.clone();
    let mut force = f2(&q);
    for step in 0..n {
        v.iter_mut().zip(&force).for_each(|(v, f)| *v += delta1 * f);
        let vel = f1(&v);
        q.iter_mut().zip(&vel).for_each(|(q, u)| *q += delta2 * u);
        force = f2(&q);
        v.iter_mut().zip(&force).for_each(|(v, f)| *v += delta1 * f);
        if !(q.iter().all(|x| x.is_finite()) && v.iter().all(|x| x.is_finite())) {
            return Err(Error::Divergence { steps: step + 1 });
        }
    }
    Ok(ExtendedPoint::new(q, v))
}

/// The leapfrog scheme as a reusable map.
#[derive(Clone)]
pub struct Leapfrog {
    pub n: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub f1: Field,
    pub f2: Field,
}

impl Leapfrog {
    pub fn new(n: usize, delta1: f64, delta2: f64, f1: Field, f2: Field) -> Self {
        Self {
            n,
            delta1,
            delta2,
            f1,
            f2,
        }
    }
}

impl ExtendedMap for Leapfrog {
    fn apply(&self, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        leapfrog(self.n, self.delta1, self.delta2, &*self.f1, &*self.f2, z)
    }
}

/// States `(qᵢ, vᵢ)`, `i = 0..=n`, of the preconditioned Strang scheme,
/// with the surrogate force `f(qᵢ)` at each of them.
#[derive(Clone, Debug)]
pub struct HilbertTrajectory {
    pub q: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub forces: Vec<Vec<f64>>,
}

impl HilbertTrajectory {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn last(&self) -> ExtendedPoint {
        let n = self.q.len() - 1;
        ExtendedPoint::new(self.q[n].clone(), self.v[n].clone())
    }
}

/// `(Ξ¹_{δ₁} ∘ Ξ²_{δ₂} ∘ Ξ¹_{δ₁})ⁿ` with `Ξ¹` the preconditioned kick
/// `v ↦ v − t f(q)` and `Ξ²` the rotation, recording every intermediate
/// state.
pub fn strang_hilbert(
    n: usize,
    delta1: f64,
    delta2: f64,
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    z: &ExtendedPoint,
) -> Result<HilbertTrajectory> {
    if n == 0 {
        return Err(Error::Config("strang_hilbert needs n >= 1".into()));
    }
    let (s, c) = delta2.sin_cos();
    let mut traj = HilbertTrajectory {
        q: Vec::with_capacity(n + 1),
        v: Vec::with_capacity(n + 1),
        forces: Vec::with_capacity(n + 1),
    };
    let mut q = z.q.clone();
    let mut v = z.v.clone();
    let mut force = f(&q);
    traj.q.push(q.clone());
    traj.v.push(v.clone());
    traj.forces.push(force.clone());
    for step in 0..n {
        v.iter_mut().zip(&force).for_each(|(v, f)| *v -= delta1 * f);
        for (qi, vi) in q.iter_mut().zip(v.iter_mut()) {
            let (a, b) = (*qi, *vi);
            *qi = c * a + s * b;
            *vi = -s * a + c * b;
        }
        force = f(&q);
        v.iter_mut().zip(&force).for_each(|(v, f)| *v -= delta1 * f);
        let state = ExtendedPoint::new(q.clone(), v.clone());
        ensure_finite(&state, step + 1)?;
        if !force.iter().all(|x| x.is_finite()) {
            return Err(Error::Divergence { steps: step + 1 });
        }
        traj.q.push(q.clone());
        traj.v.push(v.clone());
        traj.forces.push(force.clone());
    }
    Ok(traj)
}

/// Kick by `f2(q)`.
#[derive(Clone)]
pub struct Kick(pub Field);

/// Drift by `f1(v)`.
#[derive(Clone)]
pub struct Drift(pub Field);

/// Preconditioned kick `v ↦ v − t f(q)`.
#[derive(Clone)]
pub struct PrecondKick(pub Field);

/// Exact flow of `dq/dt = v, dv/dt = −q`.
#[derive(Clone, Copy, Debug)]
pub struct Rotation;

impl FlowMap for Kick {
    fn flow(&self, t: f64, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        Ok(kick(t, &*self.0, z))
    }
}

impl FlowMap for Drift {
    fn flow(&self, t: f64, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        Ok(drift(t, &*self.0, z))
    }
}

impl FlowMap for PrecondKick {
    fn flow(&self, t: f64, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        Ok(precond_kick(t, &*self.0, z))
    }
}

impl FlowMap for Rotation {
    fn flow(&self, t: f64, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        Ok(rotation(t, z))
    }
}

/// Palindromic composition `(Φ₁ ∘ ⋯ ∘ Φ_l ∘ Φ_l ∘ ⋯ ∘ Φ₁)ⁿ` of flow stages
/// `Φ_j = Ξ^{(j)}_{t_j}`; the first stage listed acts first.
///
/// Every stage appears twice, so a single stage `(Ξ, t)` yields `Ξ_t ∘ Ξ_t`
/// and the stages `(kick, δ₁), (drift, δ₂/2)` yield one leapfrog step.
/// If each stage is `R`-reversible, so is the composition.
#[derive(Clone)]
pub struct Palindrome {
    stages: Vec<(Arc<dyn FlowMap>, f64)>,
    repeats: usize,
}

impl Palindrome {
    pub fn new(stages: Vec<(Arc<dyn FlowMap>, f64)>, repeats: usize) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Config("palindrome needs at least one stage".into()));
        }
        if repeats == 0 {
            return Err(Error::Config("palindrome needs repeats >= 1".into()));
        }
        Ok(Self { stages, repeats })
    }

    pub fn stages(&self) -> &[(Arc<dyn FlowMap>, f64)] {
        &self.stages
    }
}

impl ExtendedMap for Palindrome {
    fn apply(&self, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        let mut cur = z.clone();
        for rep in 0..self.repeats {
            for (stage, t) in self.stages.iter().chain(self.stages.iter().rev()) {
                cur = stage.flow(*t, &cur)?;
            }
            ensure_finite(&cur, rep + 1)?;
        }
        Ok(cur)
    }
}

/// Free-function form of [`Palindrome::new`].
pub fn palindromic_compose(
    stages: Vec<(Arc<dyn FlowMap>, f64)>,
    repeats: usize,
) -> Result<Palindrome> {
    Palindrome::new(stages, repeats)
}
