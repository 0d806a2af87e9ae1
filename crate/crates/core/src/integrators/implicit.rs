//! Implicit Euler-A / Euler-B steps and the generalized Störmer–Verlet
//! scheme for non-separable fields `f₁(q, v)`, `f₂(q, v)`.
//!
//! Implicit equations are solved by fixed-point iteration started from the
//! explicit Euler step. The iteration contracts when `δ` times the
//! Lipschitz constant of the field is below one; beyond that the step
//! fails with [`Error::NonConvergence`].

use super::PhaseField;
use crate::error::{Error, Result};
use crate::involutive::{ExtendedMap, ExtendedPoint};

type PairFn<'a> = &'a dyn Fn(&[f64], &[f64]) -> Vec<f64>;

/// Fixed-point solver settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImplicitOptions {
    /// Converged once `‖x_{k+1} − x_k‖∞ ≤ tol · (1 + ‖x_{k+1}‖∞)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ImplicitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
        }
    }
}

/// Solves `x = base + δ g(x)` starting from `base + δ g(base)`.
fn fixed_point(
    base: &[f64],
    delta: f64,
    g: impl Fn(&[f64]) -> Vec<f64>,
    opts: &ImplicitOptions,
) -> Result<Vec<f64>> {
    let step = |x: &[f64]| -> Vec<f64> {
        base.iter().zip(g(x)).map(|(b, gx)| b + delta * gx).collect()
    };
    let mut x = step(base);
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let next = step(&x);
        residual = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, |m, d| if d.is_nan() { f64::NAN } else { m.max(d) });
        let scale = 1.0 + next.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        x = next;
        if residual.is_nan() || !residual.is_finite() {
            break;
        }
        if residual <= opts.tol * scale {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Euler-B: `v = v̄ + δ f₂(q̄, v)` (implicit), then `q = q̄ + δ f₁(q̄, v)`.
pub fn euler_b_step(
    delta: f64,
    f1: PairFn<'_>,
    f2: PairFn<'_>,
    z: &ExtendedPoint,
    opts: &ImplicitOptions,
) -> Result<ExtendedPoint> {
    let v = fixed_point(&z.v, delta, |v| f2(&z.q, v), opts)?;
    let vel = f1(&z.q, &v);
    let q = z.q.iter().zip(&vel).map(|(a, b)| a + delta * b).collect();
    Ok(ExtendedPoint::new(q, v))
}

/// Euler-A: `q = q̄ + δ f₁(q, v̄)` (implicit), then `v = v̄ + δ f₂(q, v̄)`.
pub fn euler_a_step(
    delta: f64,
    f1: PairFn<'_>,
    f2: PairFn<'_>,
    z: &ExtendedPoint,
    opts: &ImplicitOptions,
) -> Result<ExtendedPoint> {
    let q = fixed_point(&z.q, delta, |q| f1(q, &z.v), opts)?;
    let force = f2(&q, &z.v);
    let v = z.v.iter().zip(&force).map(|(a, b)| a + delta * b).collect();
    Ok(ExtendedPoint::new(q, v))
}

/// Generalized Störmer–Verlet, `(Euler-A_{δ/2} ∘ Euler-B_{δ/2})ⁿ`.
pub fn stormer_verlet(
    n: usize,
    delta: f64,
    f1: PairFn<'_>,
    f2: PairFn<'_>,
    z: &ExtendedPoint,
    opts: &ImplicitOptions,
) -> Result<ExtendedPoint> {
    if n == 0 {
        return Err(Error::Config("stormer_verlet needs n >= 1".into()));
    }
    let half = 0.5 * delta;
    let mut cur = z.clone();
    for step in 0..n {
        cur = euler_b_step(half, f1, f2, &cur, opts)?;
        cur = euler_a_step(half, f1, f2, &cur, opts)?;
        if !cur.is_finite() {
            return Err(Error::Divergence { steps: step + 1 });
        }
    }
    Ok(cur)
}

/// The generalized Störmer–Verlet scheme as a reusable map.
#[derive(Clone)]
pub struct StormerVerlet {
    pub n: usize,
    pub delta: f64,
    pub f1: PhaseField,
    pub f2: PhaseField,
    pub opts: ImplicitOptions,
}

impl StormerVerlet {
    pub fn new(n: usize, delta: f64, f1: PhaseField, f2: PhaseField) -> Self {
        Self {
            n,
            delta,
            f1,
            f2,
            opts: ImplicitOptions::default(),
        }
    }

    pub fn with_options(mut self, opts: ImplicitOptions) -> Self {
        self.opts = opts;
        self
    }
}

impl ExtendedMap for StormerVerlet {
    fn apply(&self, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        stormer_verlet(self.n, self.delta, &*self.f1, &*self.f2, z, &self.opts)
    }
}
