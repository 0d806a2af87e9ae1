//! Riemannian-manifold HMC with a position-dependent mass matrix `M(q)`.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{flip_kernel, neg_gradient, positive};
use crate::error::{check_dim, Error, Result};
use crate::integrators::{PhaseField, StormerVerlet};
use crate::involutive::{AuxiliaryKernel, InvolutiveKernel, JacobianMode, Potential};

/// A metric `q ↦ M(q)` together with the derivatives RMHMC needs.
pub trait Metric: Send + Sync {
    fn dim(&self) -> usize;

    /// `M(q)`; must be symmetric positive definite where the chain goes.
    fn matrix(&self, q: &[f64]) -> DMatrix<f64>;

    /// `∇_q ½ ⟨M(q)⁻¹ v, v⟩`.
    fn grad_kinetic(&self, q: &[f64], v: &[f64]) -> Vec<f64>;

    /// `∇_q ½ log det M(q)`.
    fn grad_half_logdet(&self, q: &[f64]) -> Vec<f64>;
}

/// `M(q) ≡ M`.
#[derive(Clone, Debug)]
pub struct ConstantMetric {
    matrix: DMatrix<f64>,
}

impl ConstantMetric {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Config("metric must be square".into()));
        }
        Ok(Self { matrix })
    }
}

impl Metric for ConstantMetric {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn matrix(&self, _q: &[f64]) -> DMatrix<f64> {
        self.matrix.clone()
    }

    fn grad_kinetic(&self, q: &[f64], _v: &[f64]) -> Vec<f64> {
        vec![0.0; q.len()]
    }

    fn grad_half_logdet(&self, q: &[f64]) -> Vec<f64> {
        vec![0.0; q.len()]
    }
}

type DiagFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// `M(q) = diag(m₁(q), …, m_d(q))`, given the diagonal and its Jacobian
/// `J_ij = ∂mᵢ/∂qⱼ`.
#[derive(Clone)]
pub struct DiagonalMetric {
    dim: usize,
    diag: Arc<DiagFn>,
    jacobian: Arc<JacFn>,
}

impl DiagonalMetric {
    pub fn new(
        dim: usize,
        diag: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        jacobian: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            diag: Arc::new(diag),
            jacobian: Arc::new(jacobian),
        }
    }

    /// `mᵢ(q) = a + b qᵢ²`.
    pub fn quadratic(dim: usize, a: f64, b: f64) -> Result<Self> {
        positive("a", a)?;
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::Config(format!("b must be non-negative, got {b}")));
        }
        Ok(Self::new(
            dim,
            move |q: &[f64]| q.iter().map(|x| a + b * x * x).collect(),
            move |q: &[f64]| {
                DMatrix::from_diagonal(&DVector::from_iterator(
                    q.len(),
                    q.iter().map(|x| 2.0 * b * x),
                ))
            },
        ))
    }
}

impl Metric for DiagonalMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn matrix(&self, q: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec((self.diag)(q)))
    }

    fn grad_kinetic(&self, q: &[f64], v: &[f64]) -> Vec<f64> {
        let m = (self.diag)(q);
        let jac = (self.jacobian)(q);
        (0..q.len())
            .map(|j| {
                -0.5 * (0..m.len())
                    .map(|i| v[i] * v[i] / (m[i] * m[i]) * jac[(i, j)])
                    .sum::<f64>()
            })
            .collect()
    }

    fn grad_half_logdet(&self, q: &[f64]) -> Vec<f64> {
        let m = (self.diag)(q);
        let jac = (self.jacobian)(q);
        (0..q.len())
            .map(|j| 0.5 * (0..m.len()).map(|i| jac[(i, j)] / m[i]).sum::<f64>())
            .collect()
    }
}

/// `V(q, ·) = N(0, M(q))`.
#[derive(Clone)]
pub struct RiemannianAux {
    metric: Arc<dyn Metric>,
}

impl RiemannianAux {
    pub fn new(metric: Arc<dyn Metric>) -> Self {
        Self { metric }
    }

    fn factor(&self, q: &[f64]) -> Option<Cholesky<f64, nalgebra::Dyn>> {
        let m = self.metric.matrix(q);
        if m.iter().any(|x| !x.is_finite()) {
            return None;
        }
        Cholesky::new(m)
    }
}

impl AuxiliaryKernel for RiemannianAux {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn sample(&self, q: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        let chol = self
            .factor(q)
            .ok_or_else(|| Error::Sampler("metric is not positive definite at the current state".into()))?;
        let xi = DVector::from_iterator(self.dim(), (0..self.dim()).map(|_| StandardNormal.sample(rng)));
        Ok((chol.l() * xi).iter().copied().collect())
    }

    /// `−½ ⟨M(q)⁻¹ v, v⟩ − ½ log det M(q)`.
    fn log_density(&self, q: &[f64], v: &[f64]) -> f64 {
        match self.factor(q) {
            Some(chol) => {
                let vv = DVector::from_column_slice(v);
                let quad = vv.dot(&chol.solve(&vv));
                let half_logdet: f64 = chol.l().diagonal().iter().map(|x| x.ln()).sum();
                -0.5 * quad - half_logdet
            }
            None => f64::NEG_INFINITY,
        }
    }
}

/// RMHMC: `v ~ N(0, M(q))`, `n` steps of generalized Störmer–Verlet for
/// `ℋ(q, v) = U(q) + ½ ⟨M(q)⁻¹ v, v⟩ + ½ log det M(q)`, then the momentum
/// flip. Steps whose implicit solve fails are rejected.
pub fn rmhmc(
    target: Arc<dyn Potential>,
    metric: Arc<dyn Metric>,
    delta: f64,
    n_steps: usize,
) -> Result<InvolutiveKernel> {
    positive("delta", delta)?;
    if n_steps == 0 {
        return Err(Error::Config("number of integration steps must be >= 1".into()));
    }
    check_dim(target.dim(), metric.dim())?;
    let neg_grad = neg_gradient(&target)?;

    let m1 = Arc::clone(&metric);
    let f1: PhaseField = Arc::new(move |q: &[f64], v: &[f64]| {
        match Cholesky::new(m1.matrix(q)) {
            Some(chol) => chol.solve(&DVector::from_column_slice(v)).iter().copied().collect(),
            None => vec![f64::NAN; v.len()],
        }
    });
    let m2 = Arc::clone(&metric);
    let f2: PhaseField = Arc::new(move |q: &[f64], v: &[f64]| {
        let gk = m2.grad_kinetic(q, v);
        let gl = m2.grad_half_logdet(q);
        neg_grad(q)
            .iter()
            .zip(gk.iter().zip(&gl))
            .map(|(g, (a, b))| g - a - b)
            .collect()
    });
    let sv = StormerVerlet::new(n_steps, delta, f1, f2);
    let aux = Arc::new(RiemannianAux::new(metric));
    Ok(flip_kernel(target, aux, Arc::new(sv), JacobianMode::VolumePreserving))
}
