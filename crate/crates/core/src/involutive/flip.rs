use std::sync::Arc;

use super::{AuxiliaryKernel, ExtendedMap, ExtendedPoint, Involution, Potential, Proposal};
use crate::error::Result;
use crate::integrators::{momentum_flip, numerical_logdet_jacobian_with_cap};

/// How the Jacobian factor `|det ∇Ŝ|` enters the acceptance ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JacobianMode {
    /// `Ŝ` is known to preserve volume; the factor is 1.
    VolumePreserving,
    /// Compute `log |det ∇Ŝ|` by central differences (flat dimension ≤ `cap`).
    Numerical { cap: usize },
}

/// `S = R ∘ Ŝ` for an `R`-reversible integrator `Ŝ` and the momentum flip `R`.
///
/// The log Radon–Nikodym derivative is the Hamiltonian difference
/// `ℋ(q, v) − ℋ(R ∘ Ŝ(q, v)) + log |det ∇Ŝ(q, v)|` with
/// `ℋ = U − log V(q, ·)`; no evenness of `ℋ` in `v` is assumed.
pub struct FlipInvolution {
    target: Arc<dyn Potential>,
    aux: Arc<dyn AuxiliaryKernel>,
    integrator: Arc<dyn ExtendedMap>,
    jacobian: JacobianMode,
}

impl FlipInvolution {
    pub fn new(
        target: Arc<dyn Potential>,
        aux: Arc<dyn AuxiliaryKernel>,
        integrator: Arc<dyn ExtendedMap>,
        jacobian: JacobianMode,
    ) -> Self {
        Self {
            target,
            aux,
            integrator,
            jacobian,
        }
    }

    pub fn integrator(&self) -> &Arc<dyn ExtendedMap> {
        &self.integrator
    }

    /// `ℋ(q, v) = U(q) − log V(q, v)`, `+∞` outside the support.
    pub fn hamiltonian(&self, z: &ExtendedPoint) -> f64 {
        let u = self.target.value(&z.q);
        if u == f64::INFINITY {
            return f64::INFINITY;
        }
        u - self.aux.log_density(&z.q, &z.v)
    }

    fn log_rn_given_image(&self, z: &ExtendedPoint, image: &ExtendedPoint) -> f64 {
        let h0 = self.hamiltonian(z);
        let h1 = self.hamiltonian(image);
        if h1 == f64::INFINITY || !h0.is_finite() {
            return f64::NEG_INFINITY;
        }
        let logdet = match self.jacobian {
            JacobianMode::VolumePreserving => 0.0,
            JacobianMode::Numerical { cap } => {
                let q_dim = z.q.len();
                let integrator = &self.integrator;
                let flat_map = |x: &[f64]| -> Result<Vec<f64>> {
                    integrator
                        .apply(&ExtendedPoint::from_flat(x, q_dim))
                        .map(|p| p.to_flat())
                };
                numerical_logdet_jacobian_with_cap(flat_map, &z.to_flat(), None, cap).unwrap_or(f64::NEG_INFINITY)
            }
        };
        h0 - h1 + logdet
    }
}

impl ExtendedMap for FlipInvolution {
    fn apply(&self, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        self.integrator.apply(z).map(|p| momentum_flip(&p))
    }
}

impl Involution for FlipInvolution {
    fn log_rn(&self, z: &ExtendedPoint) -> f64 {
        match self.apply(z) {
            Ok(image) if image.is_finite() => self.log_rn_given_image(z, &image),
            _ => f64::NEG_INFINITY,
        }
    }

    fn propose(&self, z: &ExtendedPoint) -> Proposal {
        match self.apply(z) {
            Ok(image) if image.is_finite() => Proposal {
                log_rn: self.log_rn_given_image(z, &image),
                image: Some(image),
            },
            _ => Proposal {
                image: None,
                log_rn: f64::NEG_INFINITY,
            },
        }
    }
}
