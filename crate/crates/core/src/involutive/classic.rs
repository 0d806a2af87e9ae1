//! Classical Metropolis–Hastings as an involutive kernel: the auxiliary
//! variable is the proposed state itself and `S(q, v) = (v, q)`.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use super::{AuxiliaryKernel, ExtendedMap, ExtendedPoint, Involution, InvolutiveKernel, Potential};
use crate::error::{check_dim, Result};

type SampleFn = dyn Fn(&[f64], &mut dyn RngCore) -> Vec<f64> + Send + Sync;
type LogDensityFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// An auxiliary kernel given by a sampler and its log-density `log q(q, v)`.
#[derive(Clone)]
pub struct FnAuxiliary {
    dim: usize,
    sample: Arc<SampleFn>,
    log_density: Arc<LogDensityFn>,
}

impl FnAuxiliary {
    pub fn new(
        dim: usize,
        sample: impl Fn(&[f64], &mut dyn RngCore) -> Vec<f64> + Send + Sync + 'static,
        log_density: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            sample: Arc::new(sample),
            log_density: Arc::new(log_density),
        }
    }
}

impl fmt::Debug for FnAuxiliary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnAuxiliary").field("dim", &self.dim).finish()
    }
}

impl AuxiliaryKernel for FnAuxiliary {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, q: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        Ok((self.sample)(q, rng))
    }

    fn log_density(&self, q: &[f64], v: &[f64]) -> f64 {
        (self.log_density)(q, v)
    }
}

/// The swap involution with the Hastings ratio as its log-RN:
/// `log p(v) + log q(v, q) − log p(q) − log q(q, v)`.
pub struct ClassicInvolution {
    target: Arc<dyn Potential>,
    proposal: Arc<dyn AuxiliaryKernel>,
}

impl ExtendedMap for ClassicInvolution {
    fn apply(&self, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        Ok(ExtendedPoint::new(z.v.clone(), z.q.clone()))
    }
}

impl Involution for ClassicInvolution {
    fn log_rn(&self, z: &ExtendedPoint) -> f64 {
        let u_new = self.target.value(&z.v);
        if u_new == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        let u_old = self.target.value(&z.q);
        let value = u_old - u_new + self.proposal.log_density(&z.v, &z.q)
            - self.proposal.log_density(&z.q, &z.v);
        if value.is_nan() {
            f64::NEG_INFINITY
        } else {
            value
        }
    }
}

/// Metropolis–Hastings with target `p ∝ exp(−U)` and proposal kernel
/// `q(q, ·)`; `proposal.log_density(q, q̃)` must be the log-density of
/// `proposal.sample(q)`.
pub fn classic_mh_kernel(
    target: Arc<dyn Potential>,
    proposal: Arc<dyn AuxiliaryKernel>,
) -> Result<InvolutiveKernel> {
    check_dim(target.dim(), proposal.dim())?;
    let involution = ClassicInvolution {
        target: target.clone(),
        proposal: proposal.clone(),
    };
    Ok(InvolutiveKernel::new(target, proposal, Arc::new(involution)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::involutive::{accept_prob, FnPotential};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn symmetric_gaussian(scale: f64) -> FnAuxiliary {
        FnAuxiliary::new(
            1,
            move |q, rng| {
                let e: f64 = StandardNormal.sample(rng);
                vec![q[0] + scale * e]
            },
            move |q, v| -0.5 * ((v[0] - q[0]) / scale).powi(2),
        )
    }

    #[test]
    fn symmetric_proposal_reduces_to_metropolis() {
        let target = Arc::new(FnPotential::new(1, |q: &[f64]| 0.5 * q[0] * q[0]));
        let k = classic_mh_kernel(target, Arc::new(symmetric_gaussian(1.0))).unwrap();
        let z = ExtendedPoint::new(vec![0.0], vec![1.0]);
        let alpha = accept_prob(k.involution().log_rn(&z));
        assert!((alpha - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn uniform_box_accepts_inside() {
        let target = Arc::new(FnPotential::new(1, |q: &[f64]| {
            if q[0].abs() <= 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }));
        let k = classic_mh_kernel(target, Arc::new(symmetric_gaussian(0.3))).unwrap();
        let z = ExtendedPoint::new(vec![0.2], vec![-0.6]);
        assert_eq!(accept_prob(k.involution().log_rn(&z)), 1.0);
        let z = ExtendedPoint::new(vec![0.2], vec![1.6]);
        assert_eq!(accept_prob(k.involution().log_rn(&z)), 0.0);
    }

    #[test]
    fn asymmetric_proposal_uses_hastings_correction() {
        // q(q, ·) = N(q/2, 1); p ∝ exp(−q²/2).
        let prop = FnAuxiliary::new(
            1,
            |q, rng| {
                let e: f64 = StandardNormal.sample(rng);
                vec![0.5 * q[0] + e]
            },
            |q, v| -0.5 * (v[0] - 0.5 * q[0]).powi(2),
        );
        let target = Arc::new(FnPotential::new(1, |q: &[f64]| 0.5 * q[0] * q[0]));
        let k = classic_mh_kernel(target, Arc::new(prop)).unwrap();
        let (q, qt) = (1.0f64, 0.2f64);
        let expected = -0.5 * qt * qt - 0.5 * (q - 0.5 * qt).powi(2) + 0.5 * q * q
            + 0.5 * (qt - 0.5 * q).powi(2);
        let got = k
            .involution()
            .log_rn(&ExtendedPoint::new(vec![q], vec![qt]));
        assert!((got - expected).abs() < 1e-14);

        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let step = k.mh_step(&[1.0], &mut rng).unwrap();
        assert!(step.alpha > 0.0 && step.alpha <= 1.0);
    }
}
