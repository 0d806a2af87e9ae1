//! The unique involution induced by a proposal map `F(q, ·)` that is
//! invertible in its second argument:
//!
//! `S(q, v) = (F(q, v), F(F(q, v), ·)⁻¹(q))`.

use std::sync::Arc;

use super::{ExtendedMap, ExtendedPoint};
use crate::error::Result;

type PairFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// Map part of the involution built from `F` and `F⁻¹` in `v`.
///
/// Consistency of the pair (`F_inv(q, F(q, v)) = v`) is not checked here;
/// an inconsistent pair shows up as a failed `S ∘ S = I` check.
#[derive(Clone)]
pub struct ProposalMapInvolution {
    forward: Arc<PairFn>,
    inverse_in_v: Arc<PairFn>,
}

impl ProposalMapInvolution {
    /// `forward(q, v) = q̃`, `inverse_in_v(q, q̃) = v`.
    pub fn new(
        forward: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        inverse_in_v: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            forward: Arc::new(forward),
            inverse_in_v: Arc::new(inverse_in_v),
        }
    }

    pub fn forward(&self, q: &[f64], v: &[f64]) -> Vec<f64> {
        (self.forward)(q, v)
    }

    pub fn inverse_in_v(&self, q: &[f64], q_tilde: &[f64]) -> Vec<f64> {
        (self.inverse_in_v)(q, q_tilde)
    }
}

impl ExtendedMap for ProposalMapInvolution {
    fn apply(&self, z: &ExtendedPoint) -> Result<ExtendedPoint> {
        let q_tilde = (self.forward)(&z.q, &z.v);
        let v_back = (self.inverse_in_v)(&q_tilde, &z.q);
        Ok(ExtendedPoint::new(q_tilde, v_back))
    }
}

/// Free-function form of [`ProposalMapInvolution::new`].
pub fn involution_from_proposal_map(
    forward: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    inverse_in_v: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
) -> ProposalMapInvolution {
    ProposalMapInvolution::new(forward, inverse_in_v)
}
