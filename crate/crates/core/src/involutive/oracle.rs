//! Brute-force log Radon–Nikodym derivative for finite-dimensional kernels.
//!
//! For an extended density `ρ` with respect to Lebesgue measure and a
//! differentiable involution `S`,
//!
//! `log dS*M/dM (z) = log ρ(S(z)) − log ρ(z) + log |det ∇S(z)|`.
//!
//! The Jacobian is taken by central differences. This is the reference
//! against which every closed-form `log_rn` in the crate is checked.

use super::{ExtendedMap, ExtendedPoint};
use crate::error::Result;
use crate::integrators::{numerical_logdet_jacobian_with_cap, DEFAULT_JACOBIAN_CAP};

/// Oracle log-RN with the default Jacobian dimension cap.
pub fn generic_log_rn<D, M>(ext_log_density: D, map: &M, z: &ExtendedPoint) -> f64
where
    D: Fn(&ExtendedPoint) -> f64,
    M: ExtendedMap + ?Sized,
{
    generic_log_rn_with_cap(ext_log_density, map, z, DEFAULT_JACOBIAN_CAP)
}

/// Oracle log-RN. Returns `−∞` when the image or the Jacobian is not
/// finite, or when the Jacobian is singular.
pub fn generic_log_rn_with_cap<D, M>(
    ext_log_density: D,
    map: &M,
    z: &ExtendedPoint,
    cap: usize,
) -> f64
where
    D: Fn(&ExtendedPoint) -> f64,
    M: ExtendedMap + ?Sized,
{
    let image = match map.apply(z) {
        Ok(p) if p.is_finite() => p,
        _ => return f64::NEG_INFINITY,
    };
    let q_dim = z.q.len();
    let flat_map = |x: &[f64]| -> Result<Vec<f64>> {
        map.apply(&ExtendedPoint::from_flat(x, q_dim))
            .map(|p| p.to_flat())
    };
    let logdet = match numerical_logdet_jacobian_with_cap(flat_map, &z.to_flat(), None, cap) {
        Ok(v) if v.is_finite() => v,
        _ => return f64::NEG_INFINITY,
    };
    let value = ext_log_density(&image) - ext_log_density(z) + logdet;
    if value.is_nan() {
        f64::NEG_INFINITY
    } else {
        value
    }
}
