//! Numerical Jacobians and reversibility residuals.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::involutive::{ExtendedMap, ExtendedPoint};

/// Largest flat dimension for which a dense numerical Jacobian is formed.
pub const DEFAULT_JACOBIAN_CAP: usize = 10;

/// `log |det ∇map(z)|` by central differences, with the default cap.
pub fn numerical_logdet_jacobian<F>(map: F, z: &[f64], h: Option<f64>) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    numerical_logdet_jacobian_with_cap(map, z, h, DEFAULT_JACOBIAN_CAP)
}

/// `log |det ∇map(z)|` by central differences with step
/// `h = 1e-5 · (1 + ‖z‖∞)` unless given, factorized by partial-pivot LU.
///
/// A singular or non-finite Jacobian gives `−∞`; a dimension above `cap` is
/// a configuration error.
pub fn numerical_logdet_jacobian_with_cap<F>(
    map: F,
    z: &[f64],
    h: Option<f64>,
    cap: usize,
) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = z.len();
    if n > cap {
        return Err(Error::Config(format!(
            "numerical Jacobian of dimension {n} exceeds cap {cap}"
        )));
    }
    let sup = z.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let h = h.unwrap_or(1e-5 * (1.0 + sup));
    let mut jac = DMatrix::<f64>::zeros(n, n);
    let mut x = z.to_vec();
    for j in 0..n {
        x[j] = z[j] + h;
        let plus = map(&x);
        x[j] = z[j] - h;
        let minus = map(&x);
        x[j] = z[j];
        let (plus, minus) = match (plus, minus) {
            (Ok(p), Ok(m)) if p.len() == n && m.len() == n => (p, m),
            _ => return Ok(f64::NEG_INFINITY),
        };
        for i in 0..n {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    if jac.iter().any(|x| !x.is_finite()) {
        return Ok(f64::NEG_INFINITY);
    }
    let lu = jac.lu();
    let u = lu.u();
    let mut logdet = 0.0;
    for i in 0..n {
        let d = u[(i, i)].abs();
        if d == 0.0 || !d.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
        logdet += d.ln();
    }
    Ok(logdet)
}

/// Outcome of [`check_reversibility`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReversibilityReport {
    pub max_residual: f64,
    pub passed: bool,
}

/// Max over `points` of `‖R ∘ map ∘ R ∘ map(z) − z‖∞`; a map failure counts
/// as an infinite residual.
pub fn check_reversibility<M, R>(
    map: &M,
    flip: &R,
    points: &[ExtendedPoint],
    tol: f64,
) -> ReversibilityReport
where
    M: ExtendedMap + ?Sized,
    R: Fn(&ExtendedPoint) -> ExtendedPoint,
{
    let mut max_residual: f64 = 0.0;
    for z in points {
        let residual = map
            .apply(z)
            .and_then(|s| map.apply(&flip(&s)))
            .map(|back| flip(&back).max_abs_diff(z))
            .unwrap_or(f64::INFINITY);
        max_residual = max_residual.max(residual);
    }
    ReversibilityReport {
        max_residual,
        passed: max_residual <= tol,
    }
}
