//! Centered Gaussian reference measure `N(0, C)` in the eigenbasis of its
//! covariance, truncated to the leading `d` modes.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// `N(0, C)` with `C eᵢ = λᵢ eᵢ`; positions are coordinate vectors in `{eᵢ}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralGaussian {
    eigenvalues: Vec<f64>,
}

impl SpectralGaussian {
    /// Eigenvalues must be finite, strictly positive and non-increasing.
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Config("eigenvalue list is empty".into()));
        }
        for (i, &l) in eigenvalues.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Config(format!(
                    "eigenvalue {} is {l}; expected a finite positive number",
                    i + 1
                )));
            }
            if i > 0 && l > eigenvalues[i - 1] {
                return Err(Error::Config(format!(
                    "eigenvalues must be non-increasing (λ{} = {} < λ{} = {l})",
                    i,
                    eigenvalues[i - 1],
                    i + 1
                )));
            }
        }
        Ok(Self { eigenvalues })
    }

    /// `λᵢ = c · i^{−p}` for `i = 1..=d`.
    pub fn power_law(c: f64, p: f64, d: usize) -> Result<Self> {
        if p < 0.0 {
            return Err(Error::Config(format!("power-law exponent {p} is negative")));
        }
        Self::new((1..=d).map(|i| c * (i as f64).powf(-p)).collect())
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `(√λ₁ ξ₁, …, √λ_d ξ_d)` with `ξᵢ` i.i.d. standard normal.
    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|l| {
                let xi: f64 = StandardNormal.sample(rng);
                l.sqrt() * xi
            })
            .collect()
    }

    /// `C^γ x`, i.e. `λᵢ^γ xᵢ`.
    pub fn frac_power(&self, gamma: f64, x: &[f64]) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(x)
            .map(|(l, xi)| l.powf(gamma) * xi)
            .collect()
    }

    /// `⟨C^{−1/2} a, C^{−1/2} b⟩ = Σ aᵢ bᵢ / λᵢ`.
    pub fn cm_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.eigenvalues
            .iter()
            .zip(a.iter().zip(b))
            .map(|(l, (x, y))| x * y / l)
            .sum()
    }

    /// `‖C^{−1/2} x‖²`.
    pub fn cm_norm_sq(&self, x: &[f64]) -> f64 {
        self.cm_inner(x, x)
    }

    /// `log dN(m, C)/dN(0, C)(x) = ⟨C^{−1/2} m, C^{−1/2} x⟩ − ½ ‖C^{−1/2} m‖²`.
    pub fn cm_log_ratio(&self, shift: &[f64], x: &[f64]) -> f64 {
        self.cm_inner(shift, x) - 0.5 * self.cm_norm_sq(shift)
    }

    /// Normalized Lebesgue log-density of the truncation.
    pub fn log_density_lebesgue(&self, x: &[f64]) -> f64 {
        let norm: f64 = self.eigenvalues.iter().map(|l| LN_2PI + l.ln()).sum();
        -0.5 * self.cm_norm_sq(x) - 0.5 * norm
    }
}
