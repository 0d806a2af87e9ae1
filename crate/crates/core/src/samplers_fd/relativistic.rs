//! Relativistic HMC: kinetic energy `K(v) = m c² √(‖v‖²/(m² c²) + 1)`.

use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use super::{flip_kernel, neg_gradient, positive};
use crate::error::{Error, Result};
use crate::integrators::{Field, Leapfrog};
use crate::involutive::{AuxiliaryKernel, InvolutiveKernel, JacobianMode, Potential};

const MAX_ATTEMPTS: usize = 1000;

/// Momentum law with density `∝ exp(−K(v))`.
///
/// The law is radial: `v = r u` with `u` uniform on the sphere and `r`
/// having the log-concave density `∝ r^{d−1} exp(−K(r))`. The radius is
/// drawn by rejection from the piecewise-exponential hull formed by
/// tangents to its log-density, which accepts with high probability in
/// every regime of `m`, `c` and `d`.
#[derive(Clone, Debug)]
pub struct RelativisticAux {
    dim: usize,
    m: f64,
    c: f64,
    hull: TangentHull,
}

impl RelativisticAux {
    pub fn new(dim: usize, m: f64, c: f64) -> Result<Self> {
        positive("m", m)?;
        positive("c", c)?;
        if dim == 0 {
            return Err(Error::Config("dimension must be >= 1".into()));
        }
        let mut aux = Self {
            dim,
            m,
            c,
            hull: TangentHull::default(),
        };
        aux.hull = aux.build_hull();
        Ok(aux)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `K(v)`.
    pub fn kinetic(&self, v: &[f64]) -> f64 {
        self.m * self.c * self.c + self.excess_kinetic_radial(norm(v))
    }

    /// `∇K(v) = v / (m √(‖v‖²/(m² c²) + 1))`.
    pub fn grad_kinetic(&self, v: &[f64]) -> Vec<f64> {
        let r2: f64 = v.iter().map(|x| x * x).sum();
        let g = 1.0 / (self.m * (r2 / (self.m * self.m * self.c * self.c) + 1.0).sqrt());
        v.iter().map(|x| g * x).collect()
    }

    /// `K − m c²`, evaluated without cancellation.
    fn excess_kinetic_radial(&self, r: f64) -> f64 {
        let x = r * r / (self.m * self.m * self.c * self.c);
        r * r / (self.m * (1.0 + (1.0 + x).sqrt()))
    }

    fn kinetic_slope(&self, r: f64) -> f64 {
        r / (self.m * (1.0 + r * r / (self.m * self.m * self.c * self.c)).sqrt())
    }

    fn kinetic_curvature(&self, r: f64) -> f64 {
        let x = r * r / (self.m * self.m * self.c * self.c);
        1.0 / (self.m * (1.0 + x).powf(1.5))
    }

    /// Log-density of the radius, up to a constant.
    fn radial_log_density(&self, r: f64) -> f64 {
        let k = self.dim as f64 - 1.0;
        let lead = if k == 0.0 { 0.0 } else { k * r.ln() };
        lead - self.excess_kinetic_radial(r)
    }

    fn radial_slope(&self, r: f64) -> f64 {
        let k = self.dim as f64 - 1.0;
        let lead = if k == 0.0 { 0.0 } else { k / r };
        lead - self.kinetic_slope(r)
    }

    fn build_hull(&self) -> TangentHull {
        let k = self.dim as f64 - 1.0;
        // The mode solves (d − 1)/r = K'(r); K'(r)·r is increasing.
        let mode = if k == 0.0 {
            0.0
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            while self.kinetic_slope(hi) * hi < k {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if self.kinetic_slope(mid) * mid < k {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let curv = if k == 0.0 { 0.0 } else { k / (mode * mode) } + self.kinetic_curvature(mode);
        let sd = 1.0 / curv.sqrt();
        let mut points: Vec<f64> = [-3.0, -2.0, -1.25, -0.6, 0.0, 0.6, 1.25, 2.0, 3.0, 4.5]
            .iter()
            .map(|t| mode + t * sd)
            .filter(|&r| r > 0.0 || (k == 0.0 && r >= 0.0))
            .collect();
        if k > 0.0 {
            points.push(0.05 * mode);
        }
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        let tangents = points
            .iter()
            .map(|&r| (r, self.radial_log_density(r), self.radial_slope(r)))
            .collect();
        TangentHull::new(tangents)
    }
}

/// Upper hull of a concave function on `[0, ∞)` from its tangent lines.
#[derive(Clone, Debug, Default)]
struct TangentHull {
    /// `(x, value, slope)` per tangent.
    tangents: Vec<(f64, f64, f64)>,
    /// Segment `i` is `[breaks[i], breaks[i + 1]]`.
    breaks: Vec<f64>,
    /// Cumulative segment masses, normalized to end at 1.
    cdf: Vec<f64>,
}

impl TangentHull {
    fn new(tangents: Vec<(f64, f64, f64)>) -> Self {
        let n = tangents.len();
        let mut breaks = vec![0.0];
        for i in 0..n - 1 {
            let (x0, y0, s0) = tangents[i];
            let (x1, y1, s1) = tangents[i + 1];
            let z = if (s0 - s1).abs() < 1e-300 {
                0.5 * (x0 + x1)
            } else {
                (y1 - y0 - x1 * s1 + x0 * s0) / (s0 - s1)
            };
            breaks.push(z.clamp(x0, x1));
        }
        breaks.push(f64::INFINITY);
        let top = tangents.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        let masses: Vec<f64> = (0..n)
            .map(|i| segment_mass(tangents[i], breaks[i], breaks[i + 1], top))
            .collect();
        let total: f64 = masses.iter().sum();
        let mut acc = 0.0;
        let cdf = masses
            .iter()
            .map(|m| {
                acc += m / total;
                acc
            })
            .collect();
        Self {
            tangents,
            breaks,
            cdf,
        }
    }

    fn value(&self, r: f64) -> f64 {
        self.tangents
            .iter()
            .map(|(x, y, s)| y + s * (r - x))
            .fold(f64::INFINITY, f64::min)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        let i = self.cdf.iter().position(|&c| u < c).unwrap_or(self.cdf.len() - 1);
        let (a, b) = (self.breaks[i], self.breaks[i + 1]);
        let s = self.tangents[i].2;
        let w: f64 = rng.random();
        if b.is_infinite() {
            a - (1.0 - w).ln() / -s
        } else if s.abs() * (b - a) < 1e-12 {
            a + w * (b - a)
        } else {
            a + (w * (s * (b - a)).exp_m1()).ln_1p() / s
        }
    }
}

/// `∫_a^b exp(y + s (r − x) − top) dr`.
fn segment_mass((x, y, s): (f64, f64, f64), a: f64, b: f64, top: f64) -> f64 {
    let base = (y + s * (a - x) - top).exp();
    if b.is_infinite() {
        base / -s
    } else if s.abs() * (b - a) < 1e-12 {
        base * (b - a)
    } else {
        base * (s * (b - a)).exp_m1() / s
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl AuxiliaryKernel for RelativisticAux {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, _q: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        for _ in 0..MAX_ATTEMPTS {
            let r = self.hull.sample(rng);
            let u: f64 = rng.random();
            if u.ln() <= self.radial_log_density(r) - self.hull.value(r) {
                let dir: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(rng)).collect();
                let n = norm(&dir);
                return Ok(dir.iter().map(|x| r * x / n).collect());
            }
        }
        Err(Error::Sampler(format!(
            "relativistic momentum: no acceptance in {MAX_ATTEMPTS} envelope draws"
        )))
    }

    fn log_density(&self, _q: &[f64], v: &[f64]) -> f64 {
        -self.excess_kinetic_radial(norm(v))
    }
}

/// Relativistic HMC: `v ~ exp(−K)`, leapfrog with `f₁ = ∇K`, `f₂ = −∇U`
/// (`δ₁ = δ/2`, `δ₂ = δ`), then the momentum flip.
pub fn relativistic_hmc(
    target: Arc<dyn Potential>,
    m: f64,
    c: f64,
    delta: f64,
    n_steps: usize,
) -> Result<InvolutiveKernel> {
    positive("delta", delta)?;
    if n_steps == 0 {
        return Err(Error::Config("number of integration steps must be >= 1".into()));
    }
    let aux = Arc::new(RelativisticAux::new(target.dim(), m, c)?);
    let f2 = neg_gradient(&target)?;
    let grad = Arc::clone(&aux);
    let f1: Field = Arc::new(move |v: &[f64]| grad.grad_kinetic(v));
    let lf = Leapfrog::new(n_steps, 0.5 * delta, delta, f1, f2);
    Ok(flip_kernel(target, aux, Arc::new(lf), JacobianMode::VolumePreserving))
}
