//! Statistical checks on finished chains.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::involutive::Chain;

/// Default number of random relabelings in [`detailed_balance_test`].
pub const DEFAULT_PERMUTATIONS: usize = 999;
/// Pairs beyond this count are thinned evenly before testing.
pub const MAX_TEST_PAIRS: usize = 1000;
const MIN_PAIRS: usize = 100;

/// Consecutive pairs `(x_k, x_{k+1})` of a scalar chain.
pub fn transition_pairs(xs: &[f64]) -> Vec<(f64, f64)> {
    xs.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Two-sample permutation test of `(x, y) =ᵈ (y, x)` for transition pairs
/// of a stationary chain, which holds when the kernel satisfies detailed
/// balance. Returns the p-value.
///
/// The statistic is the energy distance between the pairs `aᵢ = (xᵢ, yᵢ)`
/// and their mirrors `bᵢ = (yᵢ, xᵢ)`; relabelings swap `aᵢ ↔ bᵢ`
/// independently per pair. Long inputs are thinned evenly to
/// [`MAX_TEST_PAIRS`] pairs, which also weakens the serial dependence
/// between pairs.
pub fn detailed_balance_test(pairs: &[(f64, f64)], rng: &mut dyn RngCore) -> Result<f64> {
    detailed_balance_test_with(pairs, DEFAULT_PERMUTATIONS, rng)
}

pub fn detailed_balance_test_with(
    pairs: &[(f64, f64)],
    permutations: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if pairs.len() < MIN_PAIRS {
        return Err(Error::InsufficientData {
            needed: MIN_PAIRS,
            got: pairs.len(),
        });
    }
    if permutations == 0 {
        return Err(Error::Config("need at least one permutation".into()));
    }
    let m = pairs.len().min(MAX_TEST_PAIRS);
    let pts: Vec<(f64, f64)> = (0..m).map(|k| pairs[k * pairs.len() / m]).collect();

    // With T(s) = Σᵢⱼ sᵢ sⱼ Δᵢⱼ, Δᵢⱼ = |aᵢ − bⱼ| − |aᵢ − aⱼ|, the energy
    // distance of a relabeling s ∈ {±1}^m is 2 T(s) / m².
    let mut delta = vec![0.0; m * m];
    for i in 0..m {
        let (xi, yi) = pts[i];
        for j in 0..m {
            let (xj, yj) = pts[j];
            let cross = (xi - yj).hypot(yi - xj);
            let same = (xi - xj).hypot(yi - yj);
            delta[i * m + j] = cross - same;
        }
    }
    let stat = |s: &[f64]| -> f64 {
        (0..m)
            .map(|i| {
                let row = &delta[i * m..(i + 1) * m];
                s[i] * row.iter().zip(s).map(|(d, sj)| d * sj).sum::<f64>()
            })
            .sum()
    };
    let ones = vec![1.0; m];
    let observed = stat(&ones);
    let tol = 1e-12 * (1.0 + observed.abs());
    let mut s = vec![0.0; m];
    let mut exceed = 0usize;
    for _ in 0..permutations {
        for x in s.iter_mut() {
            *x = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
        if stat(&s) >= observed - tol {
            exceed += 1;
        }
    }
    Ok((1 + exceed) as f64 / (1 + permutations) as f64)
}

/// Effective sample size estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ess {
    pub ess: f64,
    /// Set when the chain has zero variance; `ess` is then the length.
    pub degenerate: bool,
}

/// `N / τ` with `τ = 1 + 2 Σ ρ̂_k`, truncated by Geyer's initial positive
/// sequence rule. Capped at `N`.
pub fn ess(xs: &[f64]) -> Result<Ess> {
    let n = xs.len();
    if n < 10 {
        return Err(Error::InsufficientData { needed: 10, got: n });
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let autocov = |k: usize| -> f64 { c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64 };
    let g0 = autocov(0);
    if g0.is_nan() || g0 <= 1e-300 {
        return Ok(Ess {
            ess: n as f64,
            degenerate: true,
        });
    }
    let mut sum_pairs = 0.0;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = autocov(2 * m) + autocov(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        sum_pairs += pair;
        m += 1;
    }
    let tau = (2.0 * sum_pairs - g0) / g0;
    let ess = if tau > 0.0 { (n as f64 / tau).min(n as f64) } else { n as f64 };
    Ok(Ess {
        ess,
        degenerate: false,
    })
}

/// Mean of `xs` and its batch-means standard error.
pub fn batch_means(xs: &[f64], batches: usize) -> Result<(f64, f64)> {
    if batches < 2 {
        return Err(Error::Config("need at least two batches".into()));
    }
    if xs.len() < batches {
        return Err(Error::InsufficientData {
            needed: batches,
            got: xs.len(),
        });
    }
    let size = xs.len() / batches;
    let used = &xs[..size * batches];
    let means: Vec<f64> = used.chunks(size).map(|b| b.iter().sum::<f64>() / size as f64).collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok((grand, (var / batches as f64).sqrt()))
}

/// Per-coordinate comparison of chain moments with known values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub means: Vec<f64>,
    pub mean_se: Vec<f64>,
    pub mean_z: Vec<f64>,
    /// Estimates of `E (qᵢ − μᵢ)²` around the true means.
    pub variances: Vec<f64>,
    pub variance_se: Vec<f64>,
    pub variance_z: Vec<f64>,
}

impl MomentCheck {
    /// Whether every `|z|` is at most `bound`.
    pub fn within(&self, bound: f64) -> bool {
        self.mean_z.iter().chain(&self.variance_z).all(|z| z.abs() <= bound)
    }
}

fn z_score(est: f64, truth: f64, se: f64) -> f64 {
    let diff = est - truth;
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// z-scores `(estimate − truth)/SE` of per-coordinate means and variances,
/// with batch-means standard errors.
pub fn moment_check(
    states: &[Vec<f64>],
    true_mean: &[f64],
    true_var: &[f64],
    batch_count: usize,
) -> Result<MomentCheck> {
    if batch_count < 10 {
        return Err(Error::Config(format!("batch_count must be >= 10, got {batch_count}")));
    }
    if states.len() < batch_count {
        return Err(Error::InsufficientData {
            needed: batch_count,
            got: states.len(),
        });
    }
    let d = true_mean.len();
    if true_var.len() != d || states.iter().any(|s| s.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: states[0].len(),
        });
    }
    let mut out = MomentCheck {
        means: vec![],
        mean_se: vec![],
        mean_z: vec![],
        variances: vec![],
        variance_se: vec![],
        variance_z: vec![],
    };
    for i in 0..d {
        let xs: Vec<f64> = states.iter().map(|s| s[i]).collect();
        let (m, se) = batch_means(&xs, batch_count)?;
        let sq: Vec<f64> = xs.iter().map(|x| (x - true_mean[i]).powi(2)).collect();
        let (v, vse) = batch_means(&sq, batch_count)?;
        out.means.push(m);
        out.mean_se.push(se);
        out.mean_z.push(z_score(m, true_mean[i], se));
        out.variances.push(v);
        out.variance_se.push(vse);
        out.variance_z.push(z_score(v, true_var[i], vse));
    }
    Ok(out)
}

/// Diagnostics of one scalar observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSummary {
    pub name: String,
    pub mean: f64,
    pub ess: Option<Ess>,
    /// Detailed-balance p-value; absent for chains with fewer than 100 pairs.
    pub db_pvalue: Option<f64>,
}

/// Summary of a chain after burn-in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub n_samples: usize,
    pub acceptance_rate: f64,
    pub mean_alpha: f64,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    /// Batch-means standard errors; absent for very short chains.
    pub mean_se: Option<Vec<f64>>,
    pub variance_se: Option<Vec<f64>>,
    /// First coordinate and squared norm.
    pub observables: Vec<ObservableSummary>,
}

const SUMMARY_BATCHES: usize = 20;

/// Summarizes `chain.states[burn_in..]` and the transitions out of them.
pub fn summarize(chain: &Chain, burn_in: usize, rng: &mut dyn RngCore) -> Result<ChainSummary> {
    if burn_in >= chain.states.len() {
        return Err(Error::InsufficientData {
            needed: burn_in + 1,
            got: chain.states.len(),
        });
    }
    let states = &chain.states[burn_in..];
    let steps = &chain.steps[burn_in.min(chain.steps.len())..];
    let n = states.len();
    let d = states[0].len();
    let (acceptance_rate, mean_alpha) = if steps.is_empty() {
        (0.0, 0.0)
    } else {
        let k = steps.len() as f64;
        (
            steps.iter().filter(|s| s.accepted).count() as f64 / k,
            steps.iter().map(|s| s.alpha).sum::<f64>() / k,
        )
    };
    let mut means = Vec::with_capacity(d);
    let mut variances = Vec::with_capacity(d);
    let mut mean_se = Vec::with_capacity(d);
    let mut variance_se = Vec::with_capacity(d);
    let enough = n >= SUMMARY_BATCHES;
    for i in 0..d {
        let xs: Vec<f64> = states.iter().map(|s| s[i]).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let sq: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
        means.push(m);
        variances.push(sq.iter().sum::<f64>() / n as f64);
        if enough {
            mean_se.push(batch_means(&xs, SUMMARY_BATCHES)?.1);
            variance_se.push(batch_means(&sq, SUMMARY_BATCHES)?.1);
        }
    }
    let first: Vec<f64> = states.iter().map(|s| s[0]).collect();
    let norm_sq: Vec<f64> = states.iter().map(|s| s.iter().map(|x| x * x).sum()).collect();
    let mut observables = Vec::with_capacity(2);
    for (name, xs) in [("q_1", first), ("norm_sq", norm_sq)] {
        let pairs = transition_pairs(&xs);
        observables.push(ObservableSummary {
            name: name.to_string(),
            mean: xs.iter().sum::<f64>() / n as f64,
            ess: ess(&xs).ok(),
            db_pvalue: if pairs.len() >= MIN_PAIRS {
                Some(detailed_balance_test(&pairs, rng)?)
            } else {
                None
            },
        });
    }
    Ok(ChainSummary {
        n_samples: n,
        acceptance_rate,
        mean_alpha,
        means,
        variances,
        mean_se: enough.then_some(mean_se),
        variance_se: enough.then_some(variance_se),
        observables,
    })
}
