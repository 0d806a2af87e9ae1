//! Builds kernels from a config and runs seeded chains to disk.

use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use involutive_core::diagnostics::{summarize, ChainSummary};
use involutive_core::gaussian::SpectralGaussian;
use involutive_core::integrators::{Field, Leapfrog};
use involutive_core::involutive::{Chain, FnPotential, Potential, StepSummary};
use involutive_core::samplers_fd::{
    hmc, mala, relativistic_hmc, rmhmc, rwmc_gaussian, surrogate_hmc, DiagonalMetric, GaussianAux, HmcConfig,
    MassMatrix, Scheme,
};
use involutive_core::samplers_hilbert::{
    gen_langevin, inf_hmc, inf_mala, pcn, phi_linear, phi_quartic_bounded, phi_zero, AuxLaw, HilbertTarget,
    PcnStep,
};
use involutive_core::InvolutiveKernel;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, EigenSpec, ExperimentConfig, LoadedConfig, PhiSpec, SamplerSpec, TargetSpec};

/// Environment variable naming the output directory when neither the
/// command line nor the config does.
pub const OUTPUT_DIR_ENV: &str = "INVOLUTIVE_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "involutive-output";
pub const SUMMARY_FILE: &str = "summary.json";

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub chains: Option<usize>,
}

enum Target {
    Flat(Arc<dyn Potential>),
    Hilbert(HilbertTarget),
}

impl Target {
    fn potential(&self) -> Arc<dyn Potential> {
        match self {
            Target::Flat(p) => Arc::clone(p),
            Target::Hilbert(h) => h.lebesgue_potential(),
        }
    }
}

/// A validated experiment, ready to run.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub kernel: InvolutiveKernel,
    pub initial: Vec<f64>,
}

impl Experiment {
    pub fn dim(&self) -> usize {
        self.initial.len()
    }
}

/// Applies overrides, validates every section and constructs the kernel.
pub fn prepare(loaded: &LoadedConfig, overrides: &Overrides) -> Result<Experiment, ConfigError> {
    let mut config = loaded.config.clone();
    if let Some(seed) = overrides.seed {
        config.run.seed = seed;
    }
    if let Some(chains) = overrides.chains {
        config.run.n_chains = chains;
    }
    if let Some(dir) = &overrides.output_dir {
        config.output.dir = Some(dir.clone());
    }

    let run = &config.run;
    if run.n_steps == 0 {
        return Err(loaded.error("run", Some("n_steps"), "n_steps must be at least 1"));
    }
    if run.burn_in >= run.n_steps {
        return Err(loaded.error(
            "run",
            Some("burn_in"),
            format!("burn_in ({}) must be smaller than n_steps ({})", run.burn_in, run.n_steps),
        ));
    }
    if run.n_chains == 0 {
        return Err(loaded.error("run", Some("n_chains"), "n_chains must be at least 1"));
    }
    if config.output.thin == 0 {
        return Err(loaded.error("output", Some("thin"), "thin must be at least 1"));
    }

    let target = build_target(&config.target).map_err(|m| loaded.error("target", None, m))?;
    let dim = target.potential().dim();
    let initial = match &run.initial {
        Some(q0) if q0.len() != dim => {
            return Err(loaded.error(
                "run",
                Some("initial"),
                format!("initial state has {} coordinates, target has {dim}", q0.len()),
            ))
        }
        Some(q0) if q0.iter().any(|x| !x.is_finite()) => {
            return Err(loaded.error("run", Some("initial"), "initial state must be finite"))
        }
        Some(q0) => q0.clone(),
        None => vec![0.0; dim],
    };
    if !target.potential().value(&initial).is_finite() {
        return Err(loaded.error("run", Some("initial"), "target potential is not finite at the initial state"));
    }

    let kernel = build_kernel(&config.sampler, &target).map_err(|(key, m)| loaded.error("sampler", key, m))?;
    Ok(Experiment {
        config,
        kernel,
        initial,
    })
}

fn build_target(spec: &TargetSpec) -> Result<Target, String> {
    let t = match spec {
        TargetSpec::StandardGaussian { dim } => {
            if *dim == 0 {
                return Err("dim must be at least 1".into());
            }
            gaussian(vec![1.0; *dim])
        }
        TargetSpec::AnisotropicGaussian { variances } => {
            if variances.is_empty() || variances.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err("variances must be a non-empty list of positive numbers".into());
            }
            gaussian(variances.clone())
        }
        TargetSpec::Rosenbrock { a, b, scale } => {
            if !(a.is_finite() && b.is_finite() && *b >= 0.0 && scale.is_finite() && *scale > 0.0) {
                return Err("rosenbrock needs finite a, b >= 0 and scale > 0".into());
            }
            let (a, b, s) = (*a, *b, *scale);
            Target::Flat(Arc::new(
                FnPotential::new(2, move |q: &[f64]| {
                    let r = q[1] - q[0] * q[0];
                    s * ((a - q[0]).powi(2) + b * r * r)
                })
                .with_gradient(move |q: &[f64]| {
                    let r = q[1] - q[0] * q[0];
                    vec![s * (-2.0 * (a - q[0]) - 4.0 * b * q[0] * r), s * 2.0 * b * r]
                }),
            ))
        }
        TargetSpec::Hilbert { eigenvalues, phi } => {
            let reference = match eigenvalues {
                EigenSpec::Values(v) => SpectralGaussian::new(v.clone()),
                EigenSpec::PowerLaw { c, p, dim } => SpectralGaussian::power_law(*c, *p, *dim),
            }
            .map_err(|e| e.to_string())?;
            let d = reference.dim();
            let phi: Arc<dyn Potential> = match phi {
                PhiSpec::QuarticBounded => Arc::new(phi_quartic_bounded(d)),
                PhiSpec::Linear { a } => {
                    if a.len() != d {
                        return Err(format!("linear phi has {} coefficients, reference has dimension {d}", a.len()));
                    }
                    Arc::new(phi_linear(a.clone()))
                }
                PhiSpec::Zero => Arc::new(phi_zero(d)),
            };
            Target::Hilbert(HilbertTarget::new(phi, reference).map_err(|e| e.to_string())?)
        }
    };
    Ok(t)
}

fn gaussian(variances: Vec<f64>) -> Target {
    let prec: Vec<f64> = variances.iter().map(|s| 1.0 / s).collect();
    let p2 = prec.clone();
    Target::Flat(Arc::new(
        FnPotential::new(variances.len(), move |q: &[f64]| {
            0.5 * q.iter().zip(&prec).map(|(x, p)| p * x * x).sum::<f64>()
        })
        .with_gradient(move |q: &[f64]| q.iter().zip(&p2).map(|(x, p)| p * x).collect()),
    ))
}

type BuildError = (Option<&'static str>, String);

fn build_kernel(spec: &SamplerSpec, target: &Target) -> Result<InvolutiveKernel, BuildError> {
    let core = |e: involutive_core::Error| (None, e.to_string());
    let hilbert = || match target {
        Target::Hilbert(h) => Ok(h),
        Target::Flat(_) => Err((
            Some("kind"),
            format!("sampler '{}' needs a hilbert target", spec.name()),
        )),
    };
    let u = target.potential();
    let d = u.dim();
    match spec {
        SamplerSpec::Rwmc { sigma } => rwmc_gaussian(u, *sigma).map_err(core),
        SamplerSpec::Mala { delta } => mala(u, *delta).map_err(core),
        SamplerSpec::Hmc {
            delta,
            n_steps,
            mass_diagonal,
        } => {
            let mass = match mass_diagonal {
                Some(m) if m.len() != d => {
                    return Err((
                        Some("mass_diagonal"),
                        format!("mass_diagonal has {} entries, target has dimension {d}", m.len()),
                    ))
                }
                Some(m) => MassMatrix::diagonal(m.clone()).map_err(|e| (Some("mass_diagonal"), e.to_string()))?,
                None => MassMatrix::identity(d),
            };
            hmc(u, HmcConfig::new(*delta, *n_steps, mass)).map_err(core)
        }
        SamplerSpec::RelativisticHmc { m, c, delta, n_steps } => {
            relativistic_hmc(u, *m, *c, *delta, *n_steps).map_err(core)
        }
        SamplerSpec::Rmhmc { delta, n_steps, a, b } => {
            let metric = DiagonalMetric::quadratic(d, *a, *b).map_err(core)?;
            rmhmc(u, Arc::new(metric), *delta, *n_steps).map_err(core)
        }
        SamplerSpec::SurrogateHmc {
            delta,
            n_steps,
            force_scale,
        } => {
            if !(delta.is_finite() && *delta > 0.0) {
                return Err((Some("delta"), format!("delta must be positive, got {delta}")));
            }
            if *n_steps == 0 {
                return Err((Some("n_steps"), "n_steps must be at least 1".into()));
            }
            if !force_scale.is_finite() {
                return Err((Some("force_scale"), "force_scale must be finite".into()));
            }
            if !u.has_gradient() {
                return Err((None, "target has no gradient".into()));
            }
            let grad = Arc::clone(&u);
            let s = *force_scale;
            let f2: Field = Arc::new(move |q: &[f64]| match grad.gradient(q) {
                Some(g) => g.iter().map(|x| -s * x).collect(),
                None => vec![f64::NAN; q.len()],
            });
            let f1: Field = Arc::new(|v: &[f64]| v.to_vec());
            let lf = Leapfrog::new(*n_steps, 0.5 * delta, *delta, f1, f2);
            surrogate_hmc(u, Arc::new(GaussianAux::standard(d)), Scheme::Leapfrog(lf), true).map_err(core)
        }
        SamplerSpec::Pcn { delta, rho } => {
            let step = match (delta, rho) {
                (Some(d), None) => PcnStep::Delta(*d),
                (None, Some(r)) => PcnStep::Rho(*r),
                _ => return Err((Some("kind"), "pcn needs exactly one of delta or rho".into())),
            };
            pcn(hilbert()?, step).map_err(core)
        }
        SamplerSpec::InfMala { delta } => inf_mala(hilbert()?, *delta).map_err(core),
        SamplerSpec::InfHmc {
            delta1,
            delta2,
            n_steps,
        } => inf_hmc(hilbert()?, AuxLaw::Reference, *delta1, *delta2, *n_steps).map_err(core),
        SamplerSpec::GenLangevin { delta, force_scale } => {
            let h = hilbert()?;
            if !force_scale.is_finite() {
                return Err((Some("force_scale"), "force_scale must be finite".into()));
            }
            let base = Arc::clone(h.surrogate());
            let s = *force_scale;
            let f: Field = Arc::new(move |q: &[f64]| base(q).iter().map(|x| s * x).collect());
            gen_langevin(h, f, *delta).map_err(core)
        }
    }
}

/// Output directory: command line, then config, then environment, then
/// [`DEFAULT_OUTPUT_DIR`].
pub fn resolve_output_dir(config: &ExperimentConfig, env: Option<PathBuf>) -> PathBuf {
    config
        .output
        .dir
        .clone()
        .or(env)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub chain: usize,
    pub stream: u64,
    pub csv: String,
    pub steps_completed: usize,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<ChainSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub library: &'static str,
    pub version: &'static str,
    pub sampler: &'static str,
    pub dim: usize,
    pub config: ExperimentConfig,
    pub chains: Vec<ChainReport>,
}

impl RunSummary {
    pub fn failed(&self) -> bool {
        self.chains.iter().any(|c| c.error.is_some())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot write output in {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot write CSV {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("cannot serialize summary: {0}")]
    Json(#[from] serde_json::Error),
}

/// Runs every chain in parallel, writing `chain_{c}.csv` and
/// `summary.json` to `out_dir`. Sampler errors end the affected chain early
/// and are recorded in its report; I/O problems abort the run.
pub fn run(exp: &Experiment, out_dir: &Path) -> Result<RunSummary, RunError> {
    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let chains = (0..exp.config.run.n_chains)
        .into_par_iter()
        .map(|c| run_one(exp, out_dir, c))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = RunSummary {
        library: "involutive-core",
        version: env!("CARGO_PKG_VERSION"),
        sampler: exp.config.sampler.name(),
        dim: exp.dim(),
        config: exp.config.clone(),
        chains,
    };
    let path = out_dir.join(SUMMARY_FILE);
    let file = File::create(&path).map_err(|source| RunError::Io { path, source })?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &summary)?;
    io::Write::write_all(&mut w, b"\n").map_err(|source| RunError::Io {
        path: out_dir.join(SUMMARY_FILE),
        source,
    })?;
    Ok(summary)
}

/// Chain `c` draws from stream `c` of the ChaCha20 generator seeded with the
/// run seed; its diagnostics use a separate stream so thinning or summary
/// settings never perturb the chain itself.
fn run_one(exp: &Experiment, out_dir: &Path, c: usize) -> Result<ChainReport, RunError> {
    let run = &exp.config.run;
    let stream = c as u64;
    let mut rng = ChaCha20Rng::seed_from_u64(run.seed);
    rng.set_stream(stream);

    let name = format!("chain_{c}.csv");
    let path = out_dir.join(&name);
    let csv_err = |source| RunError::Csv {
        path: path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    let d = exp.dim();
    let mut header = vec!["step".to_string()];
    header.extend((1..=d).map(|i| format!("q_{i}")));
    header.push("alpha".into());
    header.push("accepted".into());
    w.write_record(&header).map_err(csv_err)?;

    let thin = exp.config.output.thin;
    let mut chain = Chain {
        states: vec![exp.initial.clone()],
        steps: Vec::with_capacity(run.n_steps),
    };
    let mut error = None;
    let mut q = exp.initial.clone();
    let mut record = Vec::with_capacity(d + 3);
    for step in 1..=run.n_steps {
        let res = match exp.kernel.mh_step(&q, &mut rng) {
            Ok(r) => r,
            Err(e) => {
                error = Some(format!("step {step}: {e}"));
                break;
            }
        };
        q = res.next;
        chain.steps.push(StepSummary {
            alpha: res.alpha,
            accepted: res.accepted,
        });
        if step % thin == 0 {
            record.clear();
            record.push(step.to_string());
            record.extend(q.iter().map(|x| x.to_string()));
            record.push(res.alpha.to_string());
            record.push(u8::from(res.accepted).to_string());
            w.write_record(&record).map_err(csv_err)?;
        }
        chain.states.push(q.clone());
    }
    w.flush().map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;

    let steps_completed = chain.steps.len();
    let mut diag_rng = ChaCha20Rng::seed_from_u64(run.seed);
    diag_rng.set_stream(stream | (1 << 63));
    let summary = if run.burn_in < chain.states.len() {
        summarize(&chain, run.burn_in, &mut diag_rng).ok()
    } else {
        None
    };
    Ok(ChainReport {
        chain: c,
        stream,
        csv: name,
        steps_completed,
        status: if error.is_some() { "error" } else { "ok" },
        error,
        summary,
    })
}
