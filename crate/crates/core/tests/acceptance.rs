//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use involutive_core::diagnostics::{detailed_balance_test, moment_check, transition_pairs};
use involutive_core::gaussian::SpectralGaussian;
use involutive_core::integrators::{
    check_reversibility, leapfrog, momentum_flip, numerical_logdet_jacobian, rotation,
    stormer_verlet, Drift, Field, FlowMap, ImplicitOptions, Kick, Leapfrog, Palindrome,
    PhaseField, StormerVerlet,
};
use involutive_core::involutive::{
    accept_prob, generic_log_rn, run_chain, ExtendedMap, ExtendedPoint, FnPotential,
    InvolutiveKernel, Potential,
};
use involutive_core::samplers_fd::{
    hmc, mala, mala_log_ratio, mala_proposal, relativistic_hmc, rmhmc, rwmc_gaussian,
    surrogate_hmc, DiagonalMetric, GaussianAux, HmcConfig, MassMatrix, Scheme,
};
use involutive_core::samplers_hilbert::{
    gen_langevin, gen_langevin_proposal, inf_hmc, inf_mala, inf_mala_log_ratio,
    leapfrog_refinement_probe, pcn, pcn_log_ratio, phi_linear, phi_quartic_bounded, phi_zero,
    AuxLaw, HilbertTarget, PcnStep,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(id: usize, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let pass = res.pass && in_time;
    let budget_note = match budget {
        Some(b) => format!(", budget {:.0}s", b.as_secs_f64()),
        None => String::new(),
    };
    println!(
        "criterion {id:>2} [{}] {title}: {} ({:.2}s{budget_note})",
        if pass { "PASS" } else { "FAIL" },
        res.detail,
        elapsed.as_secs_f64()
    );
    pass
}

// ---------------------------------------------------------------- targets

fn smooth_fd(d: usize) -> Arc<dyn Potential> {
    Arc::new(
        FnPotential::new(d, |q: &[f64]| {
            q.iter().map(|x| 0.25 * x.powi(4) + 0.5 * x * x).sum::<f64>() + 0.3 * q[0]
        })
        .with_gradient(|q: &[f64]| {
            let mut g: Vec<f64> = q.iter().map(|x| x.powi(3) + x).collect();
            g[0] += 0.3;
            g
        }),
    )
}

/// `N(0, diag(1, 0.25))`.
fn aniso() -> Arc<dyn Potential> {
    Arc::new(
        FnPotential::new(2, |q: &[f64]| 0.5 * q[0] * q[0] + 2.0 * q[1] * q[1])
            .with_gradient(|q: &[f64]| vec![q[0], 4.0 * q[1]]),
    )
}

fn hilbert_reference(d: usize) -> SpectralGaussian {
    SpectralGaussian::power_law(1.0, 2.0, d).unwrap()
}

fn hilbert_quartic(d: usize) -> HilbertTarget {
    HilbertTarget::new(Arc::new(phi_quartic_bounded(d)), hilbert_reference(d)).unwrap()
}

fn wiggly_force(g: &SpectralGaussian) -> Field {
    let g = g.clone();
    Arc::new(move |q: &[f64]| {
        let d = q.len();
        let raw: Vec<f64> = (0..d)
            .map(|i| q[i].sin() + 0.2 * q[(i + 1) % d].powi(2))
            .collect();
        g.frac_power(1.0, &raw)
    })
}

fn diag_law(g: &SpectralGaussian) -> AuxLaw {
    let lam = g.eigenvalues().to_vec();
    AuxLaw::diagonal(move |q: &[f64]| {
        lam.iter().zip(q).map(|(l, x)| l * (1.0 + 0.5 * x.tanh())).collect()
    })
}

fn uniform_point(rng: &mut ChaCha20Rng, d: usize, r: f64) -> ExtendedPoint {
    ExtendedPoint::new(
        (0..d).map(|_| rng.random_range(-r..r)).collect(),
        (0..d).map(|_| rng.random_range(-r..r)).collect(),
    )
}

fn gaussian_point(rng: &mut ChaCha20Rng, g: &SpectralGaussian) -> ExtendedPoint {
    ExtendedPoint::new(g.sample(rng), g.sample(rng))
}

// ---------------------------------------------------------------- kernels

struct Named {
    name: &'static str,
    kernel: InvolutiveKernel,
    hilbert: Option<SpectralGaussian>,
}

fn shipped_kernels() -> Vec<Named> {
    let d = 5;
    let t = smooth_fd(d);
    let f1: Field = Arc::new(|v: &[f64]| v.to_vec());
    let surrogate_f2: Field =
        Arc::new(|q: &[f64]| q.iter().map(|x| -1.3 * (x.powi(3) + x)).collect());
    let kick: Arc<dyn FlowMap> = Arc::new(Kick(surrogate_f2));
    let drift: Arc<dyn FlowMap> = Arc::new(Drift(f1));
    let pal = Palindrome::new(vec![(kick, 0.05), (drift, 0.1)], 5).unwrap();

    let hd = 20;
    let g = hilbert_reference(hd);
    let ht = hilbert_quartic(hd);
    let hw = hilbert_quartic(hd).with_surrogate(wiggly_force(&g));
    let fd = |name, kernel| Named {
        name,
        kernel,
        hilbert: None,
    };
    let hk = |name, kernel| Named {
        name,
        kernel,
        hilbert: Some(g.clone()),
    };
    vec![
        fd("rwmc", rwmc_gaussian(Arc::clone(&t), 0.7).unwrap()),
        fd("mala", mala(Arc::clone(&t), 0.5).unwrap()),
        fd(
            "hmc",
            hmc(
                Arc::clone(&t),
                HmcConfig::new(0.2, 8, MassMatrix::diagonal(vec![1.0, 2.0, 0.5, 1.5, 1.0]).unwrap()),
            )
            .unwrap(),
        ),
        fd("relativistic_hmc", relativistic_hmc(Arc::clone(&t), 1.0, 1.2, 0.2, 8).unwrap()),
        fd(
            "rmhmc",
            rmhmc(
                Arc::clone(&t),
                Arc::new(DiagonalMetric::quadratic(d, 1.0, 0.5).unwrap()),
                0.1,
                5,
            )
            .unwrap(),
        ),
        fd(
            "surrogate_hmc",
            surrogate_hmc(Arc::clone(&t), Arc::new(GaussianAux::standard(d)), Scheme::Palindrome(pal), true)
                .unwrap(),
        ),
        hk("pcn", pcn(&ht, PcnStep::Delta(0.5)).unwrap()),
        hk("inf_mala", inf_mala(&ht, 0.5).unwrap()),
        hk("inf_hmc", inf_hmc(&hw, diag_law(&g), 0.25, 0.5, 6).unwrap()),
        hk(
            "gen_langevin",
            gen_langevin(&ht, wiggly_force(&g), 0.5).unwrap(),
        ),
    ]
}

fn sample_points(k: &Named, n: usize, seed: u64) -> Vec<ExtendedPoint> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| match &k.hilbert {
            Some(g) => gaussian_point(&mut rng, g),
            None => uniform_point(&mut rng, k.kernel.dim(), 1.5),
        })
        .collect()
}

// ---------------------------------------------------------------- criteria

fn c1_involution() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = vec![];
    let mut skipped = 0;
    for k in shipped_kernels() {
        let inv = k.kernel.involution();
        let mut m: f64 = 0.0;
        for z in sample_points(&k, 1000, 1) {
            let Ok(s) = inv.apply(&z) else {
                skipped += 1;
                continue;
            };
            match inv.apply(&s) {
                Ok(ss) => m = m.max(ss.max_abs_diff(&z)),
                Err(_) => m = f64::INFINITY,
            }
        }
        if m > 1e-8 {
            failures.push(format!("{}={m:.1e}", k.name));
        }
        worst = worst.max(m);
    }
    outcome(
        failures.is_empty(),
        format!(
            "10 kernels x 1000 points, max |S(S(z))-z| = {worst:.2e} (tol 1e-8), {skipped} divergent points{}",
            if failures.is_empty() { String::new() } else { format!(", failing: {}", failures.join(" ")) }
        ),
    )
}

fn c2_skew() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = vec![];
    for k in shipped_kernels() {
        let inv = k.kernel.involution();
        let mut m: f64 = 0.0;
        for z in sample_points(&k, 1000, 2) {
            let a = inv.log_rn(&z);
            let Ok(s) = inv.apply(&z) else { continue };
            let b = inv.log_rn(&s);
            if a.is_finite() && b.is_finite() {
                m = m.max((a + b).abs());
            }
        }
        if m > 1e-8 {
            failures.push(format!("{}={m:.1e}", k.name));
        }
        worst = worst.max(m);
    }
    outcome(
        failures.is_empty(),
        format!(
            "max |log_rn(z)+log_rn(S z)| = {worst:.2e} (tol 1e-8){}",
            if failures.is_empty() { String::new() } else { format!(", failing: {}", failures.join(" ")) }
        ),
    )
}

fn oracle_gap(k: &InvolutiveKernel, points: &[ExtendedPoint]) -> f64 {
    let inv = k.involution();
    points
        .iter()
        .map(|z| {
            let closed = inv.log_rn(z);
            let oracle = generic_log_rn(|p: &ExtendedPoint| k.ext_log_density(p), &**inv, z);
            if closed == oracle {
                0.0
            } else {
                (closed - oracle).abs()
            }
        })
        .fold(0.0, f64::max)
}

fn c3_oracle() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let pts3: Vec<_> = (0..100).map(|_| uniform_point(&mut rng, 3, 1.5)).collect();
    let pts1: Vec<_> = (0..100).map(|_| uniform_point(&mut rng, 1, 1.5)).collect();
    let mala_gap = oracle_gap(&mala(smooth_fd(3), 0.5).unwrap(), &pts3);
    let hmc_k = hmc(
        smooth_fd(3),
        HmcConfig::new(0.2, 6, MassMatrix::dense(DMatrix::from_row_slice(3, 3, &[
            2.0, 0.3, 0.0, 0.3, 1.0, 0.2, 0.0, 0.2, 0.7,
        ]))
        .unwrap()),
    )
    .unwrap();
    let hmc_gap = oracle_gap(&hmc_k, &pts3);
    let rm = rmhmc(
        smooth_fd(1),
        Arc::new(DiagonalMetric::quadratic(1, 1.0, 1.0).unwrap()),
        0.2,
        4,
    )
    .unwrap();
    let rm_gap = oracle_gap(&rm, &pts1);

    let mut hil_gap: f64 = 0.0;
    for i in 0..100 {
        let d = 1 + i % 4;
        let n = 1 + (i / 4) % 4;
        let g = hilbert_reference(d);
        let t = hilbert_quartic(d).with_surrogate(wiggly_force(&g));
        let law = if i % 2 == 0 { AuxLaw::Reference } else { diag_law(&g) };
        let k = inf_hmc(&t, law, 0.3, 0.55, n).unwrap();
        let z = gaussian_point(&mut rng, &g);
        hil_gap = hil_gap.max(oracle_gap(&k, &[z]));
    }
    let worst = mala_gap.max(hmc_gap).max(rm_gap).max(hil_gap);
    outcome(
        worst <= 1e-5,
        format!(
            "max |closed - oracle|: mala {mala_gap:.1e}, hmc {hmc_gap:.1e}, rmhmc(d=1) {rm_gap:.1e}, hilbert(d<=4,n<=4) {hil_gap:.1e} (tol 1e-5)"
        ),
    )
}

fn c4_volume() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let f1 = |v: &[f64]| v.iter().map(|x| x.tanh() + 0.5 * x).collect::<Vec<_>>();
    let f2 = |q: &[f64]| q.iter().map(|x| -x.powi(3) - x.sin()).collect::<Vec<_>>();
    let (sf1, sf2) = rm_fields(3);
    let mut lf_worst: f64 = 0.0;
    let mut sv_worst: f64 = 0.0;
    for _ in 0..100 {
        let z = uniform_point(&mut rng, 3, 1.2);
        let lf = |x: &[f64]| leapfrog(4, 0.1, 0.2, &f1, &f2, &ExtendedPoint::from_flat(x, 3)).map(|p| p.to_flat());
        lf_worst = lf_worst.max(numerical_logdet_jacobian(lf, &z.to_flat(), None).unwrap().abs());
        let sv = |x: &[f64]| {
            stormer_verlet(3, 0.15, &*sf1, &*sf2, &ExtendedPoint::from_flat(x, 3), &ImplicitOptions::default())
                .map(|p| p.to_flat())
        };
        sv_worst = sv_worst.max(numerical_logdet_jacobian(sv, &z.to_flat(), None).unwrap().abs());
    }
    outcome(
        lf_worst <= 1e-5 && sv_worst <= 1e-5,
        format!("max |log det|: leapfrog {lf_worst:.1e}, stormer-verlet {sv_worst:.1e} (d=3, tol 1e-5)"),
    )
}

/// Hamiltonian fields of `ℋ = Σ ¼qᵢ⁴ + ½qᵢ² + ½vᵢ²/mᵢ(q) + ½ log mᵢ(q)`, `mᵢ = 1 + qᵢ²`.
fn rm_fields(_d: usize) -> (PhaseField, PhaseField) {
    let f1: PhaseField = Arc::new(|q: &[f64], v: &[f64]| {
        q.iter().zip(v).map(|(q, v)| v / (1.0 + q * q)).collect()
    });
    let f2: PhaseField = Arc::new(|q: &[f64], v: &[f64]| {
        q.iter()
            .zip(v)
            .map(|(q, v)| {
                let m = 1.0 + q * q;
                -(q.powi(3) + q) + v * v * q / (m * m) - q / m
            })
            .collect()
    });
    (f1, f2)
}

fn c5_reversibility() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let pts: Vec<_> = (0..100).map(|_| uniform_point(&mut rng, 3, 1.5)).collect();
    let odd: Field = Arc::new(|v: &[f64]| v.iter().map(|x| x.tanh() + 0.5 * x).collect());
    let force: Field = Arc::new(|q: &[f64]| q.iter().map(|x| -x.powi(3) - x.sin()).collect());
    let lf = Leapfrog::new(5, 0.1, 0.2, Arc::clone(&odd), Arc::clone(&force));
    let (sf1, sf2) = rm_fields(3);
    let sv = StormerVerlet::new(4, 0.15, sf1, sf2);
    let pal = Palindrome::new(
        vec![
            (Arc::new(Kick(Arc::clone(&force))) as Arc<dyn FlowMap>, 0.07),
            (Arc::new(Drift(Arc::clone(&odd))) as Arc<dyn FlowMap>, 0.05),
            (Arc::new(Kick(Arc::clone(&force))) as Arc<dyn FlowMap>, 0.03),
        ],
        3,
    )
    .unwrap();
    let g = hilbert_reference(3);
    let hf = wiggly_force(&g);
    let strang = move |z: &ExtendedPoint| {
        involutive_core::integrators::strang_hilbert(4, 0.2, 0.5, &*hf, z).map(|t| t.last())
    };
    let rot = |z: &ExtendedPoint| Ok(rotation(0.7, z));

    let maps: Vec<(&str, &dyn ExtendedMap)> = vec![
        ("leapfrog", &lf),
        ("stormer_verlet", &sv),
        ("palindrome", &pal),
        ("strang", &strang),
        ("rotation", &rot),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = vec![];
    for (name, m) in maps {
        let rep = check_reversibility(m, &momentum_flip, &pts, 1e-8);
        parts.push(format!("{name} {:.0e}", rep.max_residual));
        worst = worst.max(rep.max_residual);
    }
    let shifted: Field = Arc::new(|v: &[f64]| v.iter().map(|x| x + 1.0).collect());
    let bad = Leapfrog::new(5, 0.1, 0.2, shifted, force);
    let bad_rep = check_reversibility(&bad, &momentum_flip, &pts, 1e-8);
    outcome(
        worst <= 1e-8 && bad_rep.max_residual > 1e-3,
        format!(
            "max residual {worst:.1e} ({}); non-odd f1 residual {:.2e} (> 1e-3 expected)",
            parts.join(", "),
            bad_rep.max_residual
        ),
    )
}

fn c6_tierney() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let t = smooth_fd(3);
    let mk = mala(Arc::clone(&t), 0.6).unwrap();
    let mut mala_gap: f64 = 0.0;
    for _ in 0..100 {
        let z = uniform_point(&mut rng, 3, 1.5);
        let qn = mala_proposal(&*t, 0.6, &z.q, &z.v);
        let a = accept_prob(mala_log_ratio(&*t, 0.6, &z.q, &qn));
        let b = accept_prob(mk.involution().log_rn(&z));
        mala_gap = mala_gap.max((a - b).abs());
    }
    let d = 6;
    let g = hilbert_reference(d);
    let ht = hilbert_quartic(d);
    let pk = pcn(&ht, PcnStep::Delta(0.7)).unwrap();
    let ik = inf_mala(&ht, 0.7).unwrap();
    let (mut pcn_gap, mut inf_gap): (f64, f64) = (0.0, 0.0);
    let zero = |q: &[f64]| vec![0.0; q.len()];
    for _ in 0..100 {
        let z = gaussian_point(&mut rng, &g);
        let qn = gen_langevin_proposal(&zero, 0.7, &z.q, &z.v);
        let a = accept_prob(pcn_log_ratio(&**ht.phi(), &z.q, &qn));
        pcn_gap = pcn_gap.max((a - accept_prob(pk.involution().log_rn(&z))).abs());
        let qn = gen_langevin_proposal(&**ht.surrogate(), 0.7, &z.q, &z.v);
        let a = accept_prob(inf_mala_log_ratio(&ht, 0.7, &z.q, &qn).unwrap());
        inf_gap = inf_gap.max((a - accept_prob(ik.involution().log_rn(&z))).abs());
    }
    let worst = mala_gap.max(pcn_gap).max(inf_gap);
    outcome(
        worst <= 1e-10,
        format!("max |alpha_density - alpha_involutive|: mala {mala_gap:.1e}, pcn {pcn_gap:.1e}, inf_mala {inf_gap:.1e} (tol 1e-10)"),
    )
}

fn alpha_gap(a: &InvolutiveKernel, b: &InvolutiveKernel, pts: &[ExtendedPoint]) -> f64 {
    pts.iter()
        .map(|z| {
            let pa = a.involution().propose(z);
            let pb = b.involution().propose(z);
            let qa = pa.image.map(|p| p.q);
            let qb = pb.image.map(|p| p.q);
            let same_q = match (&qa, &qb) {
                (Some(x), Some(y)) => x.iter().zip(y).all(|(a, b)| (a - b).abs() <= 1e-10),
                (None, None) => true,
                _ => false,
            };
            if !same_q {
                return f64::INFINITY;
            }
            (accept_prob(pa.log_rn) - accept_prob(pb.log_rn)).abs()
        })
        .fold(0.0, f64::max)
}

fn c7_reductions() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let t = smooth_fd(3);
    let fd_pts: Vec<_> = (0..100).map(|_| uniform_point(&mut rng, 3, 1.5)).collect();
    let zero: Field = Arc::new(|q: &[f64]| vec![0.0; q.len()]);
    let ident: Field = Arc::new(|v: &[f64]| v.to_vec());
    let sur = surrogate_hmc(
        Arc::clone(&t),
        Arc::new(GaussianAux::isotropic(3, 0.6).unwrap()),
        Scheme::Leapfrog(Leapfrog::new(1, 0.0, 1.0, ident, Arc::clone(&zero))),
        true,
    )
    .unwrap();
    let rw = rwmc_gaussian(Arc::clone(&t), 0.6).unwrap();
    let g1 = alpha_gap(&sur, &rw, &fd_pts);
    let h1 = hmc(Arc::clone(&t), HmcConfig::new(0.6, 1, MassMatrix::identity(3))).unwrap();
    let ma = mala(Arc::clone(&t), 0.6).unwrap();
    let g2 = alpha_gap(&h1, &ma, &fd_pts);

    let d = 6;
    let g = hilbert_reference(d);
    let ht = hilbert_quartic(d);
    let hp: Vec<_> = (0..100).map(|_| gaussian_point(&mut rng, &g)).collect();
    let delta: f64 = 0.7;
    let rho = (4.0 - delta) / (4.0 + delta);
    let ih = inf_hmc(&ht, AuxLaw::Reference, 0.5 * delta.sqrt(), rho.acos(), 1).unwrap();
    let im = inf_mala(&ht, delta).unwrap();
    let g3 = alpha_gap(&ih, &im, &hp);
    let gl = gen_langevin(&ht, zero, delta).unwrap();
    let pc = pcn(&ht, PcnStep::Delta(delta)).unwrap();
    let g4 = alpha_gap(&gl, &pc, &hp);
    let worst = g1.max(g2).max(g3).max(g4);
    outcome(
        worst <= 1e-10,
        format!("max alpha gap: surrogate~rwmc {g1:.1e}, hmc(n=1)~mala {g2:.1e}, inf_hmc(n=1)~inf_mala {g3:.1e}, gen_langevin(f=0)~pcn {g4:.1e} (tol 1e-10)"),
    )
}

fn c8_phi_zero() -> Outcome {
    let d = 10;
    let g = hilbert_reference(d);
    let t = HilbertTarget::new(Arc::new(phi_zero(d)), g.clone()).unwrap();
    let kernels = [
        ("pcn", pcn(&t, PcnStep::Delta(1.0)).unwrap()),
        ("inf_hmc", inf_hmc(&t, AuxLaw::Reference, 0.3, 0.5, 3).unwrap()),
    ];
    let mut ok = true;
    let mut parts = vec![];
    for (name, k) in kernels {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let q0 = g.sample(&mut rng);
        let short = run_chain(&k, &q0, 10_000, &mut rng).unwrap();
        let min_alpha = short.steps.iter().map(|s| s.alpha).fold(1.0, f64::min);
        let all_acc = short.steps.iter().all(|s| s.accepted);
        let long = run_chain(&k, &q0, 110_000, &mut rng).unwrap();
        let states = &long.states[10_001..];
        let mc = moment_check(states, &vec![0.0; d], g.eigenvalues(), 50).unwrap();
        let max_z = mc.variance_z.iter().map(|z| z.abs()).fold(0.0, f64::max);
        let pass = min_alpha >= 1.0 - 1e-12 && all_acc && max_z <= 3.0;
        ok &= pass;
        parts.push(format!(
            "{name}: min alpha {min_alpha:.12}, acceptance {:.4}, max |z| of per-mode variance {max_z:.2}",
            short.acceptance_rate()
        ));
    }
    outcome(ok, parts.join("; "))
}

fn fd_samplers() -> Vec<(&'static str, InvolutiveKernel)> {
    let t = aniso();
    let f1: Field = Arc::new(|v: &[f64]| v.to_vec());
    let f2: Field = Arc::new(|q: &[f64]| vec![-q[0], -4.0 * q[1]]);
    let pal = Palindrome::new(
        vec![
            (Arc::new(Kick(f2)) as Arc<dyn FlowMap>, 0.1),
            (Arc::new(Drift(f1)) as Arc<dyn FlowMap>, 0.15),
            (Arc::new(Rot) as Arc<dyn FlowMap>, 0.0),
        ],
        4,
    )
    .unwrap();
    vec![
        ("rwmc", rwmc_gaussian(Arc::clone(&t), 0.8).unwrap()),
        ("mala", mala(Arc::clone(&t), 0.6).unwrap()),
        (
            "hmc",
            hmc(Arc::clone(&t), HmcConfig::new(0.35, 4, MassMatrix::diagonal(vec![1.0, 4.0]).unwrap())).unwrap(),
        ),
        ("relativistic_hmc", relativistic_hmc(Arc::clone(&t), 1.0, 1.0, 0.25, 5).unwrap()),
        (
            "rmhmc",
            rmhmc(Arc::clone(&t), Arc::new(DiagonalMetric::quadratic(2, 1.0, 0.5).unwrap()), 0.25, 4).unwrap(),
        ),
        (
            "surrogate_hmc",
            surrogate_hmc(Arc::clone(&t), Arc::new(GaussianAux::standard(2)), Scheme::Palindrome(pal), true)
                .unwrap(),
        ),
    ]
}

/// Identity stage, exercising a three-stage palindrome.
struct Rot;

impl FlowMap for Rot {
    fn flow(&self, t: f64, z: &ExtendedPoint) -> involutive_core::Result<ExtendedPoint> {
        Ok(rotation(t, z))
    }
}

fn stat_check(name: &str, k: &InvolutiveKernel, seed: u64) -> (bool, String) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let q0 = vec![rng.random::<f64>() - 0.5, 0.5 * (rng.random::<f64>() - 0.5)];
    let chain = run_chain(k, &q0, 201_000, &mut rng).unwrap();
    let states = &chain.states[1_000..];
    let mc = moment_check(states, &[0.0, 0.0], &[1.0, 0.25], 50).unwrap();
    let xs: Vec<f64> = states.iter().map(|s| s[0]).collect();
    let p = detailed_balance_test(&transition_pairs(&xs), &mut rng).unwrap();
    let pass = mc.variance_z.iter().all(|z| z.abs() <= 3.0) && p > 0.01;
    (
        pass,
        format!(
            "{name}: var ({:.3}, {:.3}) z ({:+.2}, {:+.2}), acc {:.2}, db p {p:.3}",
            mc.variances[0],
            mc.variances[1],
            mc.variance_z[0],
            mc.variance_z[1],
            chain.acceptance_rate()
        ),
    )
}

fn c9_statistics() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    for (i, (name, k)) in fd_samplers().into_iter().enumerate() {
        let (pass, msg) = stat_check(name, &k, 90 + i as u64);
        ok &= pass;
        parts.push(msg);
    }
    outcome(ok, parts.join("; "))
}

fn c10_surrogate_bias() -> Outcome {
    let t = aniso();
    let f1: Field = Arc::new(|v: &[f64]| v.to_vec());
    let wrong: Field = Arc::new(|q: &[f64]| vec![-1.5 * q[0], -1.5 * 4.0 * q[1]]);
    let k = surrogate_hmc(
        t,
        Arc::new(GaussianAux::standard(2)),
        Scheme::Leapfrog(Leapfrog::new(4, 0.15, 0.3, f1, wrong)),
        true,
    )
    .unwrap();
    let (pass, msg) = stat_check("surrogate_hmc with grad of 1.5 U", &k, 100);
    outcome(pass, msg)
}

fn c11_refinement() -> Outcome {
    let make = |d: usize| HilbertTarget::new(Arc::new(phi_quartic_bounded(d)), hilbert_reference(d));
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let rep = leapfrog_refinement_probe(&make, 0.5, 5, &[8, 16, 32, 64], 100, &mut rng).unwrap();
    let naive: Vec<String> = rep.rows.iter().map(|r| format!("{:.3}", r.naive_median)).collect();
    let split: Vec<String> = rep.rows.iter().map(|r| format!("{:.3}", r.splitting_median)).collect();
    let ratio = rep.splitting_ratio();
    outcome(
        rep.naive_is_increasing() && ratio < 2.0,
        format!(
            "naive CM statistic medians [{}] (d=8..64), splitting |log_rn| medians [{}], ratio d64/d8 = {ratio:.3}",
            naive.join(", "),
            split.join(", ")
        ),
    )
}

fn c12_hardening() -> Outcome {
    let boxed: Arc<dyn Potential> = Arc::new(
        FnPotential::new(2, |q: &[f64]| {
            if q.iter().all(|x| x.abs() < 1.0) {
                0.5 * (q[0] * q[0] + q[1] * q[1])
            } else {
                f64::INFINITY
            }
        })
        .with_gradient(|q: &[f64]| q.to_vec()),
    );
    let nan_grad: Arc<dyn Potential> = Arc::new(
        FnPotential::new(2, |q: &[f64]| 0.5 * (q[0] * q[0] + q[1] * q[1])).with_gradient(|q: &[f64]| {
            if q[0] > 0.8 {
                vec![f64::NAN, f64::NAN]
            } else {
                q.to_vec()
            }
        }),
    );
    let stiff_metric = Arc::new(DiagonalMetric::quadratic(2, 0.05, 5.0).unwrap());
    let g = hilbert_reference(4);
    let hphi = Arc::new(
        FnPotential::new(4, |q: &[f64]| if q[0] > 0.4 { f64::INFINITY } else { 0.5 * q[0] * q[0] })
            .with_gradient(|q: &[f64]| {
                let mut v = vec![0.0; q.len()];
                v[0] = if q[0] > 0.2 { f64::NAN } else { q[0] };
                v
            }),
    );
    let ht = HilbertTarget::new(hphi, g).unwrap();
    let lin = HilbertTarget::new(Arc::new(phi_linear(vec![1.0, 0.0, 0.0, 0.0])), hilbert_reference(4)).unwrap();

    type Case = (&'static str, InvolutiveKernel, Vec<f64>, Box<dyn Fn(&[f64]) -> bool>);
    let cases: Vec<Case> = vec![
        ("rwmc box", rwmc_gaussian(Arc::clone(&boxed), 1.5).unwrap(), vec![0.0, 0.0], Box::new(|q: &[f64]| q.iter().all(|x| x.abs() < 1.0))),
        ("hmc box", hmc(Arc::clone(&boxed), HmcConfig::new(0.5, 6, MassMatrix::identity(2))).unwrap(), vec![0.0, 0.0], Box::new(|q: &[f64]| q.iter().all(|x| x.abs() < 1.0))),
        ("mala nan-grad", mala(Arc::clone(&nan_grad), 1.2).unwrap(), vec![0.0, 0.0], Box::new(|q: &[f64]| q.iter().all(|x| x.is_finite()))),
        ("hmc nan-grad", hmc(nan_grad, HmcConfig::new(0.4, 8, MassMatrix::identity(2))).unwrap(), vec![0.0, 0.0], Box::new(|q: &[f64]| q.iter().all(|x| x.is_finite()))),
        ("rmhmc non-convergent", rmhmc(aniso(), stiff_metric, 1.5, 3).unwrap(), vec![0.3, 0.1], Box::new(|q: &[f64]| q.iter().all(|x| x.is_finite()))),
        ("pcn Phi=+inf", pcn(&ht, PcnStep::Delta(1.0)).unwrap(), vec![0.0; 4], Box::new(|q: &[f64]| q[0] <= 0.4)),
        ("inf_hmc Phi=+inf, nan-grad", inf_hmc(&ht, AuxLaw::Reference, 0.3, 0.5, 4).unwrap(), vec![0.0; 4], Box::new(|q: &[f64]| q[0] <= 0.4)),
        ("inf_mala nan-grad", inf_mala(&ht, 1.0).unwrap(), vec![0.0; 4], Box::new(|q: &[f64]| q[0] <= 0.4)),
        ("inf_hmc bad aux variances", inf_hmc(&lin, AuxLaw::diagonal(|q: &[f64]| q.iter().map(|x| if *x > 0.5 { -1.0 } else { 0.5 }).collect()), 0.3, 0.5, 2).unwrap(), vec![0.0; 4], Box::new(|q: &[f64]| q.iter().all(|x| *x <= 0.5))),
    ];
    let mut ok = true;
    let mut parts = vec![];
    for (name, k, q0, valid) in cases {
        let run_once = |seed| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run_chain(&k, &q0, 3_000, &mut rng)))
        };
        let (a, b) = (run_once(12), run_once(12));
        let pass = match (a, b) {
            (Ok(Ok(a)), Ok(Ok(b))) => {
                let rejected = a.steps.iter().filter(|s| !s.accepted && s.alpha == 0.0).count();
                let good = a.states == b.states && a.states.iter().all(|s| valid(s)) && rejected > 0;
                parts.push(format!("{name}: {rejected} hard rejections"));
                good
            }
            (Ok(Err(e)), _) | (_, Ok(Err(e))) => {
                parts.push(format!("{name}: error {e}"));
                false
            }
            _ => {
                parts.push(format!("{name}: panic"));
                false
            }
        };
        ok &= pass;
    }
    outcome(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let results = [
        run(1, "involution S(S(z)) = z", Some(s(30)), c1_involution),
        run(2, "skew-symmetry of log-RN", None, c2_skew),
        run(3, "oracle equivalence", Some(s(60)), c3_oracle),
        run(4, "volume preservation", None, c4_volume),
        run(5, "reversibility under momentum flip", None, c5_reversibility),
        run(6, "Tierney equivalence", None, c6_tierney),
        run(7, "reductions between samplers", None, c7_reductions),
        run(8, "exactness for Phi = 0", Some(s(60)), c8_phi_zero),
        run(9, "statistical correctness on N(0, diag(1, 0.25))", Some(s(120)), c9_statistics),
        run(10, "surrogate bias corrected by accept/reject", None, c10_surrogate_bias),
        run(11, "refinement probe", None, c11_refinement),
        run(12, "degenerate-input hardening", None, c12_hardening),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
