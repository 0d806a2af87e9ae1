//! Builtin targets and samplers, as printed by `involutive list`.

pub struct Entry {
    pub kind: &'static str,
    pub params: &'static str,
    pub about: &'static str,
}

pub const TARGETS: &[Entry] = &[
    Entry {
        kind: "standard_gaussian",
        params: "dim: int",
        about: "N(0, I_dim)",
    },
    Entry {
        kind: "anisotropic_gaussian",
        params: "variances: [float]",
        about: "N(0, diag(variances))",
    },
    Entry {
        kind: "rosenbrock (alias banana)",
        params: "a: float = 1, b: float = 100, scale: float = 0.05",
        about: "2-d banana, U(x, y) = scale ((a - x)^2 + b (y - x^2)^2)",
    },
    Entry {
        kind: "hilbert",
        params: "eigenvalues: {values: [float]} | {power_law: {c, p, dim}}, phi: {kind: ...}",
        about: "exp(-Phi) dmu0 with mu0 = N(0, diag(eigenvalues)); fd samplers see the Lebesgue potential",
    },
];

pub const PHIS: &[Entry] = &[
    Entry {
        kind: "quartic_bounded",
        params: "",
        about: "Phi(q) = s^2 / (2 (1 + s)), s = |q|^2",
    },
    Entry {
        kind: "linear",
        params: "a: [float]",
        about: "Phi(q) = <a, q>",
    },
    Entry {
        kind: "zero",
        params: "",
        about: "Phi = 0, the target is mu0 itself",
    },
];

pub const SAMPLERS: &[Entry] = &[
    Entry {
        kind: "rwmc",
        params: "sigma: float",
        about: "random-walk Metropolis, v ~ N(0, sigma^2 I)",
    },
    Entry {
        kind: "mala",
        params: "delta: float",
        about: "Metropolis-adjusted Langevin",
    },
    Entry {
        kind: "hmc",
        params: "delta: float, n_steps: int, mass_diagonal: [float]?",
        about: "leapfrog HMC with Gaussian momentum",
    },
    Entry {
        kind: "relativistic_hmc",
        params: "m: float, c: float, delta: float, n_steps: int",
        about: "HMC with relativistic kinetic energy",
    },
    Entry {
        kind: "rmhmc",
        params: "delta: float, n_steps: int, a: float, b: float",
        about: "Riemannian HMC, metric diag(a + b q_i^2), implicit Stormer-Verlet",
    },
    Entry {
        kind: "surrogate_hmc",
        params: "delta: float, n_steps: int, force_scale: float = 1",
        about: "leapfrog driven by -force_scale * grad U, exact accept/reject on U",
    },
    Entry {
        kind: "pcn",
        params: "delta: float | rho: float  [hilbert]",
        about: "preconditioned Crank-Nicolson",
    },
    Entry {
        kind: "inf_mala",
        params: "delta: float  [hilbert]",
        about: "infinite-dimensional MALA, force C grad Phi",
    },
    Entry {
        kind: "inf_hmc",
        params: "delta1: float, delta2: float, n_steps: int  [hilbert]",
        about: "splitting HMC on the Gaussian reference (kick delta1, rotate delta2)",
    },
    Entry {
        kind: "gen_langevin",
        params: "delta: float, force_scale: float = 1  [hilbert]",
        about: "generalized Langevin, force force_scale * C grad Phi",
    },
];

fn section(out: &mut String, title: &str, entries: &[Entry]) {
    out.push_str(title);
    out.push('\n');
    let width = entries.iter().map(|e| e.kind.len()).max().unwrap_or(0);
    for e in entries {
        out.push_str(&format!("  {:width$}  {}\n", e.kind, e.about));
        if !e.params.is_empty() {
            out.push_str(&format!("  {:width$}    {}\n", "", e.params));
        }
    }
}

pub fn render() -> String {
    let mut out = String::new();
    section(&mut out, "targets:", TARGETS);
    out.push('\n');
    section(&mut out, "hilbert phi:", PHIS);
    out.push('\n');
    section(&mut out, "samplers:", SAMPLERS);
    out.push_str("\nsamplers marked [hilbert] need a hilbert target.\n");
    out
}
