//! Involutive Metropolis–Hastings.
//!
//! Every sampler in this crate is one instance of the same accept–reject
//! step on an extended phase space `(q, v)`:
//!
//! 1. draw an auxiliary variable `v ~ V(q, ·)`,
//! 2. map `(q, v)` through an involution `S`,
//! 3. accept the position part of `S(q, v)` with probability
//!    `1 ∧ dS*M/dM (q, v)`, where `M(dq, dv) = V(q, dv) μ(dq)`.
//!
//! The modules provide the generic kernel ([`involutive`]), the geometric
//! integrators that build involutions out of reversible maps
//! ([`integrators`]), finite-dimensional samplers ([`samplers_fd`]:
//! RWMC, MALA, HMC, relativistic HMC, RMHMC, surrogate HMC), samplers for
//! targets with a Gaussian reference measure ([`gaussian`],
//! [`samplers_hilbert`]: pCN, ∞MALA, ∞HMC, generalized Langevin) and the
//! statistical checks used to validate them ([`diagnostics`]).
//!
//! ```
//! use std::sync::Arc;
//! use involutive_core::involutive::{run_chain, FnPotential};
//! use involutive_core::samplers_fd::mala;
//! use rand::SeedableRng;
//!
//! let target = Arc::new(
//!     FnPotential::new(2, |q: &[f64]| 0.5 * (q[0] * q[0] + q[1] * q[1]))
//!         .with_gradient(|q: &[f64]| q.to_vec()),
//! );
//! let kernel = mala(target, 0.9).unwrap();
//! let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
//! let chain = run_chain(&kernel, &[0.0, 0.0], 100, &mut rng).unwrap();
//! assert_eq!(chain.states.len(), 101);
//! ```

pub mod diagnostics;
pub mod error;
pub mod gaussian;
pub mod integrators;
pub mod involutive;
pub mod samplers_fd;
pub mod samplers_hilbert;

pub use error::{Error, Result};
pub use involutive::{ExtendedPoint, InvolutiveKernel, StepResult};
