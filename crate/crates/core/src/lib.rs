//! Numerical laboratory for branching Markov chains and branching random
//! walks in random environment.
//!
//! A branching random walk is transient (every site is visited finitely
//! often) exactly when the spectral radius of its first-moment kernel is at
//! most one. The crate computes that spectral radius on finite windows,
//! evaluates the explicit minimax value
//! `c = sup_{m in hull(K)} inf_θ Σ_s e^{<θ,s>} m(s)` for i.i.d. environments,
//! and simulates the particle system to cross-check both.
//!
//! - [`kernel`]: lattices, offspring laws, environments, moment kernels.
//! - [`spectral`]: Green functions, Perron–Frobenius values, superharmonic
//!   functions, the frozen-boundary solver.
//! - [`criterion`]: the minimax criterion and critical parameters.
//! - [`simulate`]: particle-level Monte Carlo.

pub mod criterion;
pub mod error;
pub mod kernel;
pub mod rng;
pub mod simulate;
pub mod spectral;

pub use criterion::{criterion_value, CriterionReport, MeanVector, Verdict};
pub use error::{Error, Result};
pub use kernel::{
    build_moment_kernel, convolve_n, sample_environment, Boundary, EnvironmentRealization,
    EnvironmentSpec, GeneratorSet, MomentKernel, OffspringVector, SiteLaw, Window,
};
pub use spectral::{spectral_radius_window, SpectralEstimate};
