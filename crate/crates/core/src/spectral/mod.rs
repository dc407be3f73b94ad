//! Green functions, spectral radii of finite windows, superharmonic
//! functions and the frozen-boundary solver.

mod frozen;
mod green;
pub mod linear;
mod power;
mod superharmonic;

pub use frozen::{solve_frozen, FrozenSolution};
pub use green::{green_partial, growth_rate, GreenSeries};
pub use power::{
    growth_rate_estimate, spectral_radius_reducible, spectral_radius_sup, spectral_radius_window,
    spectral_radius_window_from, write_trace, Method, SpectralEstimate, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
pub use superharmonic::{
    admits_superharmonic, check_superharmonic, min_superharmonic_t, SuperharmonicCheck,
};
