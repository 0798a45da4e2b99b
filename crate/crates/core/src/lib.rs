//! Transition kernels for the translation-type quantum Black-Scholes backward
//! equation
//!
//! ```text
//! du/dt + sigma^2 * sum_{k>=2} eps^(k-2) / k! * d^k u / dx^k = 0
//! ```
//!
//! together with the tools needed to check them from several independent
//! directions:
//!
//! * [`model`]: parameters and the analytic symbols (characteristic exponent,
//!   Hamiltonian dispersion, Lagrangian, stationary momentum).
//! * [`kernel`]: grids, Fourier inversion of the closed-form exponent, truncated
//!   spectral propagation, Chapman-Kolmogorov composition and cumulants.
//! * [`geometry`]: the nonlocal-diffusion side: blurring-density moments,
//!   Kramers-Moyal coefficients on a one-dimensional Riemannian metric, metric
//!   fitting and connection terms.
//! * [`simulate`]: an exact sampler for the kernel law and a McKean-Vlasov
//!   particle method for the nonlocal diffusion.
//! * [`pricing`]: European options under the kernel, implied volatility and
//!   skew term structure.
//!
//! Core numerics are generic over the scalar type ([`Real`] for `f32`/`f64`,
//! [`MomentScalar`] for anything with exact field arithmetic, e.g. big
//! rationals). The aliases below pin the common `f64` instantiation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod io;
pub mod kernel;
pub mod model;
pub mod pricing;
pub mod scalar;
pub mod simulate;
pub mod validate;

pub use error::{Error, Result};
pub use scalar::{MomentScalar, Real};

pub use geometry::{
    connection_terms, coordinate_transform, expanded_laplacian_coefficients, fit_metric_weights,
    kramers_moyal_coefficients, lemma1_moments, lemma2_moments, triangular_blur, BlurShape,
    BlurringDensity, ConnectionTable, MetricFit, MetricProfile, MomentSequence, PDECoefficients,
};
pub use kernel::{
    analytic_cumulants, auto_grid, auto_grid_with_resolution, compose, compute_kernel,
    empirical_moments, spectral_propagate, CentralMoments, CumulantSet, InitialCondition,
    KernelDensity, KernelForm, KernelMethod, SpatialGrid, SpectralOptions,
};
pub use model::{
    characteristic_exponent, dispersion_omega, dispersion_omega_complex, lagrangian,
    momentum_hamiltonian, momentum_hamiltonian_derivative, stationary_momentum,
    wick_rotated_exponent, ModelParams, Truncation,
};
pub use pricing::{
    build_smile, implied_vol, price_european, price_with_kernel, skew_term_structure,
    OptionSide, OptionSpec, SkewPoint, SmileSurface, VolConvention,
};
pub use simulate::{
    ensemble_stats, ks_two_sample, run_particle_method, sample_oracle, BandwidthRule,
    EnsembleStats, Generator, ParticleConfig, PathEnsemble,
};

/// Model parameters in double precision.
pub type Params = ModelParams<f64>;
/// Spatial grid in double precision.
pub type Grid = SpatialGrid<f64>;
/// Kernel density in double precision.
pub type Kernel = KernelDensity<f64>;
/// Complex value in double precision.
pub type Complex64 = num_complex::Complex<f64>;

/// Version string written into every artifact header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Trading days per year; one day is `1 / DAYS_PER_YEAR`.
pub const DAYS_PER_YEAR: f64 = 252.0;
