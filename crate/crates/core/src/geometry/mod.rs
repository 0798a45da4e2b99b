//! Nonlocal diffusion on a one-dimensional Riemannian manifold: blur
//! moments, Kramers-Moyal coefficients, connection terms and metric fitting.

mod blur;
mod fit;
mod metric;
mod moments;

pub use blur::{
    dirac_blur, gauss_legendre, gauss_legendre_on, triangular_blur, uniform_blur, BlurShape, BlurringDensity,
    BLUR_NODES,
};
pub use fit::{fit_metric_weights, MetricFit, FIT_TOLERANCE, MAX_FIT_ORDER, TIKHONOV};
pub use metric::{
    connection_terms, coordinate_transform, expanded_laplacian_coefficients, kramers_moyal_coefficients,
    ConnectionTable, MetricJet, MetricProfile, MetricRepr, PDECoefficients,
};
pub use moments::{lemma1_moments, lemma2_moments, MomentSequence};
