//! The transition kernel on a grid.

mod cumulants;
mod density;
mod fourier;
mod grid;

pub use cumulants::{analytic_cumulants, empirical_moments, CentralMoments, CumulantSet};
pub use density::{KernelDensity, KernelForm, KernelMeta, KernelMethod};
pub use fourier::{
    compose, compute_kernel, compute_kernel_batch, spectral_propagate, InitialCondition, SpectralOptions,
};
pub use grid::{auto_grid, auto_grid_with_resolution, SpatialGrid, DEFAULT_POINTS_PER_STD, LATTICE_THRESHOLD};
