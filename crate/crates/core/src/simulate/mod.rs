//! Monte-Carlo engines: the exact kernel sampler and the particle method.

mod ensemble;
mod oracle;
mod particle;
mod stats;

pub use ensemble::{Generator, PathEnsemble};
pub use oracle::{sample_oracle, BLOCK};
pub use particle::{run_particle_method, BandwidthRule, ParticleConfig};
pub use stats::{ensemble_stats, ks_against_kernel, ks_two_sample, EnsembleStats};
