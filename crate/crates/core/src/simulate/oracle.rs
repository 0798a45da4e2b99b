//! Exact sampler for the kernel law.
//!
//! With `lambda = sigma^2 / eps^2` and `N ~ Poisson(lambda t)`, the variable
//! `X = eps lambda t - eps N` has `E[exp(i p X)] = exp(t m(p))`.
//! `eps = 0` draws `sigma sqrt(t) Z` instead.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::VERSION;

use super::ensemble::{Generator, PathEnsemble};

/// Samples per independently seeded block.
pub const BLOCK: usize = 1 << 16;

/// Generator for block `index`: one ChaCha stream per block, so the output
/// does not depend on the thread count.
pub(crate) fn block_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn sample_oracle(params: &ModelParams<f64>, n_samples: usize, seed: u64) -> Result<PathEnsemble> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be >= 1".into()));
    }
    let eps = params.epsilon;
    let lt = if eps == 0.0 { 0.0 } else { params.jump_count() };
    let poisson = if eps == 0.0 {
        None
    } else {
        Some(Poisson::new(lt).map_err(|e| Error::Config(format!("poisson rate {lt}: {e}")))?)
    };
    let sd = params.std_dev();
    let shift = eps * lt;
    let mut samples = vec![0.0; n_samples];
    samples
        .par_chunks_mut(BLOCK)
        .enumerate()
        .for_each(|(b, chunk)| {
            let mut rng = block_rng(seed, b as u64);
            match &poisson {
                None => {
                    for s in chunk.iter_mut() {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        *s = sd * z;
                    }
                }
                Some(pois) => {
                    for s in chunk.iter_mut() {
                        let k: f64 = pois.sample(&mut rng);
                        *s = shift - eps * k;
                    }
                }
            }
        });
    Ok(PathEnsemble {
        samples,
        paths: None,
        generator: Generator::Oracle,
        seed,
        params: *params,
        engine_version: VERSION.to_string(),
        floored: 0,
    })
}
