//! McKean-Vlasov particle method for the nonlocal diffusion
//!
//! ```text
//! dx = sigma * sqrt( E_y[H(x - y)] / p(x) ) dW
//! ```
//!
//! Both the numerator and `p` are kernel density estimates over a frozen
//! snapshot of the ensemble, computed by linear binning and FFT convolution
//! with the Gaussian kernel `K_h` and the smoothed blur `H * K_h`.

use num_complex::Complex;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BlurShape, BlurringDensity};
use crate::model::ModelParams;
use crate::VERSION;

use super::ensemble::{Generator, PathEnsemble};
use super::oracle::{block_rng, BLOCK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BandwidthRule {
    /// `0.9 min(sd, IQR / 1.34) N^(-1/5)`, floored at a quarter of the
    /// per-step diffusion length.
    Silverman,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleConfig {
    pub particles: usize,
    pub steps: usize,
    pub bandwidth: BandwidthRule,
    pub density_floor: f64,
    /// Common starting point of every particle.
    pub x0: f64,
    pub record_paths: bool,
}

impl Default for ParticleConfig {
    fn default() -> Self {
        Self {
            particles: 10_000,
            steps: 50,
            bandwidth: BandwidthRule::Silverman,
            density_floor: 1e-8,
            x0: 0.0,
            record_paths: false,
        }
    }
}

impl ParticleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 100 {
            return Err(Error::Config(format!("need at least 100 particles, got {}", self.particles)));
        }
        if self.steps < 1 {
            return Err(Error::Config("need at least one step".into()));
        }
        if let BandwidthRule::Fixed(h) = self.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("bandwidth must be positive, got {h}")));
            }
        }
        if !(self.density_floor > 0.0) {
            return Err(Error::Config("density floor must be positive".into()));
        }
        Ok(())
    }
}

fn silverman(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |f: f64| sorted[((n - 1.0) * f).round() as usize];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

fn gauss(x: f64, h: f64) -> f64 {
    (-0.5 * (x / h).powi(2)).exp() / (h * (2.0 * std::f64::consts::PI).sqrt())
}

/// `(H * K_h)(d) = int H(y) K_h(d - y) dy` by the blur's quadrature.
fn smoothed_blur(h: &BlurringDensity, d: f64, bw: f64) -> f64 {
    h.y.iter()
        .zip(&h.weights)
        .zip(&h.values)
        .map(|((&y, &w), &v)| w * v * gauss(d - y, bw))
        .sum()
}

/// Estimates `(numerator, density)` at every particle.
fn estimate(xs: &[f64], blur: &BlurringDensity, bw: f64) -> (Vec<f64>, Vec<f64>) {
    let (s_lo, s_hi) = blur.support();
    let span = s_lo.abs().max(s_hi.abs());
    let reach = 8.0 * bw + span;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in xs {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    lo -= reach;
    hi += reach;
    let mut delta = bw / 4.0;
    const MAX_BINS: usize = 1 << 20;
    if (hi - lo) / delta > (MAX_BINS - 1) as f64 {
        delta = (hi - lo) / (MAX_BINS - 1) as f64;
    }
    let nb = ((hi - lo) / delta).ceil() as usize + 1;
    let mut counts = vec![0.0; nb];
    for &x in xs {
        let s = (x - lo) / delta;
        let k = (s.floor() as usize).min(nb - 2);
        let f = s - k as f64;
        counts[k] += 1.0 - f;
        counts[k + 1] += f;
    }
    let half = (reach / delta).ceil() as usize;
    let klen = 2 * half + 1;
    let offsets: Vec<f64> = (0..klen).map(|i| (i as f64 - half as f64) * delta).collect();
    let k_gauss: Vec<f64> = offsets.iter().map(|&o| gauss(o, bw)).collect();
    let k_blur: Vec<f64> = offsets.par_iter().map(|&o| smoothed_blur(blur, o, bw)).collect();

    let size = (nb + klen).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let to_c = |v: &[f64]| {
        let mut out = vec![Complex::new(0.0, 0.0); size];
        for (o, &x) in out.iter_mut().zip(v) {
            o.re = x;
        }
        out
    };
    let mut fc = to_c(&counts);
    fwd.process(&mut fc);
    let n = xs.len() as f64;
    let convolve = |kernel: &[f64]| -> Vec<f64> {
        let mut fk = to_c(kernel);
        fwd.process(&mut fk);
        for (a, b) in fk.iter_mut().zip(&fc) {
            *a *= *b;
        }
        inv.process(&mut fk);
        // output bin b sits at linear index b + half
        (0..nb).map(|b| fk[b + half].re / (size as f64 * n)).collect()
    };
    let dens = convolve(&k_gauss);
    let num = convolve(&k_blur);
    let at = |grid: &[f64], x: f64| {
        let s = (x - lo) / delta;
        let k = (s.floor() as usize).min(nb - 2);
        let f = s - k as f64;
        grid[k] * (1.0 - f) + grid[k + 1] * f
    };
    xs.par_iter().map(|&x| (at(&num, x), at(&dens, x))).unzip()
}

/// Euler-Maruyama evolution of the McKean dynamics from a point mass at
/// `cfg.x0` over `[0, t]`.
pub fn run_particle_method(
    blur: &BlurringDensity,
    sigma: f64,
    t: f64,
    cfg: &ParticleConfig,
    seed: u64,
) -> Result<PathEnsemble> {
    cfg.validate()?;
    let epsilon = match blur.shape {
        BlurShape::Triangular { epsilon } => epsilon,
        _ => 0.0,
    };
    let params = ModelParams::new(sigma, epsilon, t)?;
    let dt = t / cfg.steps as f64;
    let sq_dt = dt.sqrt();
    let floor_bw = 0.25 * sigma * sq_dt;
    let mut xs = vec![cfg.x0; cfg.particles];
    let mut paths = cfg.record_paths.then(Vec::new);
    let mut floored = 0usize;
    for step in 0..cfg.steps {
        let bw = match cfg.bandwidth {
            BandwidthRule::Fixed(h) => h,
            BandwidthRule::Silverman => silverman(&xs).max(floor_bw),
        };
        let (num, dens) = estimate(&xs, blur, bw);
        floored += dens.iter().filter(|&&d| d < cfg.density_floor).count();
        let floor = cfg.density_floor;
        xs.par_chunks_mut(BLOCK)
            .zip(num.par_chunks(BLOCK).zip(dens.par_chunks(BLOCK)))
            .enumerate()
            .for_each(|(c, (chunk, (nc, dc)))| {
                let mut rng = block_rng(seed, ((step as u64) << 24) | c as u64);
                for ((x, &nm), &d) in chunk.iter_mut().zip(nc).zip(dc) {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let ratio = nm.max(0.0) / d.max(floor);
                    *x += sigma * ratio.sqrt() * sq_dt * z;
                }
            });
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::Simulation(format!("non-finite particle at step {step}")));
        }
        if let Some(p) = paths.as_mut() {
            p.push(xs.clone());
        }
    }
    Ok(PathEnsemble {
        samples: xs,
        paths,
        generator: Generator::Particle,
        seed,
        params,
        engine_version: VERSION.to_string(),
        floored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dirac_blur, triangular_blur};
    use crate::simulate::ensemble_stats;

    const DAY: f64 = 1.0 / 252.0;

    fn phi_cdf(z: f64) -> f64 {
        use statrs::distribution::{ContinuousCDF, Normal};
        Normal::new(0.0, 1.0).unwrap().cdf(z)
    }

    #[test]
    fn smoothed_triangle_matches_closed_form() {
        let eps = 0.01;
        let h = triangular_blur(eps).unwrap();
        let bw = 1.3e-3;
        for d in [-0.004, 0.0, 0.003, 0.007, 0.012] {
            let z1 = (d - eps) / bw;
            let z2 = d / bw;
            let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let closed = 2.0 / (eps * eps)
                * ((eps - d) * (phi_cdf(z2) - phi_cdf(z1)) + bw * (pdf(z1) - pdf(z2)));
            let quad = smoothed_blur(&h, d, bw);
            assert!((closed - quad).abs() < 1e-8 * closed.abs().max(1.0), "{d}: {closed} vs {quad}");
        }
    }

    #[test]
    fn dirac_blur_is_classical_diffusion() {
        let cfg = ParticleConfig::default();
        let e = run_particle_method(&dirac_blur(0.0), 0.2, DAY, &cfg, 1).unwrap();
        let st = ensemble_stats(&e, None).unwrap();
        let v = 0.04 * DAY;
        assert!((st.variance / v - 1.0).abs() < 0.05, "{}", st.variance / v);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let h = triangular_blur(0.01).unwrap();
        let cfg = ParticleConfig { particles: 2_000, steps: 10, ..Default::default() };
        let a = run_particle_method(&h, 0.2, DAY, &cfg, 9).unwrap();
        let b = run_particle_method(&h, 0.2, DAY, &cfg, 9).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn paths_are_recorded_on_request() {
        let cfg = ParticleConfig { particles: 200, steps: 5, record_paths: true, ..Default::default() };
        let e = run_particle_method(&dirac_blur(0.0), 0.2, DAY, &cfg, 2).unwrap();
        let p = e.paths.unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p[4], e.samples);
    }

    #[test]
    fn config_validation() {
        let bad = ParticleConfig { particles: 10, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ParticleConfig { bandwidth: BandwidthRule::Fixed(0.0), ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ParticleConfig { steps: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
