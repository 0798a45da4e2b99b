//! Cumulants of the kernel law and trapezoid moments of a tabulated kernel.
//!
//! The log-characteristic function `t m(p)` has Taylor coefficients
//! `kappa_k = sigma^2 t (-eps)^(k-2)` for `k >= 2` and no linear term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::Real;

use super::density::KernelDensity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantSet<T> {
    pub k2: T,
    pub k3: T,
    pub k4: T,
}

impl<T: Real> CumulantSet<T> {
    pub fn skewness(&self) -> T {
        self.k3 / self.k2.powf(T::lit(1.5))
    }

    pub fn excess_kurtosis(&self) -> T {
        self.k4 / (self.k2 * self.k2)
    }

    /// Central moments `(mu2, mu3, mu4)`.
    pub fn central_moments(&self) -> (T, T, T) {
        (self.k2, self.k3, self.k4 + T::lit(3.0) * self.k2 * self.k2)
    }
}

pub fn analytic_cumulants<T: Real>(params: &ModelParams<T>) -> CumulantSet<T> {
    let v = params.variance();
    CumulantSet {
        k2: v,
        k3: -params.epsilon * v,
        k4: params.epsilon * params.epsilon * v,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralMoments<T> {
    pub mean: T,
    /// `central[k]` is the `k`-th central moment, `central[0]` the total mass.
    pub central: Vec<T>,
}

impl<T: Real> CentralMoments<T> {
    pub fn variance(&self) -> T {
        self.central[2]
    }

    pub fn skewness(&self) -> T {
        self.central[3] / self.central[2].powf(T::lit(1.5))
    }

    pub fn excess_kurtosis(&self) -> T {
        self.central[4] / (self.central[2] * self.central[2]) - T::lit(3.0)
    }
}

/// Trapezoid central moments up to `max_order` (at most 6).
pub fn empirical_moments<T: Real>(kernel: &KernelDensity<T>, max_order: usize) -> Result<CentralMoments<T>> {
    if max_order > 6 {
        return Err(Error::Config(format!("max_order must be <= 6, got {max_order}")));
    }
    kernel.check_normalized()?;
    let w = kernel.masses();
    let xs = kernel.grid.nodes();
    let mass = w.iter().fold(T::zero(), |a, &v| a + v);
    let mean = xs.iter().zip(&w).fold(T::zero(), |a, (&x, &m)| a + x * m) / mass;
    let mut central = vec![T::zero(); max_order + 1];
    for (&x, &m) in xs.iter().zip(&w) {
        let d = x - mean;
        let mut pw = T::one();
        for c in central.iter_mut() {
            *c = *c + pw * m;
            pw = pw * d;
        }
    }
    for c in central.iter_mut().skip(1) {
        *c = *c / mass;
    }
    if central.len() > 1 {
        central[1] = T::zero();
    }
    Ok(CentralMoments { mean, central })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{auto_grid, compute_kernel};
    use approx::assert_relative_eq;

    const DAY: f64 = 1.0 / 252.0;

    fn params(eps: f64, t: f64) -> ModelParams<f64> {
        ModelParams::new(0.2, eps, t).unwrap()
    }

    #[test]
    fn gaussian_cumulants() {
        let c = analytic_cumulants(&params(0.0, DAY));
        assert_eq!(c.k3, 0.0);
        assert_eq!(c.k4, 0.0);
        assert_relative_eq!(c.k2, 0.04 / 252.0);
    }

    #[test]
    fn daily_skew_and_kurtosis() {
        let c = analytic_cumulants(&params(0.01, DAY));
        assert!((c.skewness() + 0.794).abs() < 1e-3);
        assert!((c.excess_kurtosis() - 0.63).abs() < 1e-3);
        let y = analytic_cumulants(&params(0.01, 1.0));
        assert!((y.skewness() + 0.05).abs() < 1e-12);
        assert!((y.excess_kurtosis() - 0.0025).abs() < 1e-12);
    }

    #[test]
    fn kernel_moments_match_cumulants() {
        for eps in [0.0, 0.005, -0.005, 0.01, -0.01] {
            let p = params(eps, DAY);
            let k = compute_kernel(&p, &auto_grid(&p)).unwrap();
            let m = empirical_moments(&k, 6).unwrap();
            let (mu2, mu3, mu4) = analytic_cumulants(&p).central_moments();
            assert!(m.mean.abs() <= 1e-6 * p.std_dev());
            assert_relative_eq!(m.central[2], mu2, max_relative = 1e-3);
            assert_relative_eq!(m.central[4], mu4, max_relative = 1e-3);
            if eps == 0.0 {
                assert!(m.central[3].abs() < 1e-12);
            } else {
                assert_relative_eq!(m.central[3], mu3, max_relative = 1e-3);
                assert_eq!(m.central[3].signum(), -eps.signum());
            }
        }
    }

    #[test]
    fn third_moment_value() {
        let p = params(0.01, DAY);
        let k = compute_kernel(&p, &auto_grid(&p)).unwrap();
        let m = empirical_moments(&k, 3).unwrap();
        assert!((m.central[3] + 1.587e-6).abs() < 1e-9);
    }

    #[test]
    fn skewness_flattens_like_inverse_root_time() {
        let short = params(0.01, DAY);
        let long = params(0.01, 1.0);
        let ks = compute_kernel(&short, &auto_grid(&short)).unwrap();
        let kl = compute_kernel(&long, &auto_grid(&long)).unwrap();
        let ss = empirical_moments(&ks, 4).unwrap().skewness();
        let sl = empirical_moments(&kl, 4).unwrap().skewness();
        let ratio = sl / ss;
        let want = DAY.sqrt();
        assert!((ratio / want - 1.0).abs() < 0.1, "{ratio} vs {want}");
    }

    #[test]
    fn rejects_bad_requests() {
        let p = params(0.0, DAY);
        let mut k = compute_kernel(&p, &auto_grid(&p)).unwrap();
        assert!(matches!(empirical_moments(&k, 7), Err(Error::Config(_))));
        for v in k.values.iter_mut() {
            *v *= 2.0;
        }
        assert!(matches!(empirical_moments(&k, 4), Err(Error::Validation(_))));
    }
}
