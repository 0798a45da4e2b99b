//! Sample statistics and Kolmogorov-Smirnov distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelDensity, KernelForm};

use super::ensemble::PathEnsemble;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Adjusted Fisher-Pearson skewness `G1` (zero for a constant sample).
    pub skewness: f64,
    /// Unbiased excess kurtosis `G2` (zero for a constant sample).
    pub excess_kurtosis: f64,
    pub ks: Option<f64>,
}

/// Moments of the sample plus, when `reference` is given, the one-sample KS
/// distance to it.
pub fn ensemble_stats(e: &PathEnsemble, reference: Option<&KernelDensity<f64>>) -> Result<EnsembleStats> {
    let xs = &e.samples;
    let n = xs.len();
    if n < 4 {
        return Err(Error::Statistics(format!("need at least 4 samples for kurtosis, got {n}")));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Statistics("ensemble contains non-finite samples".into()));
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        let g1 = m3 / m2.powf(1.5);
        let g2 = m4 / (m2 * m2) - 3.0;
        (
            (nf * (nf - 1.0)).sqrt() / (nf - 2.0) * g1,
            (nf - 1.0) / ((nf - 2.0) * (nf - 3.0)) * ((nf + 1.0) * g2 + 6.0),
        )
    } else {
        (0.0, 0.0)
    };
    Ok(EnsembleStats {
        n,
        mean,
        variance: m2 * nf / (nf - 1.0),
        skewness,
        excess_kurtosis,
        ks: reference.map(|k| ks_against_kernel(xs, k)),
    })
}

/// `sup_x |F_n(x) - F(x)|` against the kernel's distribution function.
///
/// Lattice kernels have jumps at their atoms; both one-sided limits are used
/// there.
pub fn ks_against_kernel(samples: &[f64], kernel: &KernelDensity<f64>) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let cdf = kernel.cdf();
    let half = kernel.grid.dx() / 2.0;
    let left = |x: f64| match kernel.form {
        KernelForm::Lattice => cdf(x - half),
        KernelForm::Density => cdf(x),
    };
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        d = d.max((j as f64 / n - cdf(x)).abs());
        d = d.max((left(x) - i as f64 / n).abs());
        i = j;
    }
    d
}

/// Two-sample KS distance, exact under ties.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{auto_grid, compute_kernel};
    use crate::model::ModelParams;
    use crate::simulate::{sample_oracle, Generator};

    fn ensemble(samples: Vec<f64>) -> PathEnsemble {
        PathEnsemble {
            samples,
            paths: None,
            generator: Generator::Oracle,
            seed: 0,
            params: ModelParams::new(0.2, 0.0, 1.0).unwrap(),
            engine_version: String::new(),
            floored: 0,
        }
    }

    #[test]
    fn unbiased_estimators_on_known_sample() {
        let s = ensemble(vec![1.0, 2.0, 3.0, 4.0, 10.0]);
        let st = ensemble_stats(&s, None).unwrap();
        assert_eq!(st.mean, 4.0);
        assert!((st.variance - 12.5).abs() < 1e-12);
        // reference values from the textbook G1 / G2 formulas
        assert!((st.skewness - 1.697_056_3).abs() < 1e-6, "{}", st.skewness);
        assert!((st.excess_kurtosis - 3.152).abs() < 1e-9, "{}", st.excess_kurtosis);
    }

    #[test]
    fn constant_ensemble() {
        let p = ModelParams::new(0.2, 0.0, 1.0 / 252.0).unwrap();
        let k = compute_kernel(&p, &auto_grid(&p)).unwrap();
        let st = ensemble_stats(&ensemble(vec![1.0; 10]), Some(&k)).unwrap();
        assert_eq!(st.variance, 0.0);
        assert!(st.ks.unwrap() > 0.999);
        let mid = ensemble_stats(&ensemble(vec![0.0; 10]), Some(&k)).unwrap();
        assert!((mid.ks.unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(ensemble_stats(&ensemble(vec![1.0, 2.0, 3.0]), None), Err(Error::Statistics(_))));
    }

    #[test]
    fn two_sample_ties() {
        assert_eq!(ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
        assert!((ks_two_sample(&[0.0, 1.0], &[1.0, 1.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn oracle_matches_kernel() {
        for eps in [0.0, 0.01] {
            let p = ModelParams::new(0.2, eps, 1.0 / 252.0).unwrap();
            let k = compute_kernel(&p, &auto_grid(&p)).unwrap();
            let e = sample_oracle(&p, 1_000_000, 17).unwrap();
            let st = ensemble_stats(&e, Some(&k)).unwrap();
            assert!(st.ks.unwrap() <= 0.005, "eps {eps}: {}", st.ks.unwrap());
        }
    }
}
