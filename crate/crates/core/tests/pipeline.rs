//! Cross-module checks through the public API.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use qbs_kernel::geometry::{dirac_blur, MetricProfile};
use qbs_kernel::pricing::pricing_kernel;
use qbs_kernel::simulate::ks_against_kernel;
use qbs_kernel::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DAY: f64 = 1.0 / DAYS_PER_YEAR;

#[test]
fn kramers_moyal_symbol_is_the_truncated_exponent() {
    let (sigma, eps) = (0.2, 0.01);
    let c = kramers_moyal_coefficients(&triangular_blur(eps).unwrap(), &MetricProfile::flat(), sigma, 10, &[0.0])
        .unwrap();
    let params = Params::new(sigma, eps, DAY).unwrap();
    for p in [1.0, 25.0, 80.0, 200.0] {
        let ip = Complex64::new(0.0, p);
        let symbol: Complex64 = (2..=10).map(|k| c.c(k, 0) * ip.powu(k as u32)).sum();
        let series = characteristic_exponent(p, &params, Truncation::Series(10)).unwrap();
        assert!((symbol - series).norm() <= 1e-10 * series.norm(), "p {p}: {symbol} vs {series}");
    }
}

#[test]
fn kernel_prices_agree_with_monte_carlo() {
    for (eps, t) in [(0.01, DAY), (0.01, 1.0 / 52.0), (-0.005, 1.0 / 12.0)] {
        let p = Params::new(0.2, eps, t).unwrap();
        let kernel = pricing_kernel(&p).unwrap();
        let e = sample_oracle(&p, 400_000, 17).unwrap();
        let n = e.samples.len() as f64;
        for offset in [-1.5, -0.5, 0.0, 0.5, 1.5] {
            let strike = 1.0 + offset * p.std_dev();
            let side = if offset < 0.0 { OptionSide::Put } else { OptionSide::Call };
            let spec = OptionSpec { spot: 1.0, strike, maturity: t, side };
            let exact = price_with_kernel(&spec, &kernel).unwrap();
            let pay: Vec<f64> = e.samples.iter().map(|x| spec.payoff(1.0 + x)).collect();
            let mean = pay.iter().sum::<f64>() / n;
            let se = (pay.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
            assert!((mean - exact).abs() <= 4.0 * se + 1e-15, "eps {eps} t {t} offset {offset}: {mean} vs {exact} (se {se})");
        }
    }
}

#[test]
fn oracle_matches_continuous_regime_kernel() {
    // the law stays on a lattice of spacing epsilon; the continuous-regime
    // kernel is its envelope, so spread each sample over its lattice cell
    let p = Params::new(0.2, 0.01, 1.0).unwrap();
    let k = compute_kernel(&p, &auto_grid(&p)).unwrap();
    assert_eq!(k.form, KernelForm::Density);
    let n = 200_000;
    let e = sample_oracle(&p, n, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spread: Vec<f64> = e.samples.iter().map(|x| x + p.epsilon * (rng.random::<f64>() - 0.5)).collect();
    let ks = ks_against_kernel(&spread, &k);
    assert!(ks <= 1.63 / (n as f64).sqrt(), "{ks}");
    assert!(ks_against_kernel(&e.samples, &k) > 0.005);
}

#[test]
fn skew_slope_follows_edgeworth() {
    // the Bachelier smile of a weakly skewed law has slope sigma * skewness / 6
    // per standard deviation of strike
    let p = Params::new(0.2, 0.01, 1.0).unwrap();
    let mats = [1.0 / 12.0, 1.0];
    let s = build_smile(&p, &mats, &[-1.0, -0.5, 0.0, 0.5, 1.0]).unwrap();
    for sp in skew_term_structure(&s).unwrap() {
        let c = analytic_cumulants(&p.with_horizon(sp.maturity).unwrap());
        let want = p.sigma * c.skewness() / 6.0;
        assert!((sp.slope_per_stdev / want - 1.0).abs() < 0.02, "t {}: {} vs {want}", sp.maturity, sp.slope_per_stdev);
    }
}

#[test]
fn single_precision_kernel_tracks_double() {
    let p64 = Params::new(0.2, 0.0, DAY).unwrap();
    let p32 = ModelParams::<f32>::new(0.2, 0.0, DAY as f32).unwrap();
    let k64 = compute_kernel(&p64, &auto_grid(&p64)).unwrap();
    let k32 = compute_kernel(&p32, &auto_grid(&p32)).unwrap();
    assert_eq!(k32.grid.n, k64.grid.n);
    let peak = k64.peak();
    for (a, b) in k32.values.iter().zip(&k64.values) {
        assert!((*a as f64 - b).abs() <= 1e-5 * peak);
    }
}

#[test]
fn exact_moments_match_quadrature() {
    let eps = BigRational::new(BigInt::from(1), BigInt::from(100));
    let exact = lemma1_moments(eps, 8);
    let h = triangular_blur(0.01).unwrap();
    for (i, v) in exact.values.iter().enumerate() {
        let num: f64 = v.numer().to_string().parse().unwrap();
        let den: f64 = v.denom().to_string().parse().unwrap();
        let q = h.moment(i);
        assert!((q - num / den).abs() <= 1e-14 * (num / den), "order {i}");
    }
    assert!(exact.recurrence_residuals().iter().all(|r| *r == BigRational::from_integer(BigInt::from(0))));
}

#[test]
fn classical_particles_reproduce_the_gaussian_kernel() {
    let p = Params::new(0.2, 0.0, DAY).unwrap();
    let k = compute_kernel(&p, &auto_grid(&p)).unwrap();
    let cfg = ParticleConfig { particles: 20_000, ..ParticleConfig::default() };
    let e = run_particle_method(&dirac_blur(0.0), 0.2, DAY, &cfg, 4).unwrap();
    let stats = ensemble_stats(&e, Some(&k)).unwrap();
    assert!(stats.ks.unwrap() < 0.02, "{stats:?}");
    assert!((stats.variance / p.variance() - 1.0).abs() < 0.05);
}

#[test]
fn composed_kernel_feeds_pricing() {
    let half = Params::new(0.2, 0.0, 0.5).unwrap();
    let full = half.with_horizon(1.0).unwrap();
    let g = auto_grid_with_resolution(&full, 64);
    let kh = compute_kernel(&half, &g).unwrap();
    let composed = compose(&kh, &kh).unwrap();
    let spec = OptionSpec { spot: 1.0, strike: 1.0, maturity: 1.0, side: OptionSide::Call };
    let price = price_with_kernel(&spec, &composed).unwrap();
    let vol = implied_vol(price, &spec, VolConvention::Normal).unwrap();
    assert!((vol - 0.2).abs() < 1e-6, "{vol}");
}
