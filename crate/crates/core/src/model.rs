//! Model parameters and the analytic symbols of the translation model.
//!
//! With `u = eps * p` the characteristic exponent is
//!
//! ```text
//! m(p) = sigma^2 / eps^2 * (exp(-i u) + i u - 1)
//!      = sigma^2 * sum_{k>=2} eps^(k-2) (-i p)^k / k!
//! ```
//!
//! and the law of the kernel at horizon `t` satisfies `E[exp(i p X)] = exp(t m(p))`.
//! The Hamiltonian dispersion is `omega(p) = i sigma^2 (exp(eps p) - 1 - eps p) / eps^2`,
//! related to `m` by `m(p) = -i omega(-i p)`.
//!
//! The Legendre pair uses `h(p) = p xdot - sigma^2 (exp(eps p) - 1 - eps p) / eps^2`,
//! stationary at `p0 = ln(1 + u) / eps` with `u = eps xdot / sigma^2`, and
//! `L(xdot) = h(p0) = sigma^2 / eps^2 ((1 + u) ln(1 + u) - u)`.
//!
//! Every closed form switches to its power series for `|u| < 0.1`, so `eps = 0`
//! is exact rather than a special case.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

const SERIES_SWITCH: f64 = 0.1;
const SERIES_TERMS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub sigma: T,
    pub epsilon: T,
    pub horizon: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(sigma: T, epsilon: T, horizon: T) -> Result<Self> {
        if !(sigma.is_finite() && sigma > T::zero()) {
            return Err(Error::Config(format!("sigma must be positive and finite, got {sigma}")));
        }
        if !(horizon.is_finite() && horizon > T::zero()) {
            return Err(Error::Config(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if !epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be finite, got {epsilon}")));
        }
        Ok(Self { sigma, epsilon, horizon })
    }

    pub fn with_horizon(&self, horizon: T) -> Result<Self> {
        Self::new(self.sigma, self.epsilon, horizon)
    }

    pub fn with_epsilon(&self, epsilon: T) -> Result<Self> {
        Self::new(self.sigma, epsilon, self.horizon)
    }

    /// `|eps| / (sigma^2 t)`.
    pub fn quantumness(&self) -> T {
        self.epsilon.abs() / (self.sigma * self.sigma * self.horizon)
    }

    /// Jump intensity `sigma^2 / eps^2`; infinite for `eps = 0`.
    pub fn jump_intensity(&self) -> T {
        self.sigma * self.sigma / (self.epsilon * self.epsilon)
    }

    /// Expected jump count `sigma^2 t / eps^2` over the horizon.
    pub fn jump_count(&self) -> T {
        self.jump_intensity() * self.horizon
    }

    pub fn variance(&self) -> T {
        self.sigma * self.sigma * self.horizon
    }

    pub fn std_dev(&self) -> T {
        self.variance().sqrt()
    }
}

/// How the infinite-order symbol is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    ClosedForm,
    /// Keep the first `K` orders of the series (orders `2..=K` for the
    /// exponent, `K` terms for the Lagrangian).
    Series(usize),
}

impl Truncation {
    pub fn validate(self) -> Result<Self> {
        match self {
            Truncation::Series(k) if k < 2 => Err(Error::Config(format!(
                "series truncation needs K >= 2, got {k}"
            ))),
            t => Ok(t),
        }
    }
}

fn check_finite<T: Real>(name: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {v}")))
    }
}

/// `(exp(-i u) + i u - 1) / u^2`, equal to `-1/2` at `u = 0`.
pub(crate) fn unit_exponent<T: Real>(u: T) -> Complex<T> {
    if u.abs() < T::lit(SERIES_SWITCH) {
        // sum_j (-i)^(j+2) u^j / (j+2)!
        let mut re = T::zero();
        let mut im = T::zero();
        let mut coeff = T::lit(0.5);
        let mut upow = T::one();
        for j in 0..SERIES_TERMS {
            match j % 4 {
                0 => re = re - coeff * upow,
                1 => im = im + coeff * upow,
                2 => re = re + coeff * upow,
                _ => im = im - coeff * upow,
            }
            upow = upow * u;
            coeff = coeff / T::from_usize_lossy(j + 3);
        }
        Complex::new(re, im)
    } else {
        let half = u / T::lit(2.0);
        let sinc = half.sin() / half;
        let re = -T::lit(0.5) * sinc * sinc;
        let im = (u - u.sin()) / (u * u);
        Complex::new(re, im)
    }
}

/// `(exp(v) - 1 - v) / v^2`, equal to `1/2` at `v = 0`.
pub(crate) fn unit_dispersion<T: Real>(v: T) -> T {
    if v.abs() < T::lit(SERIES_SWITCH) {
        let mut sum = T::zero();
        let mut coeff = T::lit(0.5);
        let mut vpow = T::one();
        for j in 0..SERIES_TERMS {
            sum = sum + coeff * vpow;
            vpow = vpow * v;
            coeff = coeff / T::from_usize_lossy(j + 3);
        }
        sum
    } else {
        (v.exp_m1() - v) / (v * v)
    }
}

/// `expm1(v) / v`, equal to `1` at `v = 0`.
fn unit_expm1<T: Real>(v: T) -> T {
    if v == T::zero() {
        T::one()
    } else {
        v.exp_m1() / v
    }
}

/// The forward-equation multiplier `m(p)`.
pub fn characteristic_exponent<T: Real>(
    p: T,
    params: &ModelParams<T>,
    trunc: Truncation,
) -> Result<Complex<T>> {
    check_finite("wavenumber", p)?;
    let s2 = params.sigma * params.sigma;
    match trunc.validate()? {
        Truncation::ClosedForm => Ok(unit_exponent(params.epsilon * p) * (s2 * p * p)),
        Truncation::Series(k_max) => {
            // term_k = sigma^2 eps^(k-2) (-i p)^k / k!
            let mut term = Complex::new(-s2 * p * p / T::lit(2.0), T::zero());
            let step = Complex::new(T::zero(), -params.epsilon * p);
            let mut sum = term;
            for k in 2..k_max {
                term = term * step / T::from_usize_lossy(k + 1);
                sum = sum + term;
            }
            Ok(sum)
        }
    }
}

/// Hamiltonian dispersion `omega(p)` for real momentum.
pub fn dispersion_omega<T: Real>(p: T, params: &ModelParams<T>) -> Result<Complex<T>> {
    check_finite("wavenumber", p)?;
    let s2 = params.sigma * params.sigma;
    let v = params.epsilon * p;
    Ok(Complex::new(T::zero(), s2 * p * p * unit_dispersion(v)))
}

/// Hamiltonian dispersion continued to complex momentum.
pub fn dispersion_omega_complex<T: Real>(p: Complex<T>, params: &ModelParams<T>) -> Result<Complex<T>> {
    check_finite("wavenumber (re)", p.re)?;
    check_finite("wavenumber (im)", p.im)?;
    let s2 = params.sigma * params.sigma;
    let v = p * params.epsilon;
    let e = if v.norm() < T::lit(SERIES_SWITCH) {
        let mut sum = Complex::new(T::zero(), T::zero());
        let mut coeff = T::lit(0.5);
        let mut vpow = Complex::new(T::one(), T::zero());
        for j in 0..SERIES_TERMS {
            sum = sum + vpow * coeff;
            vpow = vpow * v;
            coeff = coeff / T::from_usize_lossy(j + 3);
        }
        sum
    } else {
        (v.exp() - T::one() - v) / (v * v)
    };
    Ok(Complex::<T>::i() * e * p * p * s2)
}

/// `-i omega(-i p)`: the Schrodinger exponent after the double Wick rotation.
pub fn wick_rotated_exponent<T: Real>(p: T, params: &ModelParams<T>) -> Result<Complex<T>> {
    let rotated = Complex::new(T::zero(), -p);
    Ok(-Complex::<T>::i() * dispersion_omega_complex(rotated, params)?)
}

fn scaled_velocity<T: Real>(xdot: T, params: &ModelParams<T>) -> T {
    params.epsilon * xdot / (params.sigma * params.sigma)
}

/// `h(p) = p xdot - sigma^2 (exp(eps p) - 1 - eps p) / eps^2`.
pub fn momentum_hamiltonian<T: Real>(p: T, xdot: T, params: &ModelParams<T>) -> Result<T> {
    check_finite("momentum", p)?;
    check_finite("velocity", xdot)?;
    let s2 = params.sigma * params.sigma;
    Ok(p * xdot - s2 * p * p * unit_dispersion(params.epsilon * p))
}

/// `h'(p) = xdot - sigma^2 (exp(eps p) - 1) / eps`.
pub fn momentum_hamiltonian_derivative<T: Real>(p: T, xdot: T, params: &ModelParams<T>) -> Result<T> {
    check_finite("momentum", p)?;
    check_finite("velocity", xdot)?;
    let s2 = params.sigma * params.sigma;
    Ok(xdot - s2 * p * unit_expm1(params.epsilon * p))
}

/// Saddle point `p0 = ln(1 + u) / eps`.
pub fn stationary_momentum<T: Real>(xdot: T, params: &ModelParams<T>) -> Result<T> {
    check_finite("velocity", xdot)?;
    let u = scaled_velocity(xdot, params);
    if u <= -T::one() {
        return Err(Error::Domain(format!(
            "logarithm branch: eps*xdot/sigma^2 = {u} <= -1"
        )));
    }
    let s2 = params.sigma * params.sigma;
    // ln(1+u)/u
    let ratio = if u.abs() < T::lit(SERIES_SWITCH) {
        let mut sum = T::zero();
        let mut upow = T::one();
        for k in 0..2 * SERIES_TERMS {
            sum = sum + upow / T::from_usize_lossy(k + 1);
            upow = -upow * u;
        }
        sum
    } else {
        u.ln_1p() / u
    };
    Ok(xdot / s2 * ratio)
}

/// The action density `L(xdot)`.
pub fn lagrangian<T: Real>(xdot: T, params: &ModelParams<T>, trunc: Truncation) -> Result<T> {
    check_finite("velocity", xdot)?;
    let u = scaled_velocity(xdot, params);
    let scale = xdot * xdot / (params.sigma * params.sigma);
    match trunc.validate()? {
        Truncation::Series(k_max) => {
            if u.abs() >= T::one() {
                return Err(Error::Convergence(format!(
                    "|eps*xdot/sigma^2| = {} >= 1",
                    u.abs()
                )));
            }
            let mut sum = T::zero();
            let mut upow = T::one();
            for k in 0..k_max {
                let kk = T::from_usize_lossy(k);
                sum = sum + upow / ((kk + T::one()) * (kk + T::lit(2.0)));
                upow = -upow * u;
            }
            Ok(scale * sum)
        }
        Truncation::ClosedForm => {
            if u <= -T::one() {
                return Err(Error::Domain(format!(
                    "logarithm branch: eps*xdot/sigma^2 = {u} <= -1"
                )));
            }
            let f = if u.abs() < T::lit(SERIES_SWITCH) {
                let mut sum = T::zero();
                let mut upow = T::one();
                for k in 0..2 * SERIES_TERMS {
                    let kk = T::from_usize_lossy(k);
                    sum = sum + upow / ((kk + T::one()) * (kk + T::lit(2.0)));
                    upow = -upow * u;
                }
                sum
            } else {
                ((T::one() + u) * u.ln_1p() - u) / (u * u)
            };
            Ok(scale * f)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(eps: f64) -> ModelParams<f64> {
        ModelParams::new(0.2, eps, 1.0 / 252.0).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.2, 0.0, -1.0).is_err());
        assert!(ModelParams::new(0.2, f64::NAN, 1.0).is_err());
        assert!(Truncation::Series(1).validate().is_err());
    }

    #[test]
    fn quantumness_ratio() {
        let p = ModelParams::new(0.2, 0.01, 1.0).unwrap();
        assert_abs_diff_eq!(p.quantumness(), 0.25, epsilon = 1e-15);
        assert!(params(0.0).quantumness() == 0.0);
    }

    #[test]
    fn exponent_trivial_cases() {
        let m = characteristic_exponent(0.0, &params(0.01), Truncation::ClosedForm).unwrap();
        assert_eq!(m, Complex::new(0.0, 0.0));
        let m = characteristic_exponent(10.0, &params(0.0), Truncation::ClosedForm).unwrap();
        assert_eq!(m.re, -(0.2f64 * 0.2 * 10.0 * 10.0) / 2.0);
        assert_abs_diff_eq!(m.re, -2.0, epsilon = 1e-15);
        assert_eq!(m.im, 0.0);
        assert!(characteristic_exponent(f64::INFINITY, &params(0.0), Truncation::ClosedForm).is_err());
    }

    #[test]
    fn exponent_matches_direct_formula() {
        let prm = params(0.01);
        for &p in &[15.0, 50.0, 200.0, -377.0] {
            let u: f64 = 0.01 * p;
            let direct = Complex::new(u.cos() - 1.0, u - u.sin()) * (0.04 / 1e-4);
            let m = characteristic_exponent(p, &prm, Truncation::ClosedForm).unwrap();
            assert_abs_diff_eq!(m.re, direct.re, epsilon = 1e-9);
            assert_abs_diff_eq!(m.im, direct.im, epsilon = 1e-9);
        }
    }

    #[test]
    fn series_k12_matches_closed_at_p50() {
        let prm = params(0.01);
        let a = characteristic_exponent(50.0, &prm, Truncation::ClosedForm).unwrap();
        let b = characteristic_exponent(50.0, &prm, Truncation::Series(12)).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn series_k2_is_gaussian() {
        let m = characteristic_exponent(30.0, &params(0.01), Truncation::Series(2)).unwrap();
        assert_eq!(m, Complex::new(-(0.2f64 * 0.2) * 30.0 * 30.0 / 2.0, 0.0));
    }

    #[test]
    fn series_branch_is_continuous() {
        let prm = params(0.01);
        let below = characteristic_exponent(9.999_999, &prm, Truncation::ClosedForm).unwrap();
        let above = characteristic_exponent(10.000_001, &prm, Truncation::ClosedForm).unwrap();
        assert!((below - above).norm() < 1e-5);
    }

    #[test]
    fn single_precision_agrees() {
        let p32 = ModelParams::<f32>::new(0.2, 0.01, 1.0 / 252.0).unwrap();
        let m32 = characteristic_exponent(50.0f32, &p32, Truncation::ClosedForm).unwrap();
        let m64 = characteristic_exponent(50.0, &params(0.01), Truncation::ClosedForm).unwrap();
        assert!((m32.re as f64 - m64.re).abs() < 1e-4);
        assert!((m32.im as f64 - m64.im).abs() < 1e-4);
    }

    #[test]
    fn dispersion_trivial_cases() {
        let o = dispersion_omega(0.0, &params(0.01)).unwrap();
        assert_eq!(o, Complex::new(0.0, 0.0));
        let unit = ModelParams::new(1.0, 0.0, 1.0).unwrap();
        let o = dispersion_omega(1.0, &unit).unwrap();
        assert_eq!(o, Complex::new(0.0, 0.5));
    }

    #[test]
    fn dispersion_complex_matches_real() {
        let prm = params(0.01);
        for &p in &[-80.0, -3.0, 0.5, 40.0, 150.0] {
            let a = dispersion_omega(p, &prm).unwrap();
            let b = dispersion_omega_complex(Complex::new(p, 0.0), &prm).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn wick_rotation_consistency() {
        let prm = params(0.01);
        let mut p = -100.0;
        while p <= 100.0 {
            let m = characteristic_exponent(p, &prm, Truncation::ClosedForm).unwrap();
            let w = wick_rotated_exponent(p, &prm).unwrap();
            assert!((m - w).norm() < 1e-10, "p = {p}: {m} vs {w}");
            p += 0.25;
        }
    }

    #[test]
    fn lagrangian_trivial_cases() {
        let prm = params(0.01);
        assert_eq!(lagrangian(0.0, &prm, Truncation::ClosedForm).unwrap(), 0.0);
        assert_eq!(lagrangian(0.0, &prm, Truncation::Series(8)).unwrap(), 0.0);
        let l = lagrangian(0.1, &params(0.0), Truncation::ClosedForm).unwrap();
        assert_abs_diff_eq!(l, 0.125, epsilon = 1e-15);
    }

    #[test]
    fn lagrangian_domain_errors() {
        let prm = params(0.01);
        // u = -1.25
        assert!(matches!(lagrangian(-5.0, &prm, Truncation::ClosedForm), Err(Error::Domain(_))));
        assert!(matches!(
            lagrangian(5.0, &prm, Truncation::Series(8)),
            Err(Error::Convergence(_))
        ));
        assert!(stationary_momentum(-5.0, &prm).is_err());
    }

    #[test]
    fn lagrangian_series_tail_at_k8() {
        // The first omitted term bounds the truncation error of an alternating series.
        let prm = params(0.01);
        let closed = lagrangian(1.0, &prm, Truncation::ClosedForm).unwrap();
        let k8 = lagrangian(1.0, &prm, Truncation::Series(8)).unwrap();
        let first_omitted = 25.0 * 0.25f64.powi(8) / 90.0;
        assert!((closed - k8).abs() <= first_omitted);
        assert!((closed - k8).abs() >= 0.5 * first_omitted);
        let k40 = lagrangian(1.0, &prm, Truncation::Series(40)).unwrap();
        assert_abs_diff_eq!(closed, k40, epsilon = 1e-12);
    }

    #[test]
    fn stationary_momentum_values() {
        assert_eq!(stationary_momentum(0.0, &params(0.01)).unwrap(), 0.0);
        assert_abs_diff_eq!(stationary_momentum(0.4, &params(0.0)).unwrap(), 10.0, epsilon = 1e-14);
        // ln(1.1) = 0.0953101798043248600439521232807650922206...
        let want = 0.095_310_179_804_324_86 / 0.01;
        assert_abs_diff_eq!(stationary_momentum(0.4, &params(0.01)).unwrap(), want, epsilon = 1e-12);
        assert_abs_diff_eq!(want, 9.53102, epsilon = 1e-5);
    }

    #[test]
    fn lagrangian_matches_exact_rational_series() {
        use num_bigint::BigInt;
        use num_rational::BigRational;
        // u = 1/10 exactly at sigma = 1/5, eps = 1/100, xdot = 2/5
        let u = BigRational::new(BigInt::from(1), BigInt::from(10));
        let mut sum = BigRational::from_integer(BigInt::from(0));
        let mut upow = BigRational::from_integer(BigInt::from(1));
        for k in 0..60i64 {
            sum += &upow / BigRational::from_integer(BigInt::from((k + 1) * (k + 2)));
            upow = -upow * &u;
        }
        let scale = BigRational::from_integer(BigInt::from(4)); // xdot^2 / sigma^2
        let exact = sum * scale;
        let exact_f = exact.numer().to_string().parse::<f64>().unwrap()
            / exact.denom().to_string().parse::<f64>().unwrap();
        let l = lagrangian(0.4, &params(0.01), Truncation::ClosedForm).unwrap();
        assert_abs_diff_eq!(l, exact_f, epsilon = 1e-13);
    }

    proptest! {
        #[test]
        fn closed_exponent_is_dissipative(p in -1e4f64..1e4, eps in -0.05f64..0.05) {
            let m = characteristic_exponent(p, &params(eps), Truncation::ClosedForm).unwrap();
            prop_assert!(m.re <= 0.0);
            prop_assert!(m.re.is_finite() && m.im.is_finite());
        }

        #[test]
        fn exponent_parity(p in -500f64..500.0, eps in -0.05f64..0.05) {
            let a = characteristic_exponent(p, &params(eps), Truncation::ClosedForm).unwrap();
            let b = characteristic_exponent(-p, &params(-eps), Truncation::ClosedForm).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }

        #[test]
        fn legendre_duality(s in -0.5f64..0.5, eps in prop::sample::select(vec![-0.01, -0.005, 0.005, 0.01])) {
            let prm = params(eps);
            let xdot = s * 0.04 / eps;
            let p0 = stationary_momentum(xdot, &prm).unwrap();
            let l = lagrangian(xdot, &prm, Truncation::ClosedForm).unwrap();
            let h = momentum_hamiltonian(p0, xdot, &prm).unwrap();
            prop_assert!((l - h).abs() <= 1e-9 * l.abs().max(1.0));
            prop_assert!(momentum_hamiltonian_derivative(p0, xdot, &prm).unwrap().abs() <= 1e-9);
        }

        #[test]
        fn lagrangian_parity(xdot in -1.5f64..1.5, eps in -0.02f64..0.02) {
            let a = lagrangian(xdot, &params(-eps), Truncation::ClosedForm).unwrap();
            let b = lagrangian(-xdot, &params(eps), Truncation::ClosedForm).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn truncation_error_shrinks(p in 1.0f64..150.0) {
            let prm = params(0.01);
            let closed = characteristic_exponent(p, &prm, Truncation::ClosedForm).unwrap();
            let mut prev = f64::INFINITY;
            for k in (2..=16).step_by(2) {
                let e = (characteristic_exponent(p, &prm, Truncation::Series(k)).unwrap() - closed).norm();
                prop_assert!(e <= prev * (1.0 + 1e-9) + 1e-12);
                prev = e;
            }
        }
    }
}
