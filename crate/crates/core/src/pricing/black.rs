//! Bachelier and Black (zero rate) formulas and their inversion.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

use super::option::{OptionSide, OptionSpec, VolConvention};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Price under the given convention with forward `spot` (zero rate).
pub fn model_price(spec: &OptionSpec, vol: f64, convention: VolConvention) -> f64 {
    let n = std_normal();
    let (f, k, t) = (spec.spot, spec.strike, spec.maturity);
    let intrinsic = match spec.side {
        OptionSide::Call => (f - k).max(0.0),
        OptionSide::Put => (k - f).max(0.0),
    };
    if vol <= 0.0 {
        return intrinsic;
    }
    let sd = vol * t.sqrt();
    match convention {
        VolConvention::Normal => {
            let d = (f - k) / sd;
            let call = (f - k) * n.cdf(d) + sd * n.pdf(d);
            match spec.side {
                OptionSide::Call => call,
                OptionSide::Put => call - (f - k),
            }
        }
        VolConvention::Lognormal => {
            let d1 = ((f / k).ln() + 0.5 * sd * sd) / sd;
            let d2 = d1 - sd;
            match spec.side {
                OptionSide::Call => f * n.cdf(d1) - k * n.cdf(d2),
                OptionSide::Put => k * n.cdf(-d2) - f * n.cdf(-d1),
            }
        }
    }
}

fn vega(spec: &OptionSpec, vol: f64, convention: VolConvention) -> f64 {
    let n = std_normal();
    let (f, k, t) = (spec.spot, spec.strike, spec.maturity);
    let sd = vol * t.sqrt();
    match convention {
        VolConvention::Normal => t.sqrt() * n.pdf((f - k) / sd),
        VolConvention::Lognormal => {
            let d1 = ((f / k).ln() + 0.5 * sd * sd) / sd;
            f * t.sqrt() * n.pdf(d1)
        }
    }
}

/// `(lower, upper)` no-arbitrage bounds for the convention.
pub fn price_bounds(spec: &OptionSpec, convention: VolConvention) -> (f64, f64) {
    let (f, k) = (spec.spot, spec.strike);
    match (spec.side, convention) {
        (OptionSide::Call, VolConvention::Normal) => ((f - k).max(0.0), f64::INFINITY),
        (OptionSide::Put, VolConvention::Normal) => ((k - f).max(0.0), f64::INFINITY),
        (OptionSide::Call, VolConvention::Lognormal) => ((f - k).max(0.0), f),
        (OptionSide::Put, VolConvention::Lognormal) => ((k - f).max(0.0), k),
    }
}

/// Volatility reproducing `price`, by Newton steps kept inside a shrinking
/// bisection bracket.
pub fn implied_vol(price: f64, spec: &OptionSpec, convention: VolConvention) -> Result<f64> {
    spec.validate()?;
    let (lower, upper) = price_bounds(spec, convention);
    let tol = 1e-12 * spec.spot;
    if !price.is_finite() || price < lower - tol || price >= upper {
        return Err(Error::ArbitrageBound { price, lower, upper });
    }
    if price <= lower + tol {
        return Ok(0.0);
    }
    let scale = match convention {
        VolConvention::Normal => spec.spot.max(spec.strike),
        VolConvention::Lognormal => 1.0,
    };
    let mut lo = 0.0;
    let mut hi = 0.5 * scale;
    while model_price(spec, hi, convention) < price {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 * scale {
            return Err(Error::ArbitrageBound { price, lower, upper });
        }
    }
    let mut vol = 0.5 * (lo + hi);
    for _ in 0..200 {
        let diff = model_price(spec, vol, convention) - price;
        if diff > 0.0 {
            hi = vol;
        } else {
            lo = vol;
        }
        if diff.abs() <= 1e-15 * spec.spot || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let v = vega(spec, vol, convention);
        let newton = vol - diff / v;
        vol = if v > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Ok(vol)
}
