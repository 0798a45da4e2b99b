//! Implied-volatility surfaces and the ATM skew term structure.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_header, fmt17};
use crate::model::ModelParams;

use super::black::implied_vol;
use super::option::{OptionSide, OptionSpec, VolConvention};
use super::price::{price_with_kernel, pricing_kernel};

/// Largest strike offset accepted, in standard deviations.
pub const MAX_OFFSET: f64 = 4.0;
/// Offsets used by the skew slope fit, in standard deviations.
pub const SKEW_WINDOW: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmileSurface {
    pub spot: f64,
    pub params: ModelParams<f64>,
    pub convention: VolConvention,
    pub maturities: Vec<f64>,
    /// Strike offsets in units of `sigma sqrt(T)`.
    pub offsets: Vec<f64>,
    /// `strikes[m][j] = spot + offsets[j] sigma sqrt(maturities[m])`.
    pub strikes: Vec<Vec<f64>>,
    pub vols: Vec<Vec<f64>>,
}

impl SmileSurface {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{}",
            csv_header(
                &[
                    ("sigma", self.params.sigma),
                    ("epsilon", self.params.epsilon),
                    ("spot", self.spot),
                ],
                &[("convention", format!("{:?}", self.convention).to_lowercase())],
            )
        )?;
        writeln!(w, "maturity,strike,vol")?;
        for (m, &t) in self.maturities.iter().enumerate() {
            for (k, v) in self.strikes[m].iter().zip(&self.vols[m]) {
                writeln!(w, "{},{},{}", fmt17(t), fmt17(*k), fmt17(*v))?;
            }
        }
        Ok(())
    }
}

/// Normal-convention smile at spot 1.
pub fn build_smile(params: &ModelParams<f64>, maturities: &[f64], offsets: &[f64]) -> Result<SmileSurface> {
    build_smile_with(params, 1.0, maturities, offsets, VolConvention::Normal)
}

/// Smile from out-of-the-money prices (puts below spot, calls at and above).
pub fn build_smile_with(
    params: &ModelParams<f64>,
    spot: f64,
    maturities: &[f64],
    offsets: &[f64],
    convention: VolConvention,
) -> Result<SmileSurface> {
    if maturities.is_empty() || offsets.is_empty() {
        return Err(Error::Config("smile axes must be nonempty".into()));
    }
    if maturities.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("maturities must be strictly increasing".into()));
    }
    if let Some(o) = offsets.iter().find(|o| !(o.abs() <= MAX_OFFSET)) {
        return Err(Error::Config(format!("strike offset {o} outside +-{MAX_OFFSET} standard deviations")));
    }
    let rows: Vec<(Vec<f64>, Vec<f64>)> = maturities
        .par_iter()
        .map(|&t| -> Result<(Vec<f64>, Vec<f64>)> {
            let p = params.with_horizon(t)?;
            let kernel = pricing_kernel(&p)?;
            let sd = p.std_dev();
            let strikes: Vec<f64> = offsets.iter().map(|o| spot + o * sd).collect();
            let vols = strikes
                .par_iter()
                .map(|&k| {
                    let side = if k < spot { OptionSide::Put } else { OptionSide::Call };
                    let spec = OptionSpec { spot, strike: k, maturity: t, side };
                    price_with_kernel(&spec, &kernel)
                        .and_then(|price| implied_vol(price, &spec, convention))
                        .map_err(|e| Error::AtPoint { maturity: t, strike: k, source: Box::new(e) })
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((strikes, vols))
        })
        .collect::<Result<_>>()?;
    let (strikes, vols) = rows.into_iter().unzip();
    Ok(SmileSurface {
        spot,
        params: *params,
        convention,
        maturities: maturities.to_vec(),
        offsets: offsets.to_vec(),
        strikes,
        vols,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewPoint {
    pub maturity: f64,
    /// Least-squares slope of vol against strike offset in standard deviations.
    pub slope_per_stdev: f64,
    /// The same slope per unit strike.
    pub slope_per_strike: f64,
}

/// ATM skew per maturity from the offsets within `SKEW_WINDOW` standard
/// deviations.
pub fn skew_term_structure(surface: &SmileSurface) -> Result<Vec<SkewPoint>> {
    let idx: Vec<usize> = (0..surface.offsets.len())
        .filter(|&j| surface.offsets[j].abs() <= SKEW_WINDOW + 1e-12)
        .collect();
    let has_below = idx.iter().any(|&j| surface.offsets[j] < 0.0);
    let has_above = idx.iter().any(|&j| surface.offsets[j] > 0.0);
    if idx.len() < 3 || !has_below || !has_above {
        return Err(Error::Config(format!(
            "skew needs at least 3 strikes within +-{SKEW_WINDOW} sd bracketing ATM"
        )));
    }
    let xs: Vec<f64> = idx.iter().map(|&j| surface.offsets[j]).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    Ok(surface
        .maturities
        .iter()
        .enumerate()
        .map(|(m, &t)| {
            let ys: Vec<f64> = idx.iter().map(|&j| surface.vols[m][j]).collect();
            let ym = ys.iter().sum::<f64>() / ys.len() as f64;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
            let slope = sxy / sxx;
            let sd = surface.params.sigma * t.sqrt();
            SkewPoint { maturity: t, slope_per_stdev: slope, slope_per_strike: slope / sd }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DAY: f64 = 1.0 / 252.0;
    const MATS: [f64; 4] = [DAY, 1.0 / 52.0, 1.0 / 12.0, 1.0];

    fn offsets() -> Vec<f64> {
        (-8..=8).map(|i| i as f64 * 0.5).collect()
    }

    #[test]
    fn gaussian_smile_is_flat() {
        let p = ModelParams::new(0.2, 0.0, 1.0).unwrap();
        let s = build_smile(&p, &MATS, &offsets()).unwrap();
        for row in &s.vols {
            for &v in row {
                assert!((v - 0.2).abs() < 1e-4, "{v}");
            }
        }
        for sp in skew_term_structure(&s).unwrap() {
            assert!(sp.slope_per_stdev.abs() < 1e-4);
        }
    }

    #[test]
    fn smile_mirrors_under_epsilon_flip() {
        let off = offsets();
        let a = build_smile(&ModelParams::new(0.2, 0.01, 1.0).unwrap(), &MATS, &off).unwrap();
        let b = build_smile(&ModelParams::new(0.2, -0.01, 1.0).unwrap(), &MATS, &off).unwrap();
        let n = off.len();
        for m in 0..MATS.len() {
            for j in 0..n {
                let d = (a.vols[m][j] - b.vols[m][n - 1 - j]).abs();
                assert!(d < 1e-6, "maturity {} offset {}: {d}", MATS[m], off[j]);
            }
        }
    }

    #[test]
    fn positive_epsilon_gives_negative_skew() {
        let p = ModelParams::new(0.2, 0.01, 1.0).unwrap();
        let s = build_smile(&p, &MATS, &[-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]).unwrap();
        assert!(s.vols[0][0] > s.vols[0][6]);
        let skew = skew_term_structure(&s).unwrap();
        for w in skew.windows(2) {
            assert!(w[0].slope_per_stdev < 0.0);
            assert!(w[1].slope_per_stdev.abs() < w[0].slope_per_stdev.abs());
        }
    }

    #[test]
    fn bad_axes_are_rejected() {
        let p = ModelParams::new(0.2, 0.0, 1.0).unwrap();
        assert!(build_smile(&p, &[], &[0.0]).is_err());
        assert!(build_smile(&p, &[1.0, 0.5], &[0.0]).is_err());
        assert!(build_smile(&p, &[1.0], &[5.0]).is_err());
        let s = build_smile(&p, &[1.0], &[0.0, 0.5, 1.0]).unwrap();
        assert!(matches!(skew_term_structure(&s), Err(Error::Config(_))));
    }
}
