//! One-dimensional metrics, connection terms and Kramers-Moyal coefficients.
//!
//! For a metric `g(x) > 0` the connection and section are
//!
//! ```text
//! A(x) = -g^(1/2) d/dx g^(-1/2) = g' / (2 g)
//! Q(x) = -A^2 / g - A' / g
//! ```
//!
//! and the nonlocal equation with blur moments `H_i` expands to a drift
//! `(sigma^2 / 4) (g^-1)' H_0` and order-`k` multipliers
//!
//! ```text
//! c_k = sigma^2 / 2 * ( (-1)^(k-2) g^-1 H_{k-2} / (k-2)!
//!                     + (-1)^(k-1) (g^-1)' H_{k-1} / (2 (k-1)!) )
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::blur::{gauss_legendre, BlurringDensity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MetricRepr {
    Flat,
    /// `g(x) = exp(-alpha x)`.
    Exponential { alpha: f64 },
    /// Linear interpolation of `g` on ascending nodes.
    Tabulated { x: Vec<f64>, g: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricProfile {
    pub repr: MetricRepr,
    /// Origin of the transformed coordinate.
    pub x0: f64,
}

/// `g` and its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub g: f64,
    pub dg: f64,
    pub d2g: f64,
}

impl MetricProfile {
    pub fn flat() -> Self {
        Self { repr: MetricRepr::Flat, x0: 0.0 }
    }

    pub fn exponential(alpha: f64) -> Self {
        Self { repr: MetricRepr::Exponential { alpha }, x0: 0.0 }
    }

    pub fn tabulated(x: Vec<f64>, g: Vec<f64>, x0: f64) -> Result<Self> {
        if x.len() != g.len() || x.len() < 3 {
            return Err(Error::Config("metric table needs at least 3 matching nodes".into()));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("metric nodes must be strictly ascending".into()));
        }
        if let Some(v) = g.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!("metric must be positive, found g = {v}")));
        }
        Ok(Self { repr: MetricRepr::Tabulated { x, g }, x0 })
    }

    pub fn with_origin(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn g(&self, x: f64) -> Result<f64> {
        Ok(self.jet(x)?.g)
    }

    /// `g, g', g''`; tabulated metrics use central differences of the
    /// interpolant at the table spacing.
    pub fn jet(&self, x: f64) -> Result<MetricJet> {
        let j = match &self.repr {
            MetricRepr::Flat => MetricJet { g: 1.0, dg: 0.0, d2g: 0.0 },
            MetricRepr::Exponential { alpha } => {
                let g = (-alpha * x).exp();
                MetricJet { g, dg: -alpha * g, d2g: alpha * alpha * g }
            }
            MetricRepr::Tabulated { x: xs, g: gs } => {
                let interp = |t: f64| -> Result<f64> {
                    if t < xs[0] || t > xs[xs.len() - 1] {
                        return Err(Error::Domain(format!("x = {t} outside the metric table")));
                    }
                    let k = xs.partition_point(|&v| v <= t).clamp(1, xs.len() - 1);
                    let f = (t - xs[k - 1]) / (xs[k] - xs[k - 1]);
                    Ok(gs[k - 1] * (1.0 - f) + gs[k] * f)
                };
                let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
                let lo = (x - h).max(xs[0]);
                let hi = (x + h).min(xs[xs.len() - 1]);
                let (gl, g, gh) = (interp(lo)?, interp(x)?, interp(hi)?);
                let dg = (gh - gl) / (hi - lo);
                let d2g = if hi - x > 0.0 && x - lo > 0.0 {
                    2.0 * ((gh - g) / (hi - x) - (g - gl) / (x - lo)) / (hi - lo)
                } else {
                    0.0
                };
                MetricJet { g, dg, d2g }
            }
        };
        if !(j.g > 0.0) || !j.g.is_finite() {
            return Err(Error::Domain(format!("metric is not positive at x = {x}: g = {}", j.g)));
        }
        Ok(j)
    }

    /// `d/dx (1/g)`.
    pub fn inverse_derivative(&self, x: f64) -> Result<f64> {
        let j = self.jet(x)?;
        Ok(-j.dg / (j.g * j.g))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionTable {
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    pub q: Vec<f64>,
}

/// Connection `A(x)` and section `Q(x)` on the nodes `xs`.
pub fn connection_terms(metric: &MetricProfile, xs: &[f64]) -> Result<ConnectionTable> {
    let mut a = Vec::with_capacity(xs.len());
    let mut q = Vec::with_capacity(xs.len());
    for &x in xs {
        let j = metric.jet(x)?;
        let ax = j.dg / (2.0 * j.g);
        let dax = (j.d2g * j.g - j.dg * j.dg) / (2.0 * j.g * j.g);
        a.push(ax);
        q.push(-ax * ax / j.g - dax / j.g);
    }
    Ok(ConnectionTable { x: xs.to_vec(), a, q })
}

/// First- and zeroth-order coefficients of the expanded general Laplacian
/// `g^-1 d^2 + (g^-1/2 (g^-1/2)' + A / g) d + (A^2 / g + A' / g + Q)`,
/// evaluated with the connection and section of `metric`.
pub fn expanded_laplacian_coefficients(metric: &MetricProfile, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
    let conn = connection_terms(metric, xs)?;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let j = metric.jet(x)?;
            let ax = conn.a[i];
            let dax = (j.d2g * j.g - j.dg * j.dg) / (2.0 * j.g * j.g);
            let rg = j.g.powf(-0.5);
            let drg = -0.5 * j.g.powf(-1.5) * j.dg;
            let first = rg * drg + ax / j.g;
            let zeroth = ax * ax / j.g + dax / j.g + conn.q[i];
            Ok((first, zeroth))
        })
        .collect()
}

/// `s(x) = int_{x0}^{x} g(y)^(-1/2) dy`.
pub fn coordinate_transform(metric: &MetricProfile, x: f64) -> Result<f64> {
    let x0 = metric.x0;
    match &metric.repr {
        MetricRepr::Flat => Ok(x - x0),
        MetricRepr::Exponential { alpha } => {
            if *alpha == 0.0 {
                Ok(x - x0)
            } else {
                Ok(2.0 / alpha * ((alpha * x / 2.0).exp() - (alpha * x0 / 2.0).exp()))
            }
        }
        MetricRepr::Tabulated { x: xs, .. } => {
            if x == x0 {
                return Ok(0.0);
            }
            let (lo, hi, sign) = if x > x0 { (x0, x, 1.0) } else { (x, x0, -1.0) };
            // integrate cell by cell so the interpolant's kinks sit on panel edges
            let mut cuts = vec![lo];
            cuts.extend(xs.iter().copied().filter(|&v| v > lo && v < hi));
            cuts.push(hi);
            let (t, w) = gauss_legendre(8);
            let mut s = 0.0;
            for c in cuts.windows(2) {
                let half = (c[1] - c[0]) / 2.0;
                let mid = (c[1] + c[0]) / 2.0;
                for (&ti, &wi) in t.iter().zip(&w) {
                    s += wi * half * metric.g(mid + half * ti)?.powf(-0.5);
                }
            }
            Ok(sign * s)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PDECoefficients {
    pub x: Vec<f64>,
    pub drift: Vec<f64>,
    /// `multipliers[k - 2][i]` is `c_k(x_i)`.
    pub multipliers: Vec<Vec<f64>>,
}

impl PDECoefficients {
    pub fn c(&self, k: usize, i: usize) -> f64 {
        self.multipliers[k - 2][i]
    }
}

/// Kramers-Moyal drift and multipliers `c_2..c_K` on the nodes `xs`.
pub fn kramers_moyal_coefficients(
    h: &BlurringDensity,
    metric: &MetricProfile,
    sigma: f64,
    order: usize,
    xs: &[f64],
) -> Result<PDECoefficients> {
    if order < 2 {
        return Err(Error::Config(format!("Kramers-Moyal order must be >= 2, got {order}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
    }
    let moments = h.moments(order - 1);
    let s2 = sigma * sigma;
    let mut drift = Vec::with_capacity(xs.len());
    let mut multipliers = vec![Vec::with_capacity(xs.len()); order - 1];
    for &x in xs {
        let j = metric.jet(x)?;
        let ginv = 1.0 / j.g;
        let dginv = -j.dg / (j.g * j.g);
        drift.push(s2 / 4.0 * dginv * moments[0]);
        let mut fact_km2 = 1.0;
        for k in 2..=order {
            if k > 2 {
                fact_km2 *= (k - 2) as f64;
            }
            let fact_km1 = fact_km2 * (k - 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let c = s2 / 2.0
                * (sign * ginv * moments[k - 2] / fact_km2 - sign * dginv * moments[k - 1] / (2.0 * fact_km1));
            multipliers[k - 2].push(c);
        }
        if !(multipliers[0].last().copied().unwrap_or(0.0) > 0.0) {
            return Err(Error::Domain(format!("second-order coefficient is not positive at x = {x}")));
        }
    }
    Ok(PDECoefficients { x: xs.to_vec(), drift, multipliers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::blur::triangular_blur;
    use approx::assert_abs_diff_eq;

    fn grid() -> Vec<f64> {
        (0..41).map(|i| -1.0 + i as f64 * 0.05).collect()
    }

    #[test]
    fn flat_connection_vanishes() {
        let c = connection_terms(&MetricProfile::flat(), &grid()).unwrap();
        assert!(c.a.iter().chain(&c.q).all(|&v| v == 0.0));
    }

    #[test]
    fn exponential_connection() {
        let c = connection_terms(&MetricProfile::exponential(2.0), &grid()).unwrap();
        for (i, &x) in c.x.iter().enumerate() {
            assert_abs_diff_eq!(c.a[i], -1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(c.q[i], -(2.0 * x).exp(), epsilon = 1e-12 * (2.0 * x).exp());
        }
    }

    #[test]
    fn expanded_laplacian_collapses() {
        let x = (0..101).map(|i| -1.0 + 0.02 * i as f64).collect::<Vec<_>>();
        let g: Vec<f64> = x.iter().map(|&v: &f64| 1.0 + 0.5 * v.sin().powi(2)).collect();
        let metrics = [
            MetricProfile::flat(),
            MetricProfile::exponential(2.0),
            MetricProfile::exponential(-0.7),
            MetricProfile::tabulated(x.clone(), g, 0.0).unwrap(),
        ];
        for m in &metrics {
            for (first, zeroth) in expanded_laplacian_coefficients(m, &grid()).unwrap() {
                assert!(first.abs() <= 1e-10 && zeroth.abs() <= 1e-10, "{m:?}: {first} {zeroth}");
            }
        }
    }

    #[test]
    fn coordinate_transform_values() {
        assert_eq!(coordinate_transform(&MetricProfile::flat(), 0.5).unwrap(), 0.5);
        let s = coordinate_transform(&MetricProfile::exponential(2.0), 1.0).unwrap();
        assert_abs_diff_eq!(s, std::f64::consts::E - 1.0, epsilon = 1e-14);
        let x: Vec<f64> = (0..201).map(|i| -1.0 + 0.01 * i as f64).collect();
        let g: Vec<f64> = x.iter().map(|&v| (-2.0 * v).exp()).collect();
        let tab = MetricProfile::tabulated(x, g, 0.0).unwrap();
        let st = coordinate_transform(&tab, 1.0).unwrap();
        assert_abs_diff_eq!(st, s, epsilon = 1e-3);
        assert!(coordinate_transform(&tab, 1.5).is_err());
    }

    #[test]
    fn coordinate_transform_is_increasing() {
        let m = MetricProfile::exponential(-1.3).with_origin(0.2);
        let mut prev = f64::NEG_INFINITY;
        for x in grid() {
            let s = coordinate_transform(&m, x).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn tabulated_metric_rejects_nonpositive() {
        assert!(matches!(
            MetricProfile::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn flat_metric_reproduces_translation_coefficients() {
        let h = triangular_blur(0.01).unwrap();
        let c = kramers_moyal_coefficients(&h, &MetricProfile::flat(), 0.2, 8, &[0.0, 0.3]).unwrap();
        assert_eq!(c.drift, vec![0.0, 0.0]);
        let mut fact = 1.0;
        for k in 2..=8 {
            fact *= k as f64;
            let want = 0.04 * (-1f64).powi(k as i32) * 0.01f64.powi(k as i32 - 2) / fact;
            for i in 0..2 {
                assert_abs_diff_eq!(c.c(k, i), want, epsilon = 1e-12 * want.abs().max(1e-300));
            }
        }
        assert_abs_diff_eq!(c.c(2, 0), 0.02, epsilon = 1e-12);
    }

    #[test]
    fn exponential_metric_drift() {
        let h = triangular_blur(0.01).unwrap();
        let c = kramers_moyal_coefficients(&h, &MetricProfile::exponential(2.0), 0.2, 4, &[0.0]).unwrap();
        // (sigma^2 / 4) * alpha * exp(alpha x) * H_0 at x = 0
        assert_abs_diff_eq!(c.drift[0], 0.02, epsilon = 1e-12);
    }
}
