use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_header, fmt17};
use crate::model::ModelParams;
use crate::scalar::Real;

use super::grid::SpatialGrid;

pub const NEGATIVITY_TOLERANCE: f64 = 1e-9;
pub const BOUNDARY_RATIO: f64 = 1e-8;
pub const NORMALIZATION_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelMethod {
    Fourier,
    Spectral(usize),
    Composed,
}

impl std::fmt::Display for KernelMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelMethod::Fourier => write!(f, "fourier"),
            KernelMethod::Spectral(k) => write!(f, "spectral({k})"),
            KernelMethod::Composed => write!(f, "composed"),
        }
    }
}

/// How node values should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelForm {
    /// Samples of a smooth density.
    Density,
    /// Atoms on the nodes; `value * dx` is the atom mass.
    Lattice,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelMeta {
    /// Wavenumber band removed by the stabilising filter.
    pub filtered_band: Option<(f64, f64)>,
    pub filtered_modes: usize,
    /// Smallest value before clipping.
    pub min_value: f64,
    pub clipped: usize,
}

/// Transition density on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDensity<T> {
    pub grid: SpatialGrid<T>,
    pub values: Vec<T>,
    pub params: ModelParams<T>,
    pub method: KernelMethod,
    pub form: KernelForm,
    pub meta: KernelMeta,
}

impl<T: Real> KernelDensity<T> {
    /// Trapezoid rule over the grid.
    pub fn integral(&self) -> T {
        let dx = self.grid.dx();
        let n = self.values.len();
        let s: T = self.values.iter().fold(T::zero(), |a, &v| a + v);
        (s - (self.values[0] + self.values[n - 1]) / T::lit(2.0)) * dx
    }

    /// Quadrature weight attached to each node.
    pub fn masses(&self) -> Vec<T> {
        let dx = self.grid.dx();
        let n = self.values.len();
        self.values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let w = if k == 0 || k == n - 1 { dx / T::lit(2.0) } else { dx };
                v * w
            })
            .collect()
    }

    pub fn peak(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &v| a.max(v))
    }

    /// Linear interpolation of the node values (zero outside the grid).
    pub fn value_at(&self, x: T) -> T {
        let dx = self.grid.dx();
        let s = (x - self.grid.x_min) / dx;
        if s < T::zero() || s > T::from_usize_lossy(self.grid.n - 1) {
            return T::zero();
        }
        let k = s.floor().to_usize().unwrap_or(0).min(self.grid.n - 2);
        let f = s - T::from_usize_lossy(k);
        self.values[k] * (T::one() - f) + self.values[k + 1] * f
    }

    /// Cumulative distribution.
    ///
    /// Density kernels integrate the piecewise-linear interpolant; lattice
    /// kernels sum the atoms at nodes `<= x`.
    pub fn cdf(&self) -> impl Fn(T) -> T + '_ {
        let dx = self.grid.dx();
        let n = self.grid.n;
        let mut cum = Vec::with_capacity(n);
        let mut acc = T::zero();
        match self.form {
            KernelForm::Lattice => {
                for &v in &self.values {
                    acc = acc + v * dx;
                    cum.push(acc);
                }
            }
            KernelForm::Density => {
                cum.push(T::zero());
                for k in 1..n {
                    acc = acc + (self.values[k - 1] + self.values[k]) * dx / T::lit(2.0);
                    cum.push(acc);
                }
            }
        }
        let total = acc;
        move |x: T| {
            let s = (x - self.grid.x_min) / dx;
            if s < T::zero() {
                return if self.form == KernelForm::Lattice && s > -T::lit(1e-9) {
                    cum[0] / total
                } else {
                    T::zero()
                };
            }
            if s >= T::from_usize_lossy(n - 1) {
                return T::one();
            }
            match self.form {
                KernelForm::Lattice => {
                    let k = (s + T::lit(1e-9)).floor().to_usize().unwrap_or(0).min(n - 1);
                    cum[k] / total
                }
                KernelForm::Density => {
                    let k = s.floor().to_usize().unwrap_or(0).min(n - 2);
                    let f = s - T::from_usize_lossy(k);
                    let a = self.values[k];
                    let b = self.values[k + 1];
                    let part = dx * f * (a + (b - a) * f / T::lit(2.0));
                    (cum[k] + part) / total
                }
            }
        }
    }

    /// Sup-norm distance to another kernel on the same nodes.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        if self.values.len() != other.values.len()
            || (self.grid.x_min - other.grid.x_min).abs() > T::lit(1e-9) * self.grid.dx()
            || !self.grid.same_shape(&other.grid)
        {
            return Err(Error::Composition("kernels are on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |a, (&u, &v)| a.max((u - v).abs())))
    }

    /// Check the normalization, negativity and boundary invariants, clipping
    /// harmless negative ringing to zero.
    pub(crate) fn validate_and_clip(mut self) -> Result<Self> {
        let min = self.values.iter().fold(T::infinity(), |a, &v| a.min(v));
        self.meta.min_value = min.as_f64();
        let peak = self.peak();
        // single precision cannot resolve the absolute thresholds, so floor
        // them at the FFT roundoff level
        let noise = T::lit(64.0) * T::epsilon() * peak;
        if min < -T::lit(NEGATIVITY_TOLERANCE).max(noise) {
            return Err(Error::Validation(format!(
                "density reaches {min}, below -{NEGATIVITY_TOLERANCE:e}"
            )));
        }
        let mut clipped = 0;
        for v in self.values.iter_mut() {
            if *v < T::zero() {
                *v = T::zero();
                clipped += 1;
            }
        }
        self.meta.clipped = clipped;
        let edge = self.values[0].max(self.values[self.values.len() - 1]);
        if edge > (T::lit(BOUNDARY_RATIO) * peak).max(noise) {
            let mid = (self.grid.x_min + self.grid.x_max).as_f64() / 2.0;
            let w = self.grid.width().as_f64();
            return Err(Error::Grid {
                message: format!("boundary density {edge} exceeds {BOUNDARY_RATIO:e} of peak {peak}"),
                suggested_min: mid - w,
                suggested_max: mid + w,
            });
        }
        self.check_normalized()?;
        Ok(self)
    }

    pub(crate) fn check_normalized(&self) -> Result<()> {
        let total = self.integral();
        if (total - T::one()).abs() > T::lit(NORMALIZATION_TOLERANCE) {
            return Err(Error::Validation(format!("kernel integrates to {total}")));
        }
        Ok(())
    }

    /// Write `x,density` rows after a comment header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{}",
            csv_header(&[
                ("sigma", self.params.sigma.as_f64()),
                ("epsilon", self.params.epsilon.as_f64()),
                ("horizon", self.params.horizon.as_f64()),
            ], &[("method", self.method.to_string()), ("form", format!("{:?}", self.form).to_lowercase())])
        )?;
        writeln!(w, "x,density")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", fmt17(self.grid.x(k).as_f64()), fmt17(v.as_f64()))?;
        }
        Ok(())
    }
}

/// Classify a grid for the given parameters.
pub(crate) fn form_for<T: Real>(params: &ModelParams<T>, grid: &SpatialGrid<T>) -> KernelForm {
    let eps = params.epsilon.abs();
    if eps > T::zero() && (grid.dx() - eps).abs() <= T::lit(1e-9) * eps {
        KernelForm::Lattice
    } else {
        KernelForm::Density
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(form: KernelForm) -> KernelDensity<f64> {
        let grid = SpatialGrid::new(-32.0, 31.0, 64).unwrap();
        let mut values = vec![0.0; 64];
        values[31] = 0.25;
        values[32] = 0.5;
        values[33] = 0.25;
        KernelDensity {
            grid,
            values,
            params: ModelParams::new(1.0, 1.0, 1.0).unwrap(),
            method: KernelMethod::Fourier,
            form,
            meta: KernelMeta::default(),
        }
    }

    #[test]
    fn lattice_cdf_steps_at_atoms() {
        let k = toy(KernelForm::Lattice);
        let cdf = k.cdf();
        assert_eq!(cdf(-1.5), 0.0);
        assert_eq!(cdf(-1.0), 0.25);
        assert_eq!(cdf(-0.5), 0.25);
        assert_eq!(cdf(0.0), 0.75);
        assert_eq!(cdf(1.0), 1.0);
    }

    #[test]
    fn density_cdf_is_continuous() {
        let k = toy(KernelForm::Density);
        let cdf = k.cdf();
        assert_eq!(cdf(-2.0), 0.0);
        assert!((cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((cdf(2.0) - 1.0).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..400 {
            let c = cdf(-2.0 + i as f64 * 0.01);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn validation_flags_problems() {
        assert!(toy(KernelForm::Density).validate_and_clip().is_ok());
        let mut k = toy(KernelForm::Density);
        k.values[0] = 0.1;
        assert!(matches!(k.validate_and_clip(), Err(Error::Grid { .. })));
        let mut k = toy(KernelForm::Density);
        k.values[10] = -1e-6;
        assert!(matches!(k.validate_and_clip(), Err(Error::Validation(_))));
        let mut k = toy(KernelForm::Density);
        k.values[10] = -1e-12;
        let k = k.validate_and_clip().unwrap();
        assert_eq!(k.values[10], 0.0);
        assert_eq!(k.meta.clipped, 1);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut buf = Vec::new();
        toy(KernelForm::Density).write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines[1], "x,density");
        assert_eq!(lines.len(), 66);
    }
}
