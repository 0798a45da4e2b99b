//! Tabulated blurring densities and Gauss-Legendre quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature nodes used for every tabulated density.
pub const BLUR_NODES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BlurShape {
    /// `2 |eps - y| / eps^2` between `0` and `eps`.
    Triangular { epsilon: f64 },
    Uniform { lo: f64, hi: f64 },
    Dirac { at: f64 },
    Tabulated,
}

/// A probability density `H(y)` carried as quadrature nodes, weights and
/// density values, so `int f H dy = sum_k weights[k] values[k] f(y[k])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlurringDensity {
    pub shape: BlurShape,
    pub y: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&v| v * half).collect(),
    )
}

impl BlurringDensity {
    /// Tabulate a density from its values on the quadrature nodes of `[lo, hi]`.
    pub fn tabulate(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Degenerate(format!("empty support [{lo}, {hi}]")));
        }
        let (y, weights) = gauss_legendre_on(lo, hi, BLUR_NODES);
        let values = y.iter().map(|&v| f(v)).collect();
        Self::from_parts(BlurShape::Tabulated, y, weights, values)
    }

    fn from_parts(shape: BlurShape, y: Vec<f64>, weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let h = Self { shape, y, weights, values };
        if h.values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain("blurring density must be finite and nonnegative".into()));
        }
        let total = h.moment(0);
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::Domain(format!("blurring density integrates to {total}")));
        }
        Ok(h)
    }

    /// `int y^i H(y) dy`.
    pub fn moment(&self, i: usize) -> f64 {
        self.y
            .iter()
            .zip(&self.weights)
            .zip(&self.values)
            .map(|((&y, &w), &v)| w * v * y.powi(i as i32))
            .sum()
    }

    pub fn moments(&self, order: usize) -> Vec<f64> {
        (0..=order).map(|i| self.moment(i)).collect()
    }

    pub fn support(&self) -> (f64, f64) {
        match self.shape {
            BlurShape::Triangular { epsilon } => (epsilon.min(0.0), epsilon.max(0.0)),
            BlurShape::Uniform { lo, hi } => (lo, hi),
            BlurShape::Dirac { at } => (at, at),
            BlurShape::Tabulated => (self.y[0], self.y[self.y.len() - 1]),
        }
    }

    pub fn variance(&self) -> f64 {
        let m1 = self.moment(1);
        self.moment(2) - m1 * m1
    }
}

/// Closed-form density whose moments are `2 eps^i / ((i + 1)(i + 2))`.
pub fn triangular_blur(epsilon: f64) -> Result<BlurringDensity> {
    if epsilon == 0.0 || !epsilon.is_finite() {
        return Err(Error::Degenerate(format!(
            "triangular blur needs eps != 0, got {epsilon}; use dirac_blur for the local limit"
        )));
    }
    let (lo, hi) = (epsilon.min(0.0), epsilon.max(0.0));
    let (y, weights) = gauss_legendre_on(lo, hi, BLUR_NODES);
    let e2 = epsilon * epsilon;
    let values = y.iter().map(|&v| 2.0 * (epsilon - v).abs() / e2).collect();
    BlurringDensity::from_parts(BlurShape::Triangular { epsilon }, y, weights, values)
}

pub fn uniform_blur(lo: f64, hi: f64) -> Result<BlurringDensity> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Degenerate(format!("uniform blur needs lo < hi, got [{lo}, {hi}]")));
    }
    let (y, weights) = gauss_legendre_on(lo, hi, BLUR_NODES);
    let values = vec![1.0 / (hi - lo); y.len()];
    BlurringDensity::from_parts(BlurShape::Uniform { lo, hi }, y, weights, values)
}

/// Unit point mass at `at`.
pub fn dirac_blur(at: f64) -> BlurringDensity {
    BlurringDensity {
        shape: BlurShape::Dirac { at },
        y: vec![at],
        weights: vec![1.0],
        values: vec![1.0],
    }
}
