//! Weights `w = g^(-1/2)` satisfying the moment equations
//!
//! ```text
//! int (y / eps)^i H(y) w(y) dy = 2 / ((i + 1)(i + 2)),   i = 0..=N
//! ```
//!
//! solved on the blur's quadrature nodes as a Tikhonov problem in
//! `delta = w - 1` with penalty `mu * sum_k q_k delta_k^2`, where `q_k` are the
//! quadrature weights. Nodes whose weight would turn negative are pinned at
//! zero and the reduced problem is solved again.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt17;

use super::blur::BlurringDensity;
use super::metric::MetricProfile;

pub const MAX_FIT_ORDER: usize = 12;
pub const TIKHONOV: f64 = 1e-10;
/// Largest scaled residual accepted as a solution.
pub const FIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFit {
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    /// Scaled residual of each moment equation.
    pub residuals: Vec<f64>,
    /// Nodes pinned at `w = 0`.
    pub pinned: usize,
}

impl MetricFit {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, r| a.max(r.abs()))
    }

    /// Tabulated metric `g = w^-2`, defined only where `w > 0` everywhere.
    pub fn metric(&self) -> Result<MetricProfile> {
        if self.w.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Domain("fitted weights vanish somewhere; g = w^-2 is unbounded".into()));
        }
        let g = self.w.iter().map(|&v| 1.0 / (v * v)).collect();
        MetricProfile::tabulated(self.y.clone(), g, self.y[0])
    }

    pub fn write_csv<W: Write>(&self, mut out: W, header: &str) -> Result<()> {
        writeln!(out, "{header}")?;
        writeln!(out, "y,w")?;
        for (y, w) in self.y.iter().zip(&self.w) {
            writeln!(out, "{},{}", fmt17(*y), fmt17(*w))?;
        }
        Ok(())
    }
}

fn targets(order: usize) -> DVector<f64> {
    DVector::from_iterator(order + 1, (0..=order).map(|i| 2.0 / ((i + 1) * (i + 2)) as f64))
}

/// Regularised solve for the free nodes; pinned nodes hold `w = 0`.
fn solve_free(a: &DMatrix<f64>, b: &DVector<f64>, q: &[f64], free: &[bool]) -> Result<DVector<f64>> {
    let m = a.ncols();
    let cols: Vec<usize> = (0..m).filter(|&k| free[k]).collect();
    let mut w = DVector::from_element(m, 1.0);
    for k in 0..m {
        if !free[k] {
            w[k] = 0.0;
        }
    }
    if cols.is_empty() {
        return Ok(w);
    }
    let r0 = b - a * &w;
    // substitute delta_k = z_k / sqrt(q_k) so the penalty is mu |z|^2
    let bmat = DMatrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])] / q[cols[j]].sqrt());
    let svd = bmat.svd(true, true);
    let u = svd.u.as_ref().ok_or_else(|| Error::Config("svd failed".into()))?;
    let vt = svd.v_t.as_ref().ok_or_else(|| Error::Config("svd failed".into()))?;
    let mut z = DVector::zeros(cols.len());
    for (s_idx, &s) in svd.singular_values.iter().enumerate() {
        let coeff = s / (s * s + TIKHONOV) * u.column(s_idx).dot(&r0);
        z += vt.row(s_idx).transpose() * coeff;
    }
    for (j, &k) in cols.iter().enumerate() {
        w[k] += z[j] / q[k].sqrt();
    }
    Ok(w)
}

/// Fit `w(y)` on the quadrature nodes of `h`.
///
/// Returns [`Error::Infeasible`] with the residual vector when no
/// nonnegative `w` meets [`FIT_TOLERANCE`].
pub fn fit_metric_weights(h: &BlurringDensity, epsilon: f64, order: usize) -> Result<MetricFit> {
    if order > MAX_FIT_ORDER {
        return Err(Error::Config(format!("fit order must be <= {MAX_FIT_ORDER}, got {order}")));
    }
    if epsilon == 0.0 || !epsilon.is_finite() {
        return Err(Error::Config(format!("epsilon must be nonzero, got {epsilon}")));
    }
    let m = h.y.len();
    let a = DMatrix::from_fn(order + 1, m, |i, k| {
        h.weights[k] * h.values[k] * (h.y[k] / epsilon).powi(i as i32)
    });
    let b = targets(order);
    let q: Vec<f64> = h.weights.clone();
    let mut free = vec![true; m];
    let mut w = solve_free(&a, &b, &q, &free)?;
    for _ in 0..m {
        let negative: Vec<usize> = (0..m).filter(|&k| free[k] && w[k] < 0.0).collect();
        if negative.is_empty() {
            break;
        }
        for k in negative {
            free[k] = false;
        }
        w = solve_free(&a, &b, &q, &free)?;
    }
    for v in w.iter_mut() {
        *v = v.max(0.0);
    }
    let residuals: Vec<f64> = (&a * &w - &b).iter().copied().collect();
    let fit = MetricFit {
        y: h.y.clone(),
        w: w.iter().copied().collect(),
        residuals,
        pinned: free.iter().filter(|f| !**f).count(),
    };
    let max_residual = fit.max_residual();
    if !(max_residual <= FIT_TOLERANCE) {
        return Err(Error::Infeasible { residuals: fit.residuals, max_residual });
    }
    Ok(fit)
}
