use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::Real;

/// Expected jump counts below this use the lattice grid (`dx = |eps|`).
pub const LATTICE_THRESHOLD: f64 = 18.0;
/// Default nodes per standard deviation on continuous grids.
pub const DEFAULT_POINTS_PER_STD: usize = 16;

/// Uniform grid `x_k = x_min + k dx`, `k = 0..n`, with `x_max` the last node.
///
/// One node sits exactly on `anchor`: `0` for continuous kernels, the atom
/// `sigma^2 t / eps` for lattice kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid<T> {
    pub x_min: T,
    pub x_max: T,
    pub n: usize,
    pub dx: T,
    pub anchor: T,
    pub anchor_index: usize,
}

impl<T: Real> SpatialGrid<T> {
    /// Grid on `[x_min, x_max]` that must contain `x = 0` as a node.
    pub fn new(x_min: T, x_max: T, n: usize) -> Result<Self> {
        Self::validate_shape(x_min, x_max, n)?;
        let dx = (x_max - x_min) / T::from_usize_lossy(n - 1);
        let k = (-x_min / dx).round();
        if (x_min + k * dx).abs() > T::lit(1e-6) * dx {
            return Err(Error::Config("x = 0 is not a grid node".into()));
        }
        let anchor_index = k.to_usize().unwrap_or(0);
        Self::anchored(T::zero(), dx, n, anchor_index)
    }

    /// Grid of `n` nodes spaced `dx` with node `anchor_index` on `anchor`.
    pub fn anchored(anchor: T, dx: T, n: usize, anchor_index: usize) -> Result<Self> {
        if !(dx > T::zero() && dx.is_finite()) {
            return Err(Error::Config(format!("grid spacing must be positive, got {dx}")));
        }
        if anchor_index >= n {
            return Err(Error::Config("anchor index outside grid".into()));
        }
        let x_min = anchor - T::from_usize_lossy(anchor_index) * dx;
        let x_max = anchor + T::from_usize_lossy(n - 1 - anchor_index) * dx;
        Self::validate_shape(x_min, x_max, n)?;
        Ok(Self { x_min, x_max, n, dx, anchor, anchor_index })
    }

    fn validate_shape(x_min: T, x_max: T, n: usize) -> Result<()> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::Config(format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::Config(format!("n must be a power of two >= 64, got {n}")));
        }
        Ok(())
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn x(&self, k: usize) -> T {
        if k >= self.anchor_index {
            self.anchor + T::from_usize_lossy(k - self.anchor_index) * self.dx
        } else {
            self.anchor - T::from_usize_lossy(self.anchor_index - k) * self.dx
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn anchor_index(&self) -> usize {
        self.anchor_index
    }

    /// Same spacing and size, with the anchor node moved to `anchor`.
    pub fn reanchored(&self, anchor: T) -> Result<Self> {
        Self::anchored(anchor, self.dx(), self.n, self.anchor_index())
    }

    /// Signed angular wavenumber of FFT bin `j`.
    pub fn wavenumber(&self, j: usize) -> T {
        let signed = if j < self.n / 2 { j as f64 } else { j as f64 - self.n as f64 };
        T::lit(2.0 * std::f64::consts::PI * signed) / (T::from_usize_lossy(self.n) * self.dx())
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        let tol = T::lit(1e-9) * self.dx();
        self.n == other.n && (self.dx() - other.dx()).abs() <= tol
    }
}

/// Deterministic grid for `compute_kernel` with the default resolution.
pub fn auto_grid<T: Real>(params: &ModelParams<T>) -> SpatialGrid<T> {
    auto_grid_with_resolution(params, DEFAULT_POINTS_PER_STD)
}

/// Deterministic grid with `points_per_std` nodes per standard deviation in
/// the continuous regime. Lattice kernels always use `dx = |eps|`.
///
/// The covered range is at least `12 sd` on each side plus a tail of
/// `6 sigma^2 t / |eps|` on the skewed side.
pub fn auto_grid_with_resolution<T: Real>(params: &ModelParams<T>, points_per_std: usize) -> SpatialGrid<T> {
    let sd = params.std_dev();
    let eps = params.epsilon;
    let pps = points_per_std.max(4);
    if eps != T::zero() && params.jump_count() < T::lit(LATTICE_THRESHOLD) {
        let lt = params.jump_count().as_f64();
        let tail = (6.0 * lt + 12.0 * lt.sqrt() + 30.0).ceil() as usize;
        let margin = 16usize;
        let n = (tail + margin + 1).next_power_of_two().max(64);
        let spare = n - 1 - tail;
        let right = spare / 2;
        let dx = eps.abs();
        let anchor = params.variance() / eps;
        // atoms run away from the anchor towards -sign(eps)
        let anchor_index = if eps > T::zero() { n - 1 - right } else { right };
        SpatialGrid::anchored(anchor, dx, n, anchor_index).expect("lattice grid is valid")
    } else {
        let dx = sd / T::from_usize_lossy(pps);
        let tail = if eps == T::zero() {
            T::zero()
        } else {
            T::lit(6.0) * params.variance() / eps.abs()
        };
        let half = T::lit(12.0) * sd;
        let (left, right) = if eps > T::zero() {
            (half + tail, half)
        } else {
            (half, half + tail)
        };
        let kl = (left / dx).ceil().to_usize().unwrap_or(0);
        let kr = (right / dx).ceil().to_usize().unwrap_or(0);
        let n = (kl + kr + 1).next_power_of_two().max(64);
        let spare = n - (kl + kr + 1);
        let anchor_index = kl + spare / 2;
        SpatialGrid::anchored(T::zero(), dx, n, anchor_index).expect("continuous grid is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(eps: f64, t: f64) -> ModelParams<f64> {
        ModelParams::new(0.2, eps, t).unwrap()
    }

    #[test]
    fn new_requires_zero_node() {
        assert!(SpatialGrid::new(-1.0, 1.0, 63).is_err());
        assert!(SpatialGrid::new(1.0, -1.0, 64).is_err());
        // dx = 2/63, 0 is not a node
        assert!(SpatialGrid::new(-1.0, 1.0, 64).is_err());
        let g = SpatialGrid::new(-32.0, 31.0, 64).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.anchor_index(), 32);
    }

    #[test]
    fn gaussian_grid_is_symmetric_and_wide() {
        let g = auto_grid(&params(0.0, 1.0 / 252.0));
        let sd = (0.04f64 / 252.0).sqrt();
        assert!(g.x_min <= -12.0 * sd && g.x_max >= 12.0 * sd);
        assert_eq!(g.x(g.anchor_index()), 0.0);
        assert!((g.x_min + g.x_max).abs() <= g.dx() + 1e-15);
    }

    #[test]
    fn one_year_grid_is_large() {
        let g = auto_grid(&params(0.01, 1.0));
        assert!(g.n >= 4096);
        assert!(g.x_min < -24.0);
        assert!(g.x_max > 2.4);
    }

    #[test]
    fn lattice_grid_holds_anchor() {
        for eps in [0.01, -0.01, 0.005] {
            let p = params(eps, 1.0 / 252.0);
            let g = auto_grid(&p);
            assert!((g.dx() - eps.abs()).abs() < 1e-15);
            let k = g.anchor_index();
            assert!((g.x(k) - p.variance() / eps).abs() < 1e-12);
            assert!(g.width() >= 12.0 * p.std_dev() + 6.0 * p.variance() / eps.abs());
        }
    }

    #[test]
    fn auto_grid_is_deterministic() {
        for eps in [0.0, 0.005, -0.01] {
            let p = params(eps, 1.0 / 52.0);
            assert_eq!(auto_grid(&p), auto_grid(&p));
        }
    }

    #[test]
    fn wavenumbers_are_signed() {
        let g = SpatialGrid::new(-32.0, 31.0, 64).unwrap();
        assert!(g.wavenumber(1) > 0.0);
        assert!(g.wavenumber(63) < 0.0);
        assert!((g.wavenumber(32) + std::f64::consts::PI).abs() < 1e-12);
    }
}
