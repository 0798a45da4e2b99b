//! Fourier inversion, truncated spectral propagation and composition.
//!
//! Node values are recovered from a spectrum `phi(p_j)` on the grid band by
//!
//! ```text
//! K(x_k) = 1 / (n dx) * sum_j phi(p_j) exp(-i p_j x_k)
//! ```
//!
//! which is a forward FFT once the phase `exp(-i p_j x_min)` is folded in.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::{characteristic_exponent, ModelParams, Truncation};
use crate::scalar::Real;

use super::density::{form_for, KernelDensity, KernelMeta, KernelMethod};
use super::grid::{auto_grid, SpatialGrid};

/// Starting density for [`spectral_propagate`].
#[derive(Debug, Clone)]
pub enum InitialCondition<T> {
    /// Dirac mass at `x0` resolved on `grid`.
    PointMass { grid: SpatialGrid<T>, x0: T },
    Density(KernelDensity<T>),
}

impl<T: Real> InitialCondition<T> {
    pub fn grid(&self) -> &SpatialGrid<T> {
        match self {
            InitialCondition::PointMass { grid, .. } => grid,
            InitialCondition::Density(k) => &k.grid,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpectralOptions {
    /// Zero every mode where the truncated symbol has positive real part.
    pub filter: bool,
}

/// `exp(-i p_j x_min)` computed without large-argument phase loss.
fn min_phase<T: Real>(grid: &SpatialGrid<T>, j: usize) -> Complex<T> {
    let n = grid.n;
    let ia = grid.anchor_index();
    let r = ((j as u128 * ia as u128) % n as u128) as f64;
    let lattice = Complex::from_polar(T::one(), T::lit(2.0 * std::f64::consts::PI * r / n as f64));
    let anchor = Complex::from_polar(T::one(), -grid.wavenumber(j) * grid.anchor);
    lattice * anchor
}

/// Node values from a spectrum sampled at the grid wavenumbers.
pub(crate) fn invert_spectrum<T: Real>(grid: &SpatialGrid<T>, spectrum: &[Complex<T>]) -> Vec<T> {
    let n = grid.n;
    let mut buf: Vec<Complex<T>> = spectrum
        .iter()
        .enumerate()
        .map(|(j, &phi)| phi * min_phase(grid, j))
        .collect();
    FftPlanner::<T>::new().plan_fft_forward(n).process(&mut buf);
    let scale = T::one() / (T::from_usize_lossy(n) * grid.dx());
    buf.iter().map(|c| c.re * scale).collect()
}

/// `sum_k f_k dx exp(i p_j x_k)` for every grid wavenumber.
pub(crate) fn forward_spectrum<T: Real>(grid: &SpatialGrid<T>, values: &[T]) -> Vec<Complex<T>> {
    let n = grid.n;
    let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v * grid.dx(), T::zero())).collect();
    FftPlanner::<T>::new().plan_fft_inverse(n).process(&mut buf);
    buf.iter()
        .enumerate()
        .map(|(j, &c)| c * min_phase(grid, j).conj())
        .collect()
}

fn required_width<T: Real>(params: &ModelParams<T>) -> T {
    let mut w = T::lit(12.0) * params.std_dev();
    if params.epsilon != T::zero() {
        w = w + T::lit(6.0) * params.variance() / params.epsilon.abs();
    }
    w
}

fn in_principal_band<T: Real>(eps: T, p: T) -> bool {
    (eps * p).abs() <= T::PI() * T::lit(1.0 + 1e-12)
}

/// Kernel density of the closed-form law at `params.horizon`.
///
/// The spectrum `exp(t m(p))` is kept on the principal band `|eps p| <= pi`
/// (the whole grid band when `eps = 0`), so lattice grids reproduce the atoms
/// exactly and finer grids give their band-limited interpolation.
pub fn compute_kernel<T: Real>(params: &ModelParams<T>, grid: &SpatialGrid<T>) -> Result<KernelDensity<T>> {
    if grid.width() < required_width(params) {
        let g = auto_grid(params);
        return Err(Error::Grid {
            message: format!(
                "grid width {} below required {}",
                grid.width(),
                required_width(params)
            ),
            suggested_min: g.x_min.as_f64(),
            suggested_max: g.x_max.as_f64(),
        });
    }
    let t = params.horizon;
    let spectrum: Vec<Complex<T>> = (0..grid.n)
        .map(|j| {
            let p = grid.wavenumber(j);
            if !in_principal_band(params.epsilon, p) {
                return Ok(Complex::new(T::zero(), T::zero()));
            }
            Ok((characteristic_exponent(p, params, Truncation::ClosedForm)? * t).exp())
        })
        .collect::<Result<_>>()?;
    let values = invert_spectrum(grid, &spectrum);
    KernelDensity {
        grid: *grid,
        values,
        params: *params,
        method: KernelMethod::Fourier,
        form: form_for(params, grid),
        meta: KernelMeta::default(),
    }
    .validate_and_clip()
}

/// [`compute_kernel`] over independent jobs in parallel.
pub fn compute_kernel_batch<T: Real>(jobs: &[(ModelParams<T>, SpatialGrid<T>)]) -> Vec<Result<KernelDensity<T>>> {
    jobs.par_iter().map(|(p, g)| compute_kernel(p, g)).collect()
}

/// Evolve `initial` for time `t` with the (possibly truncated) symbol on the
/// full grid band.
///
/// Negative values are a genuine feature of truncated evolutions and are only
/// recorded in `meta.min_value`.
pub fn spectral_propagate<T: Real>(
    initial: &InitialCondition<T>,
    params: &ModelParams<T>,
    trunc: Truncation,
    t: T,
    opts: SpectralOptions,
) -> Result<KernelDensity<T>> {
    let trunc = trunc.validate()?;
    if !(t > T::zero() && t.is_finite()) {
        return Err(Error::Config(format!("propagation time must be positive, got {t}")));
    }
    let grid = *initial.grid();
    let (mut spectrum, base_t) = match initial {
        InitialCondition::PointMass { x0, .. } => (
            (0..grid.n)
                .map(|j| Complex::from_polar(T::one(), grid.wavenumber(j) * *x0))
                .collect::<Vec<_>>(),
            T::zero(),
        ),
        InitialCondition::Density(k) => (forward_spectrum(&grid, &k.values), k.params.horizon),
    };

    let mut unstable: Option<(T, T)> = None;
    let mut filtered = 0;
    for (j, phi) in spectrum.iter_mut().enumerate() {
        let p = grid.wavenumber(j);
        let m = characteristic_exponent(p, params, trunc)?;
        if m.re > T::zero() {
            unstable = Some(match unstable {
                None => (p, p),
                Some((lo, hi)) => (lo.min(p), hi.max(p)),
            });
            if opts.filter {
                *phi = Complex::new(T::zero(), T::zero());
                filtered += 1;
                continue;
            }
        }
        *phi = *phi * (m * t).exp();
    }
    if let (Some((lo, hi)), false) = (unstable, opts.filter) {
        return Err(Error::Stability { p_lo: lo.as_f64(), p_hi: hi.as_f64() });
    }

    let values = invert_spectrum(&grid, &spectrum);
    let min = values.iter().fold(T::infinity(), |a, &v| a.min(v));
    let out_params = ModelParams::new(params.sigma, params.epsilon, base_t + t)?;
    Ok(KernelDensity {
        grid,
        values,
        params: out_params,
        method: match trunc {
            Truncation::ClosedForm => KernelMethod::Fourier,
            Truncation::Series(k) => KernelMethod::Spectral(k),
        },
        form: form_for(params, &grid),
        meta: KernelMeta {
            filtered_band: unstable.map(|(lo, hi)| (lo.as_f64(), hi.as_f64())),
            filtered_modes: filtered,
            min_value: min.as_f64(),
            clipped: 0,
        },
    })
}

/// Chapman-Kolmogorov composition `(a * b)(x) = int a(x - y) b(y) dy`.
///
/// The result lives on `a`'s grid shifted by `b`'s anchor, so composing two
/// kernels on reanchored copies of one grid lands on that grid.
pub fn compose<T: Real>(a: &KernelDensity<T>, b: &KernelDensity<T>) -> Result<KernelDensity<T>> {
    let close = |u: T, v: T| (u - v).abs() <= T::lit(1e-12) * u.abs().max(v.abs()).max(T::min_positive_value());
    if !close(a.params.sigma, b.params.sigma) || !(close(a.params.epsilon, b.params.epsilon) || a.params.epsilon == b.params.epsilon) {
        return Err(Error::Composition("kernels have different (sigma, epsilon)".into()));
    }
    if !a.grid.same_shape(&b.grid) {
        return Err(Error::Composition("kernels have different grid spacing or size".into()));
    }
    if a.form != b.form {
        return Err(Error::Composition("cannot compose a lattice kernel with a density".into()));
    }
    let n = a.grid.n;
    let m = 2 * n;
    let pad = |v: &[T]| -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); m];
        for (o, &x) in out.iter_mut().zip(v) {
            o.re = x;
        }
        out
    };
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut fa = pad(&a.values);
    let mut fb = pad(&b.values);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * *y;
    }
    inv.process(&mut fa);
    let dx = a.grid.dx();
    let scale = dx / T::from_usize_lossy(m);
    let ib = b.grid.anchor_index();
    let values: Vec<T> = (0..n).map(|k| fa[k + ib].re * scale).collect();

    let grid = a.grid.reanchored(a.grid.anchor + b.grid.anchor)?;
    let params = ModelParams::new(a.params.sigma, a.params.epsilon, a.params.horizon + b.params.horizon)?;
    KernelDensity {
        grid,
        values,
        params,
        method: KernelMethod::Composed,
        form: a.form,
        meta: KernelMeta::default(),
    }
    .validate_and_clip()
}
