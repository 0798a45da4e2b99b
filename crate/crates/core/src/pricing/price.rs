//! Expected payoffs under the kernel.
//!
//! Lattice kernels are summed atom by atom. Density kernels are integrated
//! against a local cubic interpolant: each cell is split at the payoff kink and
//! three-point Gauss-Legendre is exact on the resulting quartics.

use crate::error::{Error, Result};
use crate::kernel::{auto_grid_with_resolution, compute_kernel, KernelDensity, KernelForm, LATTICE_THRESHOLD};
use crate::model::ModelParams;

use super::option::OptionSpec;

/// Continuous-regime resolution used for pricing.
pub const PRICING_POINTS_PER_STD: usize = 64;

/// Kernel used for pricing at `params.horizon`.
pub fn pricing_kernel(params: &ModelParams<f64>) -> Result<KernelDensity<f64>> {
    let grid = auto_grid_with_resolution(params, PRICING_POINTS_PER_STD);
    compute_kernel(params, &grid)
}

/// `E[payoff(S_0 + x)]` with `params.horizon` replaced by the maturity.
pub fn price_european(spec: &OptionSpec, params: &ModelParams<f64>) -> Result<f64> {
    spec.validate()?;
    let p = params.with_horizon(spec.maturity)?;
    price_with_kernel(spec, &pricing_kernel(&p)?)
}

/// `E[payoff(S_0 + x)]` against a precomputed kernel.
pub fn price_with_kernel(spec: &OptionSpec, kernel: &KernelDensity<f64>) -> Result<f64> {
    spec.validate()?;
    let g = &kernel.grid;
    let dx = g.dx();
    // mass the grid would miss: density at the edges times the payoff reach
    let edge = kernel.values[0].max(kernel.values[g.n - 1]);
    let reach = spec.strike.max(spec.spot) + g.width();
    if edge * dx * reach > 1e-8 * spec.spot {
        return Err(Error::Grid {
            message: format!("kernel tail mass {:e} too large for the payoff", edge * dx),
            suggested_min: g.x_min - g.width(),
            suggested_max: g.x_max + g.width(),
        });
    }
    let f = |x: f64| spec.payoff(spec.spot + x);
    let total = match kernel.form {
        KernelForm::Lattice => (0..g.n).map(|k| kernel.values[k] * dx * f(g.x(k))).sum::<f64>(),
        KernelForm::Density => {
            let kink = spec.strike - spec.spot;
            let v = &kernel.values;
            let mut s = 0.0;
            for k in 0..g.n - 1 {
                let a = g.x(k);
                let b = g.x(k + 1);
                let dens = |x: f64| {
                    let u = (x - a) / dx;
                    if k == 0 || k + 2 >= g.n {
                        return v[k] + (v[k + 1] - v[k]) * u;
                    }
                    let (p0, p1, p2, p3) = (v[k - 1], v[k], v[k + 1], v[k + 2]);
                    -p0 * u * (u - 1.0) * (u - 2.0) / 6.0 + p1 * (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0
                        - p2 * (u + 1.0) * u * (u - 2.0) / 2.0
                        + p3 * (u + 1.0) * u * (u - 1.0) / 6.0
                };
                let gauss = |lo: f64, hi: f64| {
                    let m = 0.5 * (lo + hi);
                    let h = 0.5 * (hi - lo);
                    let d = h * (0.6f64).sqrt();
                    h / 9.0 * (5.0 * dens(m - d) * f(m - d) + 8.0 * dens(m) * f(m) + 5.0 * dens(m + d) * f(m + d))
                };
                s += if kink > a && kink < b { gauss(a, kink) + gauss(kink, b) } else { gauss(a, b) };
            }
            s
        }
    };
    Ok(total)
}

/// Whether the pricing kernel at these parameters is a lattice law.
pub fn is_lattice(params: &ModelParams<f64>) -> bool {
    params.epsilon != 0.0 && params.jump_count() < LATTICE_THRESHOLD
}
