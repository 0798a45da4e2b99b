//! Closed-form moment sequences of the blurring density.
//!
//! Flat metric: `H_i = 2 eps^i / ((i + 1)(i + 2))`.
//!
//! Metric `g(x) = exp(-alpha x)`: `H_0 = 1` and, for `k = 2, 3, ...`,
//!
//! ```text
//! H_{k-1} = (2 k (k - 1) H_{k-2} - 4 eps^(k-2)) / (k alpha)
//! ```
//!
//! Both are generic over [`MomentScalar`], so exact rationals reproduce them
//! without rounding.

use std::fmt::Display;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::MomentScalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence<T> {
    pub epsilon: T,
    /// Zero for the flat case.
    pub alpha: T,
    pub values: Vec<T>,
}

impl<T: MomentScalar> MomentSequence<T> {
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// `k alpha H_{k-1} - 2 k (k - 1) H_{k-2} + 4 eps^(k-2)` for `k = 2..=N + 1`.
    ///
    /// With `alpha = 0` this is the recurrence's limiting form, which the flat
    /// sequence satisfies identically.
    pub fn recurrence_residuals(&self) -> Vec<T> {
        (2..=self.values.len())
            .map(|k| {
                let kk = T::from_count(k as u64);
                kk * self.alpha.clone() * self.values[k - 1].clone()
                    - T::from_count(2 * k as u64 * (k as u64 - 1)) * self.values[k - 2].clone()
                    + T::from_count(4) * self.epsilon.pow_count(k as u32 - 2)
            })
            .collect()
    }
}

impl<T: MomentScalar + Display> MomentSequence<T> {
    pub fn write_csv<W: Write>(&self, mut w: W, header: &str) -> Result<()> {
        writeln!(w, "{header}")?;
        writeln!(w, "order,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{v}")?;
        }
        Ok(())
    }
}

pub fn lemma1_moments<T: MomentScalar>(epsilon: T, order: usize) -> MomentSequence<T> {
    let mut values = Vec::with_capacity(order + 1);
    let mut pw = T::one();
    for i in 0..=order as u64 {
        values.push(T::from_count(2) * pw.clone() / T::from_count((i + 1) * (i + 2)));
        pw = pw * epsilon.clone();
    }
    MomentSequence { epsilon, alpha: T::zero(), values }
}

/// Moments for `g(x) = exp(-alpha x)`; `alpha = 0` is rejected because the
/// recurrence divides by it.
pub fn lemma2_moments<T: MomentScalar>(epsilon: T, alpha: T, order: usize) -> Result<MomentSequence<T>> {
    if alpha.is_zero() {
        return Err(Error::UseLemma1);
    }
    let mut values = vec![T::one()];
    let mut eps_pow = T::one();
    for k in 2..=(order as u64 + 1) {
        let prev = values[(k - 2) as usize].clone();
        let num = T::from_count(2 * k * (k - 1)) * prev - T::from_count(4) * eps_pow.clone();
        values.push(num / (T::from_count(k) * alpha.clone()));
        eps_pow = eps_pow * epsilon.clone();
    }
    values.truncate(order + 1);
    Ok(MomentSequence { epsilon, alpha, values })
}
