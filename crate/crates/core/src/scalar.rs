use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, Num};
use rustfft::FftNum;

/// Floating point scalar used by the kernel numerics: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field-like scalar for closed-form moment sequences.
///
/// Blanket-implemented, so `f64` works as well as exact types such as
/// `num_rational::BigRational`.
pub trait MomentScalar: Num + Clone + Debug {
    /// The integer `n` embedded in the scalar type.
    fn from_count(n: u64) -> Self {
        // double-and-add keeps this logarithmic for exact types
        let mut acc = Self::zero();
        let mut base = Self::one();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc + base.clone();
            }
            base = base.clone() + base;
            k >>= 1;
        }
        acc
    }

    fn pow_count(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out * self.clone();
        }
        out
    }
}

impl<T: Num + Clone + Debug> MomentScalar for T {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_count_matches_integers() {
        for n in [0u64, 1, 2, 3, 7, 64, 1000] {
            assert_eq!(<f64 as MomentScalar>::from_count(n), n as f64);
            assert_eq!(<i64 as MomentScalar>::from_count(n), n as i64);
        }
        assert_eq!(3.0f64.pow_count(4), 81.0);
    }
}
