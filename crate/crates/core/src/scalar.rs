//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All signal and statistics code is written against [`Scalar`], which is
//! implemented for `f32` and `f64`. The `f64` instantiation is the reference
//! one; the tolerances quoted in the test suites assume it.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating-point sample/statistic type.
pub trait Scalar: Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Sum + Debug + Display + Default {
    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    /// Conversion from a count or index.
    #[inline]
    fn from_len(n: usize) -> Self {
        Self::from_usize(n).expect("usize must be representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sorts a copy of `values` with a total order (NaNs last).
pub(crate) fn sorted<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or_else(|| a.is_nan().cmp(&b.is_nan())));
    v
}

/// Median of a slice; the mean of the two middle values for even lengths.
pub fn median<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let v = sorted(values);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0) })
}

/// Linear-interpolated quantile of already sorted data, `q` in `[0, 1]`.
///
/// Uses the inclusive definition: position `q * (n - 1)`.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], q: T) -> Option<T> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    if n == 1 {
        return Some(sorted[0]);
    }
    let pos = q.max(T::zero()).min(T::one()) * T::from_len(n - 1);
    let lo = pos.floor().to_usize().unwrap_or(0).min(n - 1);
    let hi = (lo + 1).min(n - 1);
    let frac = pos - T::from_len(lo);
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Quantile of unsorted data.
pub fn quantile<T: Scalar>(values: &[T], q: T) -> Option<T> {
    quantile_sorted(&sorted(values), q)
}
