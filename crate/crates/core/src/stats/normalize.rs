use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{median, quantile, Scalar};

/// Power-transform exponents for the (noisiness, HR-inharmonicity) axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub noisiness: f64,
    pub inharmonicity: f64,
}

impl Exponents {
    /// Exponents for features of unweighted audio.
    pub const RAW: Exponents = Exponents { noisiness: 0.18, inharmonicity: 0.21 };
    /// Exponents for features of loudness-weighted audio.
    pub const WEIGHTED: Exponents = Exponents { noisiness: 0.39, inharmonicity: 0.14 };
}

/// `t(x) = (p(x + offset) - median) / iqr` with the signed power
/// `p(v) = sign(v) |v|^exponent`. `median` and `iqr` are measured on the
/// transformed data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SkewNormalizeParams<T> {
    pub exponent: T,
    pub offset: T,
    pub median: T,
    pub iqr: T,
}

fn signed_pow<T: Scalar>(v: T, e: T) -> T {
    if v < T::zero() {
        -(-v).powf(e)
    } else {
        v.powf(e)
    }
}

/// Offset that moves the smallest value to zero; zero when nothing is negative.
pub fn noisiness_offset<T: Scalar>(values: &[T]) -> T {
    let min = values.iter().copied().fold(T::infinity(), T::min);
    if min.is_finite() && min < T::zero() {
        -min
    } else {
        T::zero()
    }
}

pub fn fit_skew_normalize<T: Scalar>(values: &[T], exponent: T, offset: T) -> Result<SkewNormalizeParams<T>> {
    if !(exponent > T::zero()) {
        return Err(Error::InvalidParameter("exponent must be positive".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("values must be finite".into()));
    }
    let t: Vec<T> = values.iter().map(|&v| signed_pow(v + offset, exponent)).collect();
    let (Some(m), Some(q1), Some(q3)) = (median(&t), quantile(&t, T::lit(0.25)), quantile(&t, T::lit(0.75))) else {
        return Err(Error::ZeroIqr);
    };
    let iqr = q3 - q1;
    if !(iqr > T::zero()) {
        return Err(Error::ZeroIqr);
    }
    Ok(SkewNormalizeParams { exponent, offset, median: m, iqr })
}

impl<T: Scalar> SkewNormalizeParams<T> {
    pub fn apply(&self, x: T) -> T {
        (signed_pow(x + self.offset, self.exponent) - self.median) / self.iqr
    }

    pub fn invert(&self, t: T) -> T {
        signed_pow(t * self.iqr + self.median, T::one() / self.exponent) - self.offset
    }
}
