//! Inharmonicity and noisiness descriptors for recorded music.
//!
//! The crate measures two per-track features:
//!
//! * **HR-inharmonicity**: one minus the median framewise HarmonicRatio, the
//!   peak of the normalized autocorrelation after its first zero crossing.
//! * **noisiness**: the negated peak prominence of the 25-cent band
//!   spectrum, i.e. `ln(GM/AM)` of the residual left after removing a
//!   sliding median.
//!
//! Both are computed on gated audio, optionally after equal-loudness
//! weighting. [`stats`] turns corpus-level feature tables into normalized
//! principal components and summaries, and [`synthlab`] holds the additive
//! synthesis experiments used to characterize the descriptors.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

// `!(x > 0.0)` is used deliberately so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod error;
pub mod features;
pub mod scalar;
pub mod stats;
pub mod synthlab;
pub mod weighting;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type AudioClip = audio::AudioClip<f64>;
pub type AudioClip32 = audio::AudioClip<f32>;
pub type Spectrum = audio::Spectrum<f64>;
pub type BandSpectrum = audio::BandSpectrum<f64>;
pub type Gated = audio::Gated<f64>;
pub type WeightCurve = weighting::WeightCurve<f64>;
pub type TrackFeatures = features::TrackFeatures<f64>;
pub type FeaturePair = features::FeaturePair<f64>;
pub type Projection = stats::Projection<f64>;
pub type SkewNormalizeParams = stats::SkewNormalizeParams<f64>;

/// Version string recorded with cached features.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
