//! Equal-loudness weighting from the ISO 226:2003 contour family.
//!
//! The contour is evaluated with the standard's closed-form expression over
//! its 29 tabulated support frequencies; the weight applied to audio is the
//! contour inverted and anchored to unity gain at 1 kHz.

use crate::audio::{fft, AudioClip};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Support frequencies, Hz.
pub const ISO226_FREQS: [f64; 29] = [
    20.0, 25.0, 31.5, 40.0, 50.0, 63.0, 80.0, 100.0, 125.0, 160.0, 200.0, 250.0, 315.0, 400.0, 500.0, 630.0, 800.0, 1000.0, 1250.0, 1600.0,
    2000.0, 2500.0, 3150.0, 4000.0, 5000.0, 6300.0, 8000.0, 10000.0, 12500.0,
];

/// Loudness perception exponent.
const ALPHA_F: [f64; 29] = [
    0.532, 0.506, 0.480, 0.455, 0.432, 0.409, 0.387, 0.367, 0.349, 0.330, 0.315, 0.301, 0.288, 0.276, 0.267, 0.259, 0.253, 0.250, 0.246,
    0.244, 0.243, 0.243, 0.243, 0.242, 0.242, 0.245, 0.254, 0.271, 0.301,
];

/// Magnitude of the linear transfer function normalized at 1 kHz, dB.
const L_U: [f64; 29] = [
    -31.6, -27.2, -23.0, -19.1, -15.9, -13.0, -10.3, -8.1, -6.2, -4.5, -3.1, -2.0, -1.1, -0.4, 0.0, 0.3, 0.5, 0.0, -2.7, -4.1, -1.0, 1.7,
    2.5, 1.2, -2.1, -7.1, -11.2, -10.7, -3.1,
];

/// Threshold of hearing, dB SPL.
const T_F: [f64; 29] = [
    78.5, 68.7, 59.5, 51.1, 44.0, 37.5, 31.5, 26.5, 22.1, 17.9, 14.4, 11.4, 8.6, 6.2, 4.4, 3.0, 2.2, 2.4, 3.5, 1.7, -1.3, -4.2, -6.0, -5.4,
    -1.5, 6.0, 12.6, 13.9, 12.3,
];

const ANCHOR_INDEX: usize = 17;

/// Default loudness level: the median contour.
pub const DEFAULT_PHON: f64 = 50.0;

/// Equal-loudness contour sampled at the support frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct LoudnessContour {
    pub phon_level: f64,
    pub freqs: Vec<f64>,
    pub spl: Vec<f64>,
}

/// Sound pressure level (dB) judged as loud as `phon` at 1 kHz.
pub fn iso226_contour(phon: f64) -> Result<LoudnessContour> {
    if !(0.0..=90.0).contains(&phon) {
        return Err(Error::PhonOutOfRange(phon));
    }
    let spl = (0..ISO226_FREQS.len())
        .map(|i| {
            let a_f = 4.47e-3 * (10f64.powf(0.025 * phon) - 1.15) + (0.4 * 10f64.powf((T_F[i] + L_U[i]) / 10.0 - 9.0)).powf(ALPHA_F[i]);
            (10.0 / ALPHA_F[i]) * a_f.log10() - L_U[i] + 94.0
        })
        .collect();
    Ok(LoudnessContour { phon_level: phon, freqs: ISO226_FREQS.to_vec(), spl })
}

/// Frequency-dependent linear gain.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightCurve<T> {
    pub freqs: Vec<T>,
    pub linear_gain: Vec<T>,
}

/// `g(f) = 10^((SPL(1 kHz) - SPL(f)) / 20)` at the support frequencies.
pub fn contour_to_weights<T: Scalar>(contour: &LoudnessContour) -> WeightCurve<T> {
    let anchor = contour.freqs.iter().position(|&f| f == 1000.0).map(|i| contour.spl[i]).unwrap_or(contour.spl[ANCHOR_INDEX]);
    WeightCurve {
        freqs: contour.freqs.iter().map(|&f| T::lit(f)).collect(),
        linear_gain: contour.spl.iter().map(|&s| T::lit(10f64.powf((anchor - s) / 20.0))).collect(),
    }
}

/// The default 50-phon weighting curve.
pub fn default_weights<T: Scalar>() -> WeightCurve<T> {
    contour_to_weights(&iso226_contour(DEFAULT_PHON).expect("50 phon is in range"))
}

impl<T: Scalar> WeightCurve<T> {
    /// Curve with unit gain everywhere.
    pub fn unity() -> Self {
        WeightCurve { freqs: ISO226_FREQS.iter().map(|&f| T::lit(f)).collect(), linear_gain: vec![T::one(); ISO226_FREQS.len()] }
    }

    /// Gain at `freq`: linear in dB against log frequency between support
    /// points, held at the boundary values outside them.
    pub fn gain_at(&self, freq: T) -> T {
        let n = self.freqs.len();
        if freq <= self.freqs[0] {
            return self.linear_gain[0];
        }
        if freq >= self.freqs[n - 1] {
            return self.linear_gain[n - 1];
        }
        let i = self.freqs.partition_point(|&f| f <= freq) - 1;
        let (f0, f1) = (self.freqs[i], self.freqs[i + 1]);
        let (g0, g1) = (self.linear_gain[i], self.linear_gain[i + 1]);
        if g0 == g1 {
            return g0;
        }
        let t = (freq / f0).ln() / (f1 / f0).ln();
        let db0 = T::lit(20.0) * g0.log10();
        let db1 = T::lit(20.0) * g1.log10();
        T::lit(10.0).powf((db0 + (db1 - db0) * t) / T::lit(20.0))
    }

    pub fn gain_db_at(&self, freq: T) -> T {
        T::lit(20.0) * self.gain_at(freq).log10()
    }
}

/// Zero-phase weighting: every bin of the whole-signal transform is scaled
/// by the curve's gain at its frequency.
pub fn apply_weighting<T: Scalar>(clip: &AudioClip<T>, weights: &WeightCurve<T>) -> Result<AudioClip<T>> {
    if !clip.is_mono() {
        return Err(Error::InvalidParameter("weighting expects a mono clip".into()));
    }
    if clip.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let n = clip.frames();
    let mut spec = fft::forward_real(clip.samples());
    let df = T::from_u32(clip.sample_rate()).unwrap() / T::from_len(n);
    for k in 0..=n / 2 {
        let g = weights.gain_at(T::from_len(k) * df);
        spec[k] = spec[k] * g;
        if k != 0 && n - k != k {
            spec[n - k] = spec[n - k] * g;
        }
    }
    Ok(clip.with_samples(fft::inverse_real(spec)))
}
