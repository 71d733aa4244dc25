//! HR-inharmonicity and peak prominence / noisiness.

use crate::audio::{
    self, fft::Autocorrelator, gate, power_spectrum, rms_normalize, to_band_spectrum, AudioClip, BandSpectrum, GateConfig, Gated,
    DEFAULT_F_MIN,
};
use crate::error::{Error, Result};
use crate::scalar::{median, Scalar};
use crate::weighting::{apply_weighting, WeightCurve, DEFAULT_PHON};

/// Shortest frame that holds two periods of a 37.5 Hz fundamental at 22050 Hz.
pub const MIN_FRAME_LENGTH: usize = 1176;

/// Framing for the autocorrelation analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameConfig {
    pub frame_length: usize,
    pub hop: usize,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self { frame_length: 2048, hop: 1024 }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 || self.hop > self.frame_length {
            return Err(Error::InvalidParameter(format!(
                "hop must satisfy 0 < hop <= frame length (got hop {} for frame {})",
                self.hop, self.frame_length
            )));
        }
        if self.frame_length < MIN_FRAME_LENGTH {
            return Err(Error::InvalidParameter(format!("frame length {} is below the minimum of {MIN_FRAME_LENGTH}", self.frame_length)));
        }
        Ok(())
    }
}

/// Everything that influences a feature value. Two runs with equal
/// [`FeatureConfig::key`] produce identical features for identical audio.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub sample_rate: u32,
    pub frame: FrameConfig,
    pub gate: GateConfig,
    pub f_min: f64,
    /// Upper band edge; `None` means Nyquist.
    pub f_max: Option<f64>,
    /// Sliding-median length in bands.
    pub median_window: usize,
    pub phon: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            sample_rate: audio::ANALYSIS_RATE,
            frame: FrameConfig::default(),
            gate: GateConfig::default(),
            f_min: DEFAULT_F_MIN,
            f_max: None,
            median_window: 8,
            phon: DEFAULT_PHON,
        }
    }
}

impl FeatureConfig {
    /// Canonical string used for cache addressing.
    pub fn key(&self) -> String {
        let f_max = self.f_max.map_or_else(|| "nyquist".to_string(), |f| f.to_string());
        format!(
            "rate={};frame={};hop={};gate_db={};gate_frame={};fmin={};fmax={};median={};phon={}",
            self.sample_rate,
            self.frame.frame_length,
            self.frame.hop,
            self.gate.threshold_db,
            self.gate.frame_duration,
            self.f_min,
            f_max,
            self.median_window,
            self.phon
        )
    }
}

/// Reusable state for framewise HarmonicRatio.
struct HarmonicAnalyzer<T: Scalar> {
    ac: Autocorrelator<T>,
    frame: Vec<T>,
    prefix: Vec<T>,
    lagged: Vec<T>,
}

impl<T: Scalar> HarmonicAnalyzer<T> {
    fn new(max_frame: usize) -> Self {
        Self {
            ac: Autocorrelator::new(max_frame),
            frame: Vec::with_capacity(max_frame),
            prefix: Vec::with_capacity(max_frame + 1),
            lagged: Vec::new(),
        }
    }

    fn ratio(&mut self, raw: &[T]) -> Result<T> {
        let n = raw.len();
        if n < 4 {
            return Err(Error::InvalidParameter("frame too short".into()));
        }
        let mean = raw.iter().copied().sum::<T>() / T::from_len(n);
        self.frame.clear();
        self.frame.extend(raw.iter().map(|&v| v - mean));
        // A constant frame leaves only rounding residue after DC removal.
        let scale = raw.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
        let tiny = scale * T::epsilon() * T::from_len(n);
        if self.frame.iter().all(|&v| v.abs() <= tiny) {
            return Err(Error::ZeroFrame);
        }
        self.prefix.clear();
        self.prefix.push(T::zero());
        let mut acc = T::zero();
        for &v in &self.frame {
            acc = acc + v * v;
            self.prefix.push(acc);
        }
        let max_lag = n / 2;
        self.lagged.resize(max_lag + 1, T::zero());
        self.ac.lagged_products(&self.frame, &mut self.lagged);

        let total = self.prefix[n];
        let r = |m: usize| {
            let head = self.prefix[n - m];
            let tail = total - self.prefix[m];
            let denom = (head * tail).sqrt();
            if denom > T::zero() {
                self.lagged[m] / denom
            } else {
                T::zero()
            }
        };
        let Some(first) = (1..=max_lag).find(|&m| r(m) <= T::zero()) else {
            return Ok(T::zero());
        };
        let best = (first..=max_lag).map(r).fold(T::zero(), |a, b| a.max(b));
        Ok(best.max(T::zero()).min(T::one()))
    }
}

/// Maximum of the normalized autocorrelation after its first zero
/// crossing, for lags `1..=len/2`. Returns 0 when the autocorrelation never
/// becomes non-positive.
pub fn harmonic_ratio_frame<T: Scalar>(frame: &[T]) -> Result<T> {
    HarmonicAnalyzer::new(frame.len()).ratio(frame)
}

/// Frame start offsets within a segment of `len` samples. Segments shorter
/// than a frame but at least [`MIN_FRAME_LENGTH`] long form a single frame.
fn frame_spans(len: usize, cfg: FrameConfig) -> Vec<(usize, usize)> {
    if len >= cfg.frame_length {
        (0..=(len - cfg.frame_length) / cfg.hop).map(|i| (i * cfg.hop, cfg.frame_length)).collect()
    } else if len >= MIN_FRAME_LENGTH {
        vec![(0, len)]
    } else {
        Vec::new()
    }
}

/// Per-frame HarmonicRatio over every segment, skipping all-zero frames.
pub fn frame_harmonic_ratios<'a, T: Scalar>(segments: impl IntoIterator<Item = &'a [T]>, cfg: FrameConfig) -> Result<Vec<T>> {
    cfg.validate()?;
    let mut analyzer = HarmonicAnalyzer::new(cfg.frame_length);
    let mut out = Vec::new();
    for seg in segments {
        for (start, len) in frame_spans(seg.len(), cfg) {
            match analyzer.ratio(&seg[start..start + len]) {
                Ok(v) => out.push(v),
                Err(Error::ZeroFrame) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

/// Median framewise HarmonicRatio of a whole (ungated) mono clip.
pub fn harmonic_ratio<T: Scalar>(clip: &AudioClip<T>, cfg: FrameConfig) -> Result<T> {
    let values = frame_harmonic_ratios([clip.samples()], cfg)?;
    median(&values).ok_or(Error::NoValidFrames)
}

/// `1 - median HarmonicRatio` over the frames of a clip.
pub fn hr_inharmonicity<T: Scalar>(clip: &AudioClip<T>, cfg: FrameConfig) -> Result<T> {
    Ok(T::one() - harmonic_ratio(clip, cfg)?)
}

/// HR-inharmonicity of gated audio; frames never straddle a gating seam.
pub fn hr_inharmonicity_gated<T: Scalar>(gated: &Gated<T>, cfg: FrameConfig) -> Result<T> {
    hr_inharmonicity_runs(gated.clip.samples(), gated.runs(), cfg)
}

fn hr_inharmonicity_runs<T: Scalar>(samples: &[T], runs: &[std::ops::Range<usize>], cfg: FrameConfig) -> Result<T> {
    let values = frame_harmonic_ratios(runs.iter().map(|r| &samples[r.clone()]), cfg)?;
    Ok(T::one() - median(&values).ok_or(Error::NoValidFrames)?)
}

/// Geometric over arithmetic mean of a set of nonnegative values, with a
/// relative machine-epsilon floor so that empty bands do not zero it.
pub fn flatness_of<T: Scalar>(values: &[T]) -> T {
    if values.is_empty() {
        return T::one();
    }
    let n = T::from_len(values.len());
    let am = values.iter().copied().sum::<T>() / n;
    if am <= T::zero() {
        return T::one();
    }
    let floor = am * T::epsilon();
    let log_gm = values.iter().map(|&v| v.max(floor).ln()).sum::<T>() / n;
    let floored_am = values.iter().map(|&v| v.max(floor)).sum::<T>() / n;
    (log_gm - floored_am.ln()).exp()
}

/// Spectral flatness (Wiener entropy) of a band spectrum.
pub fn spectral_flatness<T: Scalar>(bands: &BandSpectrum<T>) -> T {
    flatness_of(&bands.band_power)
}

/// Sliding median with a window of `window` bands, `[i - window/2, i + window - window/2)`,
/// truncated at the array ends.
pub fn sliding_median<T: Scalar>(values: &[T], window: usize) -> Vec<T> {
    let n = values.len();
    let before = window / 2;
    let after = window - before;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after).min(n);
            median(&values[lo..hi]).unwrap()
        })
        .collect()
}

/// `-ln(WE)` of the median-filter residual of `values`, shifted so that its
/// minimum is one. Flat residuals give 0, isolated peaks give large values.
pub fn prominence_of_bands<T: Scalar>(values: &[T], window: usize) -> Result<T> {
    if window == 0 {
        return Err(Error::InvalidParameter("median window must be positive".into()));
    }
    if values.len() < window {
        return Err(Error::TooFewBands { needed: window, got: values.len() });
    }
    let smooth = sliding_median(values, window);
    let residual: Vec<T> = values.iter().zip(&smooth).map(|(&v, &m)| v - m).collect();
    let min = residual.iter().copied().fold(T::infinity(), T::min);
    // With d = residual - min the shifted residual is 1 + d; ln_1p keeps
    // precision when d is tiny.
    let n = T::from_len(residual.len());
    let mean_d = residual.iter().map(|&r| r - min).sum::<T>() / n;
    let mean_log = residual.iter().map(|&r| (r - min).ln_1p()).sum::<T>() / n;
    Ok((mean_d.ln_1p() - mean_log).max(T::zero()))
}

fn band_spectrum_for<T: Scalar>(clip: &AudioClip<T>, cfg: &FeatureConfig) -> Result<BandSpectrum<T>> {
    let normalized = rms_normalize(clip)?;
    let spec = power_spectrum(&normalized)?;
    to_band_spectrum(&spec, T::lit(cfg.f_min), cfg.f_max.map(T::lit))
}

/// Peak prominence of a (gated) clip.
pub fn peak_prominence<T: Scalar>(clip: &AudioClip<T>, cfg: &FeatureConfig) -> Result<T> {
    let bands = band_spectrum_for(clip, cfg)?;
    prominence_of_bands(&bands.band_power, cfg.median_window)
}

/// Noisiness is the negated peak prominence: 0 for noise, negative for peaky spectra.
pub fn noisiness<T: Scalar>(clip: &AudioClip<T>, cfg: &FeatureConfig) -> Result<T> {
    Ok(-peak_prominence(clip, cfg)?)
}

/// Noisiness restricted to each `[edges[i], edges[i+1])` frequency band.
pub fn band_noisiness<T: Scalar>(clip: &AudioClip<T>, edges: &[f64], cfg: &FeatureConfig) -> Result<Vec<T>> {
    if edges.len() < 2 {
        return Err(Error::InvalidParameter("need at least two band edges".into()));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("band edges must be strictly ascending".into()));
    }
    let bands = band_spectrum_for(clip, cfg)?;
    edges
        .windows(2)
        .map(|w| {
            let sub = bands.restrict(T::lit(w[0]), T::lit(w[1]));
            prominence_of_bands(&sub.band_power, cfg.median_window).map(|p| -p)
        })
        .collect()
}

/// Per-track feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackFeatures<T> {
    pub hr_inharmonicity_raw: T,
    pub noisiness_raw: T,
    pub hr_inharmonicity_weighted: T,
    pub noisiness_weighted: T,
    pub pc1: Option<T>,
    pub pc2: Option<T>,
}

/// HR-inharmonicity and noisiness of one variant of the audio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeaturePair<T> {
    pub hr_inharmonicity: T,
    pub noisiness: T,
}

/// Features of already gated audio, optionally weighted first.
pub fn gated_features<T: Scalar>(gated: &Gated<T>, weights: Option<&WeightCurve<T>>, cfg: &FeatureConfig) -> Result<FeaturePair<T>> {
    let clip = match weights {
        Some(w) => apply_weighting(&gated.clip, w)?,
        None => gated.clip.clone(),
    };
    Ok(FeaturePair { hr_inharmonicity: hr_inharmonicity_runs(clip.samples(), gated.runs(), cfg.frame)?, noisiness: noisiness(&clip, cfg)? })
}

/// Gates a prepared mono clip once and measures both features on the raw
/// and on the weighted retained audio.
pub fn track_features<T: Scalar>(clip: &AudioClip<T>, weights: &WeightCurve<T>, cfg: &FeatureConfig) -> Result<TrackFeatures<T>> {
    let gated = gate(clip, cfg.gate)?;
    let raw = gated_features(&gated, None, cfg)?;
    let weighted = gated_features(&gated, Some(weights), cfg)?;
    Ok(TrackFeatures {
        hr_inharmonicity_raw: raw.hr_inharmonicity,
        noisiness_raw: raw.noisiness,
        hr_inharmonicity_weighted: weighted.hr_inharmonicity,
        noisiness_weighted: weighted.noisiness,
        pc1: None,
        pc2: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthlab::{add_noise, render, white_noise, ToneSpec};
    use crate::weighting::default_weights;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn sine(f: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (TAU * f * i as f64 / 22050.0).sin()).collect()
    }

    #[test]
    fn pure_sine_frame_is_periodic() {
        assert!(harmonic_ratio_frame(&sine(220.0, 2048)).unwrap() >= 0.999);
    }

    #[test]
    fn harmonic_tone_frame_is_near_one() {
        let tone = render::<f64>(&ToneSpec::harmonic(220.0, 10, 0.8)).unwrap();
        let hr = harmonic_ratio_frame(&tone.samples()[..2048]).unwrap();
        assert!(hr > 0.99, "{hr}");
    }

    #[test]
    fn zero_frame_is_an_error() {
        assert!(matches!(harmonic_ratio_frame(&[0.0f64; 2048]), Err(Error::ZeroFrame)));
        // A constant frame is all zero after DC removal.
        assert!(matches!(harmonic_ratio_frame(&[0.3f64; 2048]), Err(Error::ZeroFrame)));
    }

    #[test]
    fn no_zero_crossing_gives_zero() {
        // A slow ramp: the autocorrelation stays positive over the lag range.
        let ramp: Vec<f64> = (0..2048).map(|i| (i as f64 / 2048.0 * 1.5).sin()).collect();
        assert_eq!(harmonic_ratio_frame(&ramp).unwrap(), 0.0);
    }

    #[test]
    fn harmonic_ratio_frame_matches_direct_definition() {
        let x: Vec<f64> = white_noise(0.1, 22050, 4).samples()[..1500].to_vec();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let x: Vec<f64> = x.iter().map(|v| v - mean).collect();
        let n = x.len();
        let r: Vec<f64> = (1..=n / 2)
            .map(|m| {
                let num: f64 = (0..n - m).map(|i| x[i] * x[i + m]).sum();
                let a: f64 = (0..n - m).map(|i| x[i] * x[i]).sum();
                let b: f64 = (m..n).map(|i| x[i] * x[i]).sum();
                num / (a * b).sqrt()
            })
            .collect();
        let first = r.iter().position(|&v| v <= 0.0).unwrap();
        let expected = r[first..].iter().cloned().fold(0.0, f64::max);
        let got = harmonic_ratio_frame(&x).unwrap();
        assert!((got - expected).abs() < 1e-10);
    }

    #[test]
    fn white_noise_frames_have_low_ratio() {
        let mut values: Vec<f64> =
            (0..1000).map(|seed| harmonic_ratio_frame(&white_noise(0.1, 22050, seed).samples()[..2048]).unwrap()).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Observed 95th percentile over these seeds is ~0.10.
        assert!(values[949] < 0.3, "p95 {}", values[949]);
    }

    #[test]
    fn frame_config_validation() {
        assert!(FrameConfig::default().validate().is_ok());
        assert!(FrameConfig { frame_length: 1000, hop: 500 }.validate().is_err());
        assert!(FrameConfig { frame_length: 2048, hop: 0 }.validate().is_err());
        assert!(FrameConfig { frame_length: 2048, hop: 4096 }.validate().is_err());
    }

    #[test]
    fn hr_inharmonicity_of_harmonic_tone() {
        let tone = render::<f64>(&ToneSpec::harmonic(220.0, 10, 0.8)).unwrap();
        let v = hr_inharmonicity(&tone, FrameConfig::default()).unwrap();
        assert!(v <= 0.01, "{v}");
    }

    #[test]
    fn hr_inharmonicity_grows_as_snr_falls() {
        let tone = render::<f64>(&ToneSpec::harmonic(220.0, 10, 0.8)).unwrap();
        let mut last = hr_inharmonicity(&tone, FrameConfig::default()).unwrap();
        for snr in [40.0, 20.0, 13.5, 6.0] {
            let noisy = add_noise(&tone, snr, 11).unwrap();
            let v = hr_inharmonicity(&noisy, FrameConfig::default()).unwrap();
            assert!(v >= last, "snr {snr}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn flatness_of_equal_values_is_one() {
        assert!((flatness_of(&[0.25f64; 40]) - 1.0).abs() < 1e-12);
        assert!(flatness_of(&[1.0f64, 0.0, 1.0]) < 1e-4);
    }

    #[test]
    fn sliding_median_edges_are_truncated() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        let m = sliding_median(&v, 8);
        // i = 0 sees [0, 4): median of 1..4.
        assert_eq!(m[0], 2.5);
        // i = 5 sees [1, 9): 2..9.
        assert_eq!(m[5], 5.5);
        assert_eq!(m[9], 8.0);
    }

    #[test]
    fn prominence_of_flat_and_peaky_bands() {
        assert_eq!(prominence_of_bands(&[3.0f64; 30], 8).unwrap(), 0.0);
        let mut peaky = vec![0.0f64; 30];
        peaky[12] = 5.0;
        // Residual is 5 at the peak and 0 elsewhere: ln(1 + 5/30) - ln(6)/30.
        let expected = (1.0f64 + 5.0 / 30.0).ln() - 6f64.ln() / 30.0;
        assert!((prominence_of_bands(&peaky, 8).unwrap() - expected).abs() < 1e-12);
        assert!(matches!(prominence_of_bands(&[1.0f64; 5], 8), Err(Error::TooFewBands { .. })));
    }

    #[test]
    fn prominence_is_gain_invariant() {
        let cfg = FeatureConfig::default();
        let tone = render::<f64>(&ToneSpec::harmonic(220.0, 10, 0.8)).unwrap();
        let mix = add_noise(&tone, 10.0, 3).unwrap();
        let a = peak_prominence(&mix, &cfg).unwrap();
        let b = peak_prominence(&mix.scaled(0.5), &cfg).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn noisiness_orders_noise_above_tones() {
        let cfg = FeatureConfig::default();
        let white = noisiness(&white_noise(10.0, 22050, 1), &cfg).unwrap();
        let tone = render::<f64>(&ToneSpec::harmonic(220.0, 10, 0.8)).unwrap();
        let tonal = noisiness(&tone, &cfg).unwrap();
        let mixed = noisiness(&add_noise(&tone, 0.0, 2).unwrap(), &cfg).unwrap();
        assert!(white <= 0.0 && white > -1e-9);
        assert!(tonal < mixed && mixed < white, "{tonal} {mixed} {white}");
    }

    #[test]
    fn band_noisiness_isolates_the_peak() {
        let cfg = FeatureConfig::default();
        let clip = AudioClip::mono(sine(1000.0, 22050), 22050);
        let v = band_noisiness(&clip, &[20.0, 500.0, 2000.0], &cfg).unwrap();
        assert!(v[0].abs() < 1e-12, "{v:?}");
        assert!(v[1] < -1e-6, "{v:?}");

        let white = band_noisiness(&white_noise(10.0, 22050, 8), &[100.0, 1000.0, 8000.0], &cfg).unwrap();
        assert!(white.iter().all(|v| v.abs() < 1e-9), "{white:?}");

        assert!(matches!(band_noisiness(&clip, &[1000.0, 1050.0], &cfg), Err(Error::TooFewBands { .. })));
        assert!(band_noisiness(&clip, &[500.0], &cfg).is_err());
    }

    #[test]
    fn clipped_sine_raises_prominence_in_several_bands() {
        let cfg = FeatureConfig::default();
        let pure = AudioClip::mono(sine(220.0, 22050), 22050);
        let clipped = AudioClip::mono(sine(220.0, 22050).iter().map(|v| v.clamp(-0.3, 0.3)).collect(), 22050);
        let edges = [400.0, 800.0, 1600.0, 3200.0];
        let p = band_noisiness(&pure, &edges, &cfg).unwrap();
        let c = band_noisiness(&clipped, &edges, &cfg).unwrap();
        // Odd harmonics 660, 1100/1540, 2420... land in every band.
        for (a, b) in p.iter().zip(&c) {
            assert!(b < a, "{p:?} {c:?}");
        }
    }

    #[test]
    fn track_features_on_a_1khz_tone() {
        let cfg = FeatureConfig::default();
        let tone = render::<f64>(&ToneSpec::harmonic(1000.0, 1, 0.8)).unwrap();
        let f = track_features(&tone, &default_weights(), &cfg).unwrap();
        assert!((f.hr_inharmonicity_raw - f.hr_inharmonicity_weighted).abs() < 0.005);
        assert!(f.pc1.is_none() && f.pc2.is_none());
        let silence = AudioClip::mono(vec![0.0f64; 22050], 22050);
        assert!(track_features(&silence, &default_weights(), &cfg).is_err());
    }

    #[test]
    fn weighting_makes_bass_tone_plus_treble_noise_noisier() {
        let cfg = FeatureConfig::default();
        let tone = AudioClip::mono(sine(40.0, 44100), 22050);
        let noise = crate::synthlab::band_noise(2.0, 22050, 2500.0, 3500.0, 7);
        let noise = noise.scaled(tone.rms() / noise.rms());
        let f = track_features(&tone.mix(&noise).unwrap(), &default_weights(), &cfg).unwrap();
        assert!(f.noisiness_weighted > f.noisiness_raw, "{f:?}");
    }

    #[test]
    fn config_key_is_canonical() {
        let a = FeatureConfig::default();
        assert_eq!(a.key(), "rate=22050;frame=2048;hop=1024;gate_db=-20;gate_frame=0.1;fmin=27.5;fmax=nyquist;median=8;phon=50");
        let b = FeatureConfig { frame: FrameConfig { frame_length: 4096, hop: 1024 }, ..a.clone() };
        assert_ne!(a.key(), b.key());
    }
}
