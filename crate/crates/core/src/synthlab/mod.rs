//! Additive synthesis, seeded noise and the synthetic experiments.

mod experiments;

pub use experiments::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;

use crate::audio::{fft, peak_normalize, AudioClip, ANALYSIS_RATE};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Replaces the computed partial with 1-based index `index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialOverride {
    pub index: usize,
    pub frequency: f64,
    pub amplitude: f64,
}

/// A sinusoidal component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partial {
    pub frequency: f64,
    pub amplitude: f64,
}

/// Complex tone with geometrically decaying partials, optionally stretched
/// by the stiff-string model `f_k = k f0 sqrt(1 + B k^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneSpec {
    pub f0: f64,
    pub n_partials: usize,
    /// Amplitude of partial `k` is `s^(k-1)`.
    pub s: f64,
    pub b_coeff: f64,
    pub partial_overrides: Vec<PartialOverride>,
    pub duration: f64,
    pub sample_rate: u32,
}

impl ToneSpec {
    /// One second of a harmonic tone at the analysis rate.
    pub fn harmonic(f0: f64, n_partials: usize, s: f64) -> Self {
        Self { f0, n_partials, s, b_coeff: 0.0, partial_overrides: Vec::new(), duration: 1.0, sample_rate: ANALYSIS_RATE }
    }

    pub fn with_b(mut self, b_coeff: f64) -> Self {
        self.b_coeff = b_coeff;
        self
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn with_sample_rate(mut self, sample_rate: u32) -> Self {
        self.sample_rate = sample_rate;
        self
    }

    pub fn with_override(mut self, o: PartialOverride) -> Self {
        self.partial_overrides.push(o);
        self
    }

    /// Frequency of partial `k` (1-based) before overrides.
    pub fn partial_frequency(&self, k: usize) -> f64 {
        let k = k as f64;
        if self.b_coeff > 0.0 {
            k * self.f0 * (1.0 + self.b_coeff * k * k).sqrt()
        } else {
            k * self.f0
        }
    }

    /// All partials with overrides applied, without any Nyquist check.
    pub fn partials(&self) -> Vec<Partial> {
        let mut out: Vec<Partial> =
            (1..=self.n_partials).map(|k| Partial { frequency: self.partial_frequency(k), amplitude: self.s.powi(k as i32 - 1) }).collect();
        for o in &self.partial_overrides {
            if (1..=self.n_partials).contains(&o.index) {
                out[o.index - 1] = Partial { frequency: o.frequency, amplitude: o.amplitude };
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.f0 > 0.0) {
            return bad("f0 must be positive");
        }
        if self.n_partials == 0 {
            return bad("a tone needs at least one partial");
        }
        if !(self.s > 0.0 && self.s < 1.0 || self.n_partials == 1) {
            return bad("decay factor s must lie in (0, 1)");
        }
        if !(self.b_coeff >= 0.0) {
            return bad("inharmonicity coefficient must be nonnegative");
        }
        if !(self.duration > 0.0) || self.sample_rate == 0 {
            return bad("duration and sample rate must be positive");
        }
        if let Some(o) = self.partial_overrides.iter().find(|o| !(1..=self.n_partials).contains(&o.index)) {
            return Err(Error::InvalidParameter(format!("override index {} is outside the tone", o.index)));
        }
        let nyquist = self.sample_rate as f64 / 2.0;
        for (i, p) in self.partials().iter().enumerate() {
            if p.frequency >= nyquist || !(p.frequency > 0.0) {
                return Err(Error::AboveNyquist { index: i + 1, freq: p.frequency, nyquist });
            }
        }
        Ok(())
    }

    fn sample_count(&self) -> usize {
        (self.duration * self.sample_rate as f64).round() as usize
    }
}

/// Zero-phase sum of sines, not normalized.
pub fn synthesize(partials: &[Partial], n_samples: usize, sample_rate: u32) -> Vec<f64> {
    let mut out = vec![0.0; n_samples];
    add_partials(&mut out, partials, sample_rate);
    out
}

pub(crate) fn add_partials(out: &mut [f64], partials: &[Partial], sample_rate: u32) {
    let rate = sample_rate as f64;
    for p in partials {
        let w = TAU * p.frequency / rate;
        for (i, v) in out.iter_mut().enumerate() {
            *v += p.amplitude * (w * i as f64).sin();
        }
    }
}

/// Peak-normalized rendering of `spec`.
pub fn render<T: Scalar>(spec: &ToneSpec) -> Result<AudioClip<T>> {
    spec.validate()?;
    let x = synthesize(&spec.partials(), spec.sample_count(), spec.sample_rate);
    let clip = AudioClip::mono(x.into_iter().map(T::lit).collect(), spec.sample_rate);
    peak_normalize(&clip)
}

/// Like [`render`] but silently drops partials at or above Nyquist.
pub fn render_truncated<T: Scalar>(spec: &ToneSpec) -> Result<AudioClip<T>> {
    let nyquist = spec.sample_rate as f64 / 2.0;
    let kept: Vec<Partial> = spec.partials().into_iter().filter(|p| p.frequency < nyquist).collect();
    if kept.is_empty() {
        return Err(Error::AboveNyquist { index: 1, freq: spec.f0, nyquist });
    }
    let x = synthesize(&kept, spec.sample_count(), spec.sample_rate);
    peak_normalize(&AudioClip::mono(x.into_iter().map(T::lit).collect(), spec.sample_rate))
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_count(duration: f64, sample_rate: u32) -> usize {
    assert!(duration > 0.0 && sample_rate > 0, "duration and sample rate must be positive");
    (duration * sample_rate as f64).round() as usize
}

pub(crate) fn gaussian(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn normalized(x: Vec<f64>, sample_rate: u32) -> AudioClip<f64> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    AudioClip::mono(x.into_iter().map(|v| v / peak).collect(), sample_rate)
}

/// Seeded Gaussian white noise, peak-normalized.
pub fn white_noise(duration: f64, sample_rate: u32, seed: u64) -> AudioClip<f64> {
    let n = sample_count(duration, sample_rate);
    normalized(gaussian(n, &mut rng_for(seed, 0)), sample_rate)
}

/// Noise synthesized in the frequency domain: each positive bin gets a
/// complex Gaussian coefficient scaled by `amplitude(f)`.
fn shaped_noise(n: usize, sample_rate: u32, seed: u64, amplitude: impl Fn(f64) -> f64) -> AudioClip<f64> {
    let mut rng = rng_for(seed, 0);
    let df = sample_rate as f64 / n as f64;
    let mut spec = vec![Complex::new(0.0, 0.0); n];
    for k in 1..=n / 2 {
        let a = amplitude(k as f64 * df);
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        if n.is_multiple_of(2) && k == n / 2 {
            spec[k] = Complex::new(re * a, 0.0);
        } else {
            spec[k] = Complex::new(re * a, im * a);
            spec[n - k] = spec[k].conj();
        }
    }
    normalized(fft::inverse_real(spec), sample_rate)
}

/// Seeded pink noise: power proportional to `1/f` (-3 dB per octave).
pub fn pink_noise(duration: f64, sample_rate: u32, seed: u64) -> AudioClip<f64> {
    shaped_noise(sample_count(duration, sample_rate), sample_rate, seed, |f| 1.0 / f.sqrt())
}

/// Seeded noise with a flat spectrum inside `[lo, hi)` Hz and nothing outside.
pub fn band_noise(duration: f64, sample_rate: u32, lo: f64, hi: f64, seed: u64) -> AudioClip<f64> {
    assert!(lo < hi, "empty noise band");
    shaped_noise(sample_count(duration, sample_rate), sample_rate, seed, |f| if (lo..hi).contains(&f) { 1.0 } else { 0.0 })
}

/// Adds seeded white noise scaled so that `rms(clip) / rms(noise) = 10^(snr_db/20)`.
/// The sum is not renormalized.
pub fn add_noise<T: Scalar>(clip: &AudioClip<T>, snr_db: f64, seed: u64) -> Result<AudioClip<T>> {
    let signal_rms = clip.rms().as_f64();
    if clip.is_empty() || signal_rms == 0.0 {
        return Err(Error::AllZero);
    }
    let noise = gaussian(clip.samples().len(), &mut rng_for(seed, 0));
    let noise_rms = (noise.iter().map(|v| v * v).sum::<f64>() / noise.len() as f64).sqrt();
    let gain = signal_rms / noise_rms / 10f64.powf(snr_db / 20.0);
    Ok(clip.with_samples(clip.samples().iter().zip(&noise).map(|(&s, &n)| s + T::lit(n * gain)).collect()))
}
