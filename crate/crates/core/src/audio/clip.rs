use crate::audio::fft;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sampled waveform. Stereo samples are interleaved `L R L R ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T> {
    samples: Vec<T>,
    sample_rate: u32,
    channels: u16,
}

impl<T: Scalar> AudioClip<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32, channels: u16) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        if channels != 1 && channels != 2 {
            return Err(Error::InvalidParameter(format!("{channels} channels; only mono and stereo are supported")));
        }
        if !samples.len().is_multiple_of(channels as usize) {
            return Err(Error::InvalidParameter("interleaved sample count is not a multiple of the channel count".into()));
        }
        Ok(Self { samples, sample_rate, channels })
    }

    /// Mono clip. Panics on a zero sample rate.
    pub fn mono(samples: Vec<T>, sample_rate: u32) -> Self {
        assert!(sample_rate > 0, "sample rate must be positive");
        Self { samples, sample_rate, channels: 1 }
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> u16 {
        self.channels
    }

    pub fn is_mono(&self) -> bool {
        self.channels == 1
    }

    /// Number of sample frames (samples per channel).
    pub fn frames(&self) -> usize {
        self.samples.len() / self.channels as usize
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.frames() as f64 / self.sample_rate as f64
    }

    pub fn nyquist(&self) -> T {
        T::from_u32(self.sample_rate).unwrap() / T::lit(2.0)
    }

    pub fn peak(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn mean_square(&self) -> T {
        mean_square(&self.samples)
    }

    pub fn rms(&self) -> T {
        self.mean_square().sqrt()
    }

    /// Same layout, new samples.
    pub fn with_samples(&self, samples: Vec<T>) -> Self {
        debug_assert_eq!(samples.len() % self.channels as usize, 0);
        Self { samples, sample_rate: self.sample_rate, channels: self.channels }
    }

    /// Converts the samples to another scalar type.
    pub fn cast<U: Scalar>(&self) -> AudioClip<U> {
        AudioClip {
            samples: self.samples.iter().map(|&x| U::lit(x.as_f64())).collect(),
            sample_rate: self.sample_rate,
            channels: self.channels,
        }
    }

    pub fn scaled(&self, gain: T) -> Self {
        self.with_samples(self.samples.iter().map(|&x| x * gain).collect())
    }

    /// Sample-wise sum; both clips must share rate and layout. The result has
    /// the length of the longer clip.
    pub fn mix(&self, other: &Self) -> Result<Self> {
        if self.sample_rate != other.sample_rate || self.channels != other.channels {
            return Err(Error::InvalidParameter("cannot mix clips with different layouts".into()));
        }
        let n = self.samples.len().max(other.samples.len());
        let at = |v: &[T], i: usize| v.get(i).copied().unwrap_or_else(T::zero);
        Ok(self.with_samples((0..n).map(|i| at(&self.samples, i) + at(&other.samples, i)).collect()))
    }

    /// Concatenates `other` after `self`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.sample_rate != other.sample_rate || self.channels != other.channels {
            return Err(Error::InvalidParameter("cannot concatenate clips with different layouts".into()));
        }
        let mut s = self.samples.clone();
        s.extend_from_slice(&other.samples);
        Ok(self.with_samples(s))
    }

    /// Channel-mean downmix. Mono clips are returned unchanged.
    pub fn downmix(&self) -> Self {
        if self.channels == 1 {
            return self.clone();
        }
        let half = T::lit(0.5);
        let samples = self.samples.chunks_exact(2).map(|lr| (lr[0] + lr[1]) * half).collect();
        Self { samples, sample_rate: self.sample_rate, channels: 1 }
    }
}

pub(crate) fn mean_square<T: Scalar>(x: &[T]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    x.iter().map(|&v| v * v).sum::<T>() / T::from_len(x.len())
}

/// Default analysis rate.
pub const ANALYSIS_RATE: u32 = 22_050;

/// Downmixes to mono, then resamples to `target_rate` with an ideal
/// (FFT-domain) band-limited resampler.
pub fn prepare<T: Scalar>(clip: &AudioClip<T>, target_rate: u32) -> Result<AudioClip<T>> {
    if target_rate == 0 {
        return Err(Error::InvalidParameter("target rate must be positive".into()));
    }
    let mono = clip.downmix();
    if mono.sample_rate == target_rate {
        return Ok(mono);
    }
    let samples = resample(&mono.samples, mono.sample_rate, target_rate);
    Ok(AudioClip { samples, sample_rate: target_rate, channels: 1 })
}

/// Whole-signal FFT resampling: the spectrum is truncated (or zero padded)
/// at the lower of the two Nyquist frequencies.
pub(crate) fn resample<T: Scalar>(x: &[T], from: u32, to: u32) -> Vec<T> {
    let n = x.len();
    if n == 0 || from == to {
        return x.to_vec();
    }
    let m = ((n as u128 * to as u128 + from as u128 / 2) / from as u128).max(1) as usize;
    let spec = fft::forward_real(x);
    if m == n {
        return x.to_vec();
    }
    let zero = rustfft::num_complex::Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; m];
    let keep = n.min(m);
    out[0] = spec[0];
    for k in 1..keep.div_ceil(2) {
        out[k] = spec[k];
        out[m - k] = spec[n - k];
    }
    if keep.is_multiple_of(2) {
        let k = keep / 2;
        if m > n {
            // Source Nyquist bin is split between the two new half-spectra.
            let v = spec[k] * T::lit(0.5);
            out[k] = v;
            out[m - k] = v;
        } else {
            out[k] = spec[k] + spec[n - k];
        }
    }
    let scale = T::from_len(m) / T::from_len(n);
    fft::inverse_real(out).into_iter().map(|v| v * scale).collect()
}

/// Scales so the largest absolute sample is exactly 1.
pub fn peak_normalize<T: Scalar>(clip: &AudioClip<T>) -> Result<AudioClip<T>> {
    let peak = clip.peak();
    if clip.is_empty() {
        return Err(Error::EmptyAudio);
    }
    if peak == T::zero() || !peak.is_finite() {
        return Err(Error::AllZero);
    }
    // Division (not multiplication by the reciprocal) keeps the peak at exactly 1.
    Ok(clip.with_samples(clip.samples.iter().map(|&x| x / peak).collect()))
}

/// Scales so the RMS is 1.
pub fn rms_normalize<T: Scalar>(clip: &AudioClip<T>) -> Result<AudioClip<T>> {
    if clip.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let rms = clip.rms();
    if rms == T::zero() || !rms.is_finite() {
        return Err(Error::AllZero);
    }
    Ok(clip.with_samples(clip.samples.iter().map(|&x| x / rms).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, amp: f64, rate: u32, n: usize) -> Vec<f64> {
        (0..n).map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin()).collect()
    }

    #[test]
    fn prepare_is_identity_for_mono_at_target_rate() {
        let clip = AudioClip::mono(sine(440.0, 0.3, 22050, 5000), 22050);
        assert_eq!(prepare(&clip, 22050).unwrap(), clip);
    }

    #[test]
    fn opposite_channels_cancel() {
        let l = sine(300.0, 0.5, 22050, 1000);
        let inter: Vec<f64> = l.iter().flat_map(|&v| [v, -v]).collect();
        let clip = AudioClip::new(inter, 22050, 2).unwrap();
        let mono = prepare(&clip, 22050).unwrap();
        assert!(mono.is_mono());
        assert!(mono.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn resampling_preserves_tone_frequency_and_level() {
        let clip = AudioClip::mono(sine(440.0, 0.7, 44100, 44100), 44100);
        let out = prepare(&clip, 22050).unwrap();
        assert_eq!(out.sample_rate(), 22050);
        assert_eq!(out.frames(), 22050);
        // Reference DFT evaluated directly at a handful of bins.
        let x = out.samples();
        let n = x.len();
        let power_at = |k: usize| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                let ph = -2.0 * std::f64::consts::PI * (k * i) as f64 / n as f64;
                re += v * ph.cos();
                im += v * ph.sin();
            }
            re * re + im * im
        };
        let at440 = power_at(440);
        assert!(power_at(439) < at440 * 1e-6 && power_at(441) < at440 * 1e-6);
        let rms_in = clip.rms();
        let rms_out = out.rms();
        assert!((rms_out / rms_in - 1.0).abs() < 0.01);
    }

    #[test]
    fn upsampling_round_trip() {
        let x = sine(1000.0, 0.5, 22050, 2205);
        let up = resample(&x, 22050, 44100);
        assert_eq!(up.len(), 4410);
        let back = resample(&up, 44100, 22050);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn normalizers() {
        let clip = AudioClip::mono(sine(441.0, 0.25, 22050, 22050), 22050);
        let p = peak_normalize(&clip).unwrap();
        assert_eq!(p.peak(), 1.0);
        let unit = AudioClip::mono(sine(551.25, 1.0, 22050, 22040), 22050);
        let r = rms_normalize(&unit).unwrap();
        assert!((r.rms() - 1.0).abs() < 1e-12);
        assert!((r.peak() - 2f64.sqrt()).abs() < 1e-6);
        let zeros = AudioClip::mono(vec![0.0f64; 100], 22050);
        assert!(matches!(peak_normalize(&zeros), Err(Error::AllZero)));
        assert!(matches!(rms_normalize(&zeros), Err(Error::AllZero)));
    }

    #[test]
    fn normalizers_are_scale_invariant() {
        let clip = AudioClip::mono(sine(523.0, 0.4, 22050, 3000), 22050);
        for c in [0.01, 0.5, 3.0, 1000.0] {
            let scaled = clip.scaled(c);
            let a = peak_normalize(&clip).unwrap();
            let b = peak_normalize(&scaled).unwrap();
            let c2 = rms_normalize(&clip).unwrap();
            let d = rms_normalize(&scaled).unwrap();
            for i in 0..clip.frames() {
                assert!((a.samples()[i] - b.samples()[i]).abs() < 1e-12);
                assert!((c2.samples()[i] - d.samples()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(AudioClip::new(vec![0.0f64; 3], 22050, 2).is_err());
        assert!(AudioClip::new(vec![0.0f64; 4], 0, 1).is_err());
        assert!(AudioClip::new(vec![0.0f64; 4], 22050, 3).is_err());
    }
}
