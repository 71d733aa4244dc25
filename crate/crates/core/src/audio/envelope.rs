use crate::audio::{spectrum::power_spectrum_of, AudioClip};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// RMS level per analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope<T> {
    pub values: Vec<T>,
    pub window_duration: f64,
    pub hop_duration: f64,
}

impl<T: Scalar> Envelope<T> {
    /// Envelope sampling rate in Hz.
    pub fn rate(&self) -> f64 {
        1.0 / self.hop_duration
    }

    /// Power spectrum of the mean-removed envelope, as `(frequencies, power)`.
    pub fn spectrum(&self) -> (Vec<T>, Vec<T>) {
        let n = self.values.len();
        if n == 0 {
            return (Vec::new(), Vec::new());
        }
        let mean = self.values.iter().copied().sum::<T>() / T::from_len(n);
        let centered: Vec<T> = self.values.iter().map(|&v| v - mean).collect();
        let s = power_spectrum_of(&centered, 1);
        let df = T::lit(self.rate()) / T::from_len(n);
        let freqs = (0..s.power.len()).map(|k| T::from_len(k) * df).collect();
        (freqs, s.power)
    }
}

fn window_samples(duration: f64, rate: u32) -> usize {
    ((duration * rate as f64).round() as usize).max(1)
}

/// RMS over consecutive non-overlapping rectangular windows. A trailing
/// partial window is dropped.
pub fn envelope<T: Scalar>(clip: &AudioClip<T>, window: f64) -> Result<Envelope<T>> {
    if !clip.is_mono() {
        return Err(Error::InvalidParameter("envelope expects a mono clip".into()));
    }
    let w = window_samples(window, clip.sample_rate());
    if clip.frames() <= w {
        return Err(Error::InvalidParameter("clip is not longer than one envelope window".into()));
    }
    let values = clip.samples().chunks_exact(w).map(|c| (c.iter().map(|&v| v * v).sum::<T>() / T::from_len(w)).sqrt()).collect();
    let d = w as f64 / clip.sample_rate() as f64;
    Ok(Envelope { values, window_duration: d, hop_duration: d })
}

/// Hann-weighted RMS over windows of `window` seconds advanced by `hop`
/// seconds. The smooth taper suppresses the level ripple a rectangular
/// window picks up when it does not span a whole number of signal periods.
pub fn tapered_envelope<T: Scalar>(clip: &AudioClip<T>, window: f64, hop: f64) -> Result<Envelope<T>> {
    if !clip.is_mono() {
        return Err(Error::InvalidParameter("envelope expects a mono clip".into()));
    }
    let rate = clip.sample_rate();
    let w = window_samples(window, rate);
    let h = window_samples(hop, rate);
    if clip.frames() <= w {
        return Err(Error::InvalidParameter("clip is not longer than one envelope window".into()));
    }
    // Symmetric Hann without the zero end points.
    let taper: Vec<T> = (0..w)
        .map(|i| {
            let x = T::PI() * T::lit(2.0) * T::from_len(i + 1) / T::from_len(w + 1);
            T::lit(0.5) * (T::one() - x.cos())
        })
        .collect();
    let norm: T = taper.iter().copied().sum();
    let x = clip.samples();
    let values = (0..=(x.len() - w) / h)
        .map(|j| {
            let frame = &x[j * h..j * h + w];
            (frame.iter().zip(&taper).map(|(&v, &t)| t * v * v).sum::<T>() / norm).sqrt()
        })
        .collect();
    Ok(Envelope { values, window_duration: w as f64 / rate as f64, hop_duration: h as f64 / rate as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(f: impl Fn(f64) -> f64, secs: f64) -> AudioClip<f64> {
        let n = (secs * 22050.0) as usize;
        AudioClip::mono((0..n).map(|i| f(i as f64 / 22050.0)).collect(), 22050)
    }

    fn peak_freq(env: &Envelope<f64>) -> f64 {
        let (f, p) = env.spectrum();
        let k = (1..p.len()).max_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap()).unwrap();
        f[k]
    }

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn steady_sine_has_flat_envelope() {
        let e = envelope(&clip(|t| (TAU * 440.0 * t).sin(), 2.0), 0.05).unwrap();
        let max = e.values.iter().cloned().fold(f64::MIN, f64::max);
        let min = e.values.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - min) / max < 0.02);
    }

    #[test]
    fn beating_sines_modulate_at_the_difference_frequency() {
        let c = clip(|t| (TAU * 220.0 * t).sin() + (TAU * 224.0 * t).sin(), 2.0);
        let e = envelope(&c, 0.05).unwrap();
        let (f, _) = e.spectrum();
        let df = f[1];
        assert!((peak_freq(&e) - 4.0).abs() <= df);
        let t = tapered_envelope(&c, 0.05, 0.025).unwrap();
        let (f, _) = t.spectrum();
        assert!((peak_freq(&t) - 4.0).abs() <= f[1]);
    }

    #[test]
    fn am_tone_envelope_peaks_at_modulator() {
        let c = clip(|t| (1.0 + 0.5 * (TAU * 2.0 * t).sin()) * (TAU * 1000.0 * t).sin(), 4.0);
        let e = envelope(&c, 0.05).unwrap();
        assert!((peak_freq(&e) - 2.0).abs() < 0.3);
    }

    #[test]
    fn too_short_clip_is_rejected() {
        assert!(envelope(&clip(|t| t, 0.01), 0.05).is_err());
    }
}
