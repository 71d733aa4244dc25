use std::ops::Range;

use crate::audio::clip::{mean_square, peak_normalize};
use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Level gate parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateConfig {
    /// Frames whose RMS (dB re full scale, after peak normalization) is below
    /// this are discarded. The comparison is inclusive.
    pub threshold_db: f64,
    /// Non-overlapping frame length in seconds.
    pub frame_duration: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self { threshold_db: -20.0, frame_duration: 0.1 }
    }
}

/// Output of [`gate`]: the concatenated retained frames plus bookkeeping
/// for consumers that must not analyze across concatenation seams.
#[derive(Debug, Clone)]
pub struct Gated<T> {
    pub clip: AudioClip<T>,
    /// Indices of the retained frames in the input clip.
    pub retained: Vec<usize>,
    /// Gate frame length in samples.
    pub frame_len: usize,
    runs: Vec<Range<usize>>,
}

impl<T: Scalar> Gated<T> {
    /// Sample ranges of `clip` that were contiguous in the original audio.
    pub fn runs(&self) -> &[Range<usize>] {
        &self.runs
    }

    pub fn run_samples(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.runs.iter().map(move |r| &self.clip.samples()[r.clone()])
    }
}

/// Peak-normalizes a mono clip, drops frames quieter than the threshold and
/// concatenates the rest. The retained audio is renormalized to a peak of
/// exactly 1, which makes the gate idempotent.
pub fn gate<T: Scalar>(clip: &AudioClip<T>, cfg: GateConfig) -> Result<Gated<T>> {
    if !clip.is_mono() {
        return Err(Error::InvalidParameter("gate expects a mono clip".into()));
    }
    if !(cfg.frame_duration > 0.0) {
        return Err(Error::InvalidParameter("gate frame duration must be positive".into()));
    }
    let normalized = peak_normalize(clip)?;
    let frame_len = ((cfg.frame_duration * clip.sample_rate() as f64).round() as usize).max(1);
    let threshold = T::lit(cfg.threshold_db);
    let ten = T::lit(10.0);

    let mut retained = Vec::new();
    let mut samples = Vec::with_capacity(normalized.frames());
    let mut runs: Vec<Range<usize>> = Vec::new();
    let mut previous: Option<usize> = None;
    for (idx, frame) in normalized.samples().chunks(frame_len).enumerate() {
        let ms = mean_square(frame);
        let level = if ms > T::zero() { ten * ms.log10() } else { T::neg_infinity() };
        if level >= threshold {
            let start = samples.len();
            samples.extend_from_slice(frame);
            match (previous, runs.last_mut()) {
                (Some(p), Some(run)) if p + 1 == idx => run.end = samples.len(),
                _ => runs.push(start..samples.len()),
            }
            retained.push(idx);
            previous = Some(idx);
        }
    }
    if retained.is_empty() {
        return Err(Error::NothingPassedGate { threshold_db: cfg.threshold_db });
    }
    let clip = peak_normalize(&AudioClip::mono(samples, clip.sample_rate()))?;
    Ok(Gated { clip, retained, frame_len, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tone(freq: f64, amp: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / 22050.0).sin()).collect()
    }

    #[test]
    fn square_wave_is_kept_whole() {
        let x: Vec<f64> = (0..22050).map(|i| if (i / 50) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let clip = AudioClip::mono(x.clone(), 22050);
        let g = gate(&clip, GateConfig::default()).unwrap();
        assert_eq!(g.clip.samples(), &x[..]);
        assert_eq!(g.retained.len(), 10);
        assert_eq!(g.runs().to_vec(), vec![0..22050]);
    }

    #[test]
    fn quiet_tail_is_dropped() {
        let mut x = tone(440.0, 1.0, 22050);
        x.extend(tone(440.0, 1e-3, 220500));
        let g = gate(&AudioClip::mono(x, 22050), GateConfig::default()).unwrap();
        assert_eq!(g.retained, (0..10).collect::<Vec<_>>());
        assert_eq!(g.clip.frames(), 22050);
    }

    #[test]
    fn threshold_is_inclusive() {
        // Frame 0 holds the peak; frame 1 is a ±0.5 square with mean square 0.25 exactly.
        let mut x = vec![1.0f64; 10];
        x.extend((0..10).map(|i| if i % 2 == 0 { 0.5 } else { -0.5 }));
        let clip = AudioClip::mono(x, 100);
        let cfg = GateConfig { threshold_db: 10.0 * 0.25f64.log10(), frame_duration: 0.1 };
        let g = gate(&clip, cfg).unwrap();
        assert_eq!(g.retained, vec![0, 1]);
        let stricter = GateConfig { threshold_db: cfg.threshold_db + 1e-9, ..cfg };
        assert_eq!(gate(&clip, stricter).unwrap().retained, vec![0]);
    }

    #[test]
    fn silence_fails_the_gate() {
        let clip = AudioClip::mono(vec![0.0f64; 2205], 22050);
        assert!(matches!(gate(&clip, GateConfig::default()), Err(Error::AllZero)));
        // A click followed by silence: the click frame is too quiet on average.
        let mut x = vec![0.0f64; 22050];
        x[5000] = 1.0;
        assert!(matches!(gate(&AudioClip::mono(x, 22050), GateConfig::default()), Err(Error::NothingPassedGate { .. })));
    }

    #[test]
    fn runs_follow_discontinuities() {
        let mut x = tone(300.0, 1.0, 2205);
        x.extend(vec![0.0; 2205]);
        x.extend(tone(300.0, 1.0, 4410));
        let g = gate(&AudioClip::mono(x, 22050), GateConfig::default()).unwrap();
        assert_eq!(g.retained, vec![0, 2, 3]);
        assert_eq!(g.runs(), &[0..2205, 2205..6615]);
    }

    proptest! {
        #[test]
        fn gating_is_idempotent(levels in proptest::collection::vec(0.0f64..1.0, 2..12), seed in 0u64..1000) {
            let mut x = Vec::new();
            for (k, &lvl) in levels.iter().enumerate() {
                let f = 200.0 + (seed % 97) as f64 + 13.0 * k as f64;
                x.extend(tone(f, lvl.powi(3) + 1e-4, 2205));
            }
            let clip = AudioClip::mono(x, 22050);
            let once = gate(&clip, GateConfig::default()).unwrap();
            let twice = gate(&once.clip, GateConfig::default()).unwrap();
            prop_assert_eq!(once.clip.samples(), twice.clip.samples());
        }
    }
}
