use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use super::{add_partials, gaussian, render_truncated, rng_for, synthesize, Partial, ToneSpec};
use crate::audio::{tapered_envelope, AudioClip, ANALYSIS_RATE};
use crate::error::{Error, Result};
use crate::features::{harmonic_ratio, FrameConfig};
use crate::scalar::{median, quantile_sorted};

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 7;

/// Every experiment tone lasts one second.
pub const EXPERIMENT_DURATION: f64 = 1.0;

const RATE: u32 = ANALYSIS_RATE;

fn n_samples() -> usize {
    (EXPERIMENT_DURATION * RATE as f64).round() as usize
}

/// A swept or Monte Carlo curve with its percentile band.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub x_axis: Vec<f64>,
    pub median: Vec<f64>,
    pub p25: Vec<f64>,
    pub p75: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentResult {
    fn from_trials(x_axis: Vec<f64>, per_x: Vec<Vec<f64>>, trials: usize, seed: u64) -> Self {
        let mut median = Vec::with_capacity(per_x.len());
        let mut p25 = Vec::with_capacity(per_x.len());
        let mut p75 = Vec::with_capacity(per_x.len());
        for mut v in per_x {
            v.sort_by(f64::total_cmp);
            median.push(quantile_sorted(&v, 0.5).unwrap_or(f64::NAN));
            p25.push(quantile_sorted(&v, 0.25).unwrap_or(f64::NAN));
            p75.push(quantile_sorted(&v, 0.75).unwrap_or(f64::NAN));
        }
        Self { x_axis, median, p25, p75, trials, seed }
    }

    /// Deterministic sweep: one trial, no randomness.
    fn from_curve(x_axis: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x_axis, p25: y.clone(), p75: y.clone(), median: y, trials: 1, seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.x_axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_axis.is_empty()
    }

    pub fn iqr(&self, i: usize) -> f64 {
        self.p75[i] - self.p25[i]
    }

    /// Index of the entry whose x equals `x`.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.x_axis.iter().position(|&v| v == x)
    }
}

/// Median framewise HarmonicRatio of one second of audio.
pub fn measure_hr(samples: Vec<f64>) -> f64 {
    harmonic_ratio(&AudioClip::mono(samples, RATE), FrameConfig::default()).unwrap_or(0.0)
}

fn sine_partial(frequency: f64) -> Partial {
    Partial { frequency, amplitude: 1.0 }
}

/// Randomly displaced partials of a harmonic tone.
#[derive(Debug, Clone, PartialEq)]
pub struct InharmonicPartialsConfig {
    pub f0: f64,
    pub n_partials: usize,
    pub s: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for InharmonicPartialsConfig {
    fn default() -> Self {
        Self { f0: 220.0, n_partials: 10, s: 0.8, trials: 50, seed: DEFAULT_SEED }
    }
}

/// Smallest and largest relative displacement of an inharmonic partial.
pub const DISPLACEMENT_RANGE: (f64, f64) = (0.005, 0.03);

/// HR against the number of displaced partials `0..=n_partials`. Each
/// displaced partial is multiplied by `1 ± u`, `u` uniform in
/// [`DISPLACEMENT_RANGE`]. Draws depend only on (seed, count, trial), so
/// runs that differ only in `s` see the same displacements.
pub fn experiment_inharmonic_partials(cfg: &InharmonicPartialsConfig) -> Result<ExperimentResult> {
    let spec = ToneSpec::harmonic(cfg.f0, cfg.n_partials, cfg.s);
    spec.validate()?;
    let base = spec.partials();
    let counts: Vec<usize> = (0..=cfg.n_partials).collect();
    let per_x = counts
        .iter()
        .map(|&c| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = rng_for(cfg.seed, ((c as u64) << 32) | t as u64);
                    let mut partials = base.clone();
                    for i in index::sample(&mut rng, cfg.n_partials, c) {
                        let u = rng.random_range(DISPLACEMENT_RANGE.0..=DISPLACEMENT_RANGE.1);
                        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                        partials[i].frequency *= 1.0 + sign * u;
                    }
                    measure_hr(synthesize(&partials, n_samples(), RATE))
                })
                .collect()
        })
        .collect();
    Ok(ExperimentResult::from_trials(counts.iter().map(|&c| c as f64).collect(), per_x, cfg.trials, cfg.seed))
}

/// One partial swept from its harmonic position to the next harmonic.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPartialConfig {
    pub f0: f64,
    pub n_partials: usize,
    pub s: f64,
    /// 1-based index of the moving partial.
    pub partial_index: usize,
    pub steps: usize,
}

impl Default for ShiftPartialConfig {
    fn default() -> Self {
        Self { f0: 220.0, n_partials: 10, s: 0.8, partial_index: 4, steps: 220 }
    }
}

/// HR as a function of the moving partial's frequency (the x axis, in Hz).
pub fn experiment_shift_partial(cfg: &ShiftPartialConfig) -> Result<ExperimentResult> {
    let spec = ToneSpec::harmonic(cfg.f0, cfg.n_partials, cfg.s);
    spec.validate()?;
    if !(1..=cfg.n_partials).contains(&cfg.partial_index) || cfg.steps == 0 {
        return Err(Error::InvalidParameter("partial index outside the tone or empty grid".into()));
    }
    let k = cfg.partial_index as f64;
    let from = k * cfg.f0;
    let x: Vec<f64> = (0..=cfg.steps).map(|i| from + cfg.f0 * i as f64 / cfg.steps as f64).collect();
    let base = spec.partials();
    let y = x
        .par_iter()
        .map(|&f| {
            let mut partials = base.clone();
            partials[cfg.partial_index - 1].frequency = f;
            measure_hr(synthesize(&partials, n_samples(), RATE))
        })
        .collect();
    Ok(ExperimentResult::from_curve(x, y))
}

/// Two equal-amplitude sines, the upper swept in cents above `f_low`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSineConfig {
    pub f_low: f64,
    pub max_cents: f64,
    pub step_cents: f64,
}

impl Default for TwoSineConfig {
    fn default() -> Self {
        Self { f_low: 220.0, max_cents: 2400.0, step_cents: 1.0 }
    }
}

fn cents_grid(max_cents: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max_cents >= 0.0) {
        return Err(Error::EmptyGrid);
    }
    let n = (max_cents / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| i as f64 * step).collect())
}

fn above(f: f64, cents: f64) -> f64 {
    f * 2f64.powf(cents / 1200.0)
}

/// HR of the two-sine mixture at each interval (x axis in cents).
pub fn experiment_two_sine(cfg: &TwoSineConfig) -> Result<ExperimentResult> {
    let x = cents_grid(cfg.max_cents, cfg.step_cents)?;
    let nyquist = RATE as f64 / 2.0;
    if above(cfg.f_low, cfg.max_cents) >= nyquist {
        return Err(Error::AboveNyquist { index: 2, freq: above(cfg.f_low, cfg.max_cents), nyquist });
    }
    let y = x
        .par_iter()
        .map(|&c| {
            let p = [sine_partial(cfg.f_low), sine_partial(above(cfg.f_low, c))];
            measure_hr(synthesize(&p, n_samples(), RATE))
        })
        .collect();
    Ok(ExperimentResult::from_curve(x, y))
}

/// How fundamentals are drawn in the scale experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScaleCase {
    /// Uniform in Hz.
    Continuous,
    /// Uniform over the 12-tone equal-tempered grid.
    ChromaticEt,
    /// Equal-tempered notes of the major triad on the lowest note.
    TriadEt,
    /// Just major triad (1, 5/4, 3/2) on the lowest note, in any octave.
    TriadJust,
}

impl ScaleCase {
    pub const ALL: [ScaleCase; 4] = [Self::Continuous, Self::ChromaticEt, Self::TriadEt, Self::TriadJust];

    pub fn name(self) -> &'static str {
        match self {
            Self::Continuous => "continuous",
            Self::ChromaticEt => "chromatic-et",
            Self::TriadEt => "triad-et",
            Self::TriadJust => "triad-just",
        }
    }

    /// Candidate fundamentals in `[f_low, f_high]`; empty for the continuous case.
    pub fn pool(self, f_low: f64, f_high: f64) -> Vec<f64> {
        let max_step = (12.0 * (f_high / f_low).log2() + 1e-9).floor() as i32;
        let et = |classes: &[i32]| -> Vec<f64> {
            (0..=max_step).filter(|n| classes.contains(&n.rem_euclid(12))).map(|n| above(f_low, 100.0 * n as f64)).collect()
        };
        match self {
            Self::Continuous => Vec::new(),
            Self::ChromaticEt => et(&(0..12).collect::<Vec<_>>()),
            Self::TriadEt => et(&[0, 4, 7]),
            Self::TriadJust => {
                let mut v = Vec::new();
                let mut octave = 1.0;
                while f_low * octave <= f_high {
                    for r in [1.0, 1.25, 1.5] {
                        let f = f_low * octave * r;
                        if f <= f_high {
                            v.push(f);
                        }
                    }
                    octave *= 2.0;
                }
                v
            }
        }
    }
}

impl fmt::Display for ScaleCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScaleCase {
    type Err = Error;

    /// Accepts the canonical names plus the short forms `chromatic`,
    /// `triad` and `just`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chromatic" => return Ok(Self::ChromaticEt),
            "triad" => return Ok(Self::TriadEt),
            "just" => return Ok(Self::TriadJust),
            _ => {}
        }
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::InvalidParameter(format!("unknown scale case '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalesConfig {
    pub case: ScaleCase,
    pub max_tones: usize,
    pub trials: usize,
    pub seed: u64,
    pub n_partials: usize,
    pub s: f64,
    pub f_low: f64,
    pub f_high: f64,
}

impl ScalesConfig {
    pub fn new(case: ScaleCase) -> Self {
        Self { case, max_tones: 10, trials: 500, seed: DEFAULT_SEED, n_partials: 10, s: 0.8, f_low: 220.0, f_high: 2200.0 }
    }
}

/// HR of superposed complex tones against the number of tones. The first
/// tone is always `f_low`; the others are drawn with replacement. Partials
/// at or above Nyquist are dropped.
pub fn experiment_scales(cfg: &ScalesConfig) -> Result<ExperimentResult> {
    if cfg.max_tones == 0 || !(cfg.f_low > 0.0 && cfg.f_high > cfg.f_low) {
        return Err(Error::InvalidParameter("need at least one tone and f_low < f_high".into()));
    }
    let tone = |f: f64| -> Result<Vec<f64>> { Ok(render_truncated::<f64>(&ToneSpec::harmonic(f, cfg.n_partials, cfg.s))?.into_samples()) };
    let pool = cfg.case.pool(cfg.f_low, cfg.f_high);
    let rendered: Vec<Vec<f64>> = pool.par_iter().map(|&f| tone(f)).collect::<Result<_>>()?;
    let first = tone(cfg.f_low)?;

    let trials: Vec<Vec<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let mut rng = rng_for(cfg.seed, t as u64);
            let mut sum = first.clone();
            let mut hrs = vec![measure_hr(sum.clone())];
            for _ in 1..cfg.max_tones {
                let drawn;
                let next: &[f64] = if pool.is_empty() {
                    drawn = tone(rng.random_range(cfg.f_low..=cfg.f_high))?;
                    &drawn
                } else {
                    &rendered[rng.random_range(0..pool.len())]
                };
                sum.iter_mut().zip(next).for_each(|(a, b)| *a += b);
                hrs.push(measure_hr(sum.clone()));
            }
            Ok(hrs)
        })
        .collect::<Result<_>>()?;
    let per_x = (0..cfg.max_tones).map(|i| trials.iter().map(|t| t[i]).collect()).collect();
    let x = (1..=cfg.max_tones).map(|n| n as f64).collect();
    Ok(ExperimentResult::from_trials(x, per_x, cfg.trials, cfg.seed))
}

/// HR of every pair of partials drawn from two tones.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialMatrix {
    pub frequencies: Vec<f64>,
    /// 0 for partials of the first tone, 1 for the second.
    pub tone: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

impl PartialMatrix {
    fn mean_where(&self, same_tone: bool) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for i in 0..self.values.len() {
            for j in 0..i {
                if (self.tone[i] == self.tone[j]) == same_tone {
                    sum += self.values[i][j];
                    n += 1;
                }
            }
        }
        sum / n as f64
    }

    /// Mean HR over distinct pairs of partials from the same tone.
    pub fn within_tone_mean(&self) -> f64 {
        self.mean_where(true)
    }

    /// Mean HR over pairs with one partial from each tone.
    pub fn cross_tone_mean(&self) -> f64 {
        self.mean_where(false)
    }
}

/// Entry `(i, j)` is the HR of two equal-amplitude sines at partial `i` and
/// partial `j` of the union of both tones' partials. The diagonal is 1.
pub fn pairwise_partial_matrix(a: &ToneSpec, b: &ToneSpec) -> Result<PartialMatrix> {
    a.validate()?;
    b.validate()?;
    let mut frequencies = Vec::new();
    let mut tone = Vec::new();
    for (t, spec) in [a, b].into_iter().enumerate() {
        for p in spec.partials() {
            frequencies.push(p.frequency);
            tone.push(t);
        }
    }
    let n = frequencies.len();
    let len = (a.duration * a.sample_rate as f64).round() as usize;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let hr: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let x = synthesize(&[sine_partial(frequencies[i]), sine_partial(frequencies[j])], len, a.sample_rate);
            harmonic_ratio(&AudioClip::mono(x, a.sample_rate), FrameConfig::default()).unwrap_or(0.0)
        })
        .collect();
    let mut values = vec![vec![1.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(hr) {
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(PartialMatrix { frequencies, tone, values })
}

/// Two complex tones, the upper swept in cents; envelope spectra and HR.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatingConfig {
    pub f0: f64,
    pub max_cents: f64,
    pub step_cents: f64,
    pub n_partials: usize,
    pub s: f64,
    /// Envelope window and hop, seconds.
    pub window: f64,
    pub hop: f64,
    /// Partials and decay of the tones used for the HR curve.
    pub hr_partials: usize,
    pub hr_s: f64,
}

impl Default for BeatingConfig {
    fn default() -> Self {
        Self {
            f0: 220.0,
            max_cents: 1200.0,
            step_cents: 10.0,
            n_partials: 40,
            s: 0.95,
            window: 0.05,
            hop: 0.025,
            hr_partials: 10,
            hr_s: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeatingMap {
    pub cents: Vec<f64>,
    pub env_freqs: Vec<f64>,
    /// Envelope power spectrum per interval, one row per entry of `cents`.
    pub rows: Vec<Vec<f64>>,
    pub hr: Vec<f64>,
    /// Median of every non-DC entry of the map.
    pub floor: f64,
}

impl BeatingMap {
    /// Strongest non-DC envelope component below `max_freq` in row `i`, as
    /// `(frequency, power)`.
    pub fn peak_below(&self, i: usize, max_freq: f64) -> (f64, f64) {
        strongest(&self.env_freqs, &self.rows[i], max_freq)
    }
}

fn strongest(freqs: &[f64], power: &[f64], max_freq: f64) -> (f64, f64) {
    freqs
        .iter()
        .zip(power)
        .skip(1)
        .filter(|(f, _)| **f < max_freq)
        .fold((0.0, f64::NEG_INFINITY), |best, (&f, &p)| if p > best.1 { (f, p) } else { best })
}

/// Envelope power spectrum `(frequencies, power)` of a clip, using the Hann
/// RMS envelope.
pub fn envelope_spectrum(clip: &AudioClip<f64>, window: f64, hop: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok(tapered_envelope(clip, window, hop)?.spectrum())
}

/// Frequency of the strongest non-DC envelope component below `max_freq`.
pub fn beat_frequency(clip: &AudioClip<f64>, window: f64, hop: f64, max_freq: f64) -> Result<f64> {
    let (f, p) = envelope_spectrum(clip, window, hop)?;
    Ok(strongest(&f, &p, max_freq).0)
}

pub fn beating_map(cfg: &BeatingConfig) -> Result<BeatingMap> {
    let cents = cents_grid(cfg.max_cents, cfg.step_cents)?;
    let pair = |cents: f64, n: usize, s: f64| -> Result<Vec<f64>> {
        let lo = render_truncated::<f64>(&ToneSpec::harmonic(cfg.f0, n, s))?;
        let hi = render_truncated::<f64>(&ToneSpec::harmonic(above(cfg.f0, cents), n, s))?;
        Ok(lo.samples().iter().zip(hi.samples()).map(|(a, b)| a + b).collect())
    };
    let computed: Vec<(Vec<f64>, Vec<f64>, f64)> = cents
        .par_iter()
        .map(|&c| {
            let mix = AudioClip::mono(pair(c, cfg.n_partials, cfg.s)?, RATE);
            let (freqs, power) = envelope_spectrum(&mix, cfg.window, cfg.hop)?;
            let hr = measure_hr(pair(c, cfg.hr_partials, cfg.hr_s)?);
            Ok((freqs, power, hr))
        })
        .collect::<Result<_>>()?;
    let env_freqs = computed.first().map(|c| c.0.clone()).unwrap_or_default();
    let mut rows = Vec::with_capacity(computed.len());
    let mut hr = Vec::with_capacity(computed.len());
    for (_, r, h) in computed {
        rows.push(r);
        hr.push(h);
    }
    let non_dc: Vec<f64> = rows.iter().flat_map(|r| r.iter().skip(1).copied()).collect();
    let floor = median(&non_dc).ok_or(Error::EmptyGrid)?;
    Ok(BeatingMap { cents, env_freqs, rows, hr, floor })
}

/// A sine plus white noise at decreasing SNR against a sine plus `k`
/// random-frequency sines of equal amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVsSinesConfig {
    pub f0: f64,
    /// SNR grid in dB; `f64::INFINITY` means no noise.
    pub snr_db: Vec<f64>,
    pub max_k: usize,
    pub trials: usize,
    pub seed: u64,
    /// Lowest random sine frequency; the highest is just below Nyquist.
    pub f_min: f64,
}

impl Default for NoiseVsSinesConfig {
    fn default() -> Self {
        Self {
            f0: 220.0,
            snr_db: vec![f64::INFINITY, 40.0, 30.0, 20.0, 15.0, 10.0, 6.0, 3.0, 0.0],
            max_k: 30,
            trials: 200,
            seed: DEFAULT_SEED,
            f_min: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVsSines {
    /// x axis: SNR in dB.
    pub noise: ExperimentResult,
    /// x axis: number of added sines, from 0.
    pub sines: ExperimentResult,
    /// Interpolated `k` at which the sines median first falls to the noise
    /// median at 0 dB SNR.
    pub crossing: Option<f64>,
}

pub fn experiment_noise_vs_sines(cfg: &NoiseVsSinesConfig) -> Result<NoiseVsSines> {
    let nyquist = RATE as f64 / 2.0;
    if !(cfg.f0 < nyquist && cfg.f_min < nyquist) || cfg.snr_db.is_empty() {
        return Err(Error::InvalidParameter("frequencies must lie below Nyquist and the SNR grid must be nonempty".into()));
    }
    let n = n_samples();
    let sine = synthesize(&[sine_partial(cfg.f0)], n, RATE);
    let sine_rms = (sine.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();

    let noise_trials: Vec<Vec<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let noise = gaussian(n, &mut rng_for(cfg.seed, 2 * t as u64));
            let noise_rms = (noise.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
            cfg.snr_db
                .iter()
                .map(|&snr| {
                    if snr.is_infinite() && snr > 0.0 {
                        return measure_hr(sine.clone());
                    }
                    let g = sine_rms / noise_rms / 10f64.powf(snr / 20.0);
                    measure_hr(sine.iter().zip(&noise).map(|(s, e)| s + g * e).collect())
                })
                .collect()
        })
        .collect();

    let sine_trials: Vec<Vec<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(cfg.seed, 2 * t as u64 + 1);
            let mut sum = sine.clone();
            let mut hrs = vec![measure_hr(sum.clone())];
            for _ in 0..cfg.max_k {
                let f = rng.random_range(cfg.f_min..nyquist);
                add_partials(&mut sum, &[sine_partial(f)], RATE);
                hrs.push(measure_hr(sum.clone()));
            }
            hrs
        })
        .collect();

    let noise = ExperimentResult::from_trials(
        cfg.snr_db.clone(),
        (0..cfg.snr_db.len()).map(|i| noise_trials.iter().map(|t| t[i]).collect()).collect(),
        cfg.trials,
        cfg.seed,
    );
    let sines = ExperimentResult::from_trials(
        (0..=cfg.max_k).map(|k| k as f64).collect(),
        (0..=cfg.max_k).map(|k| sine_trials.iter().map(|t| t[k]).collect()).collect(),
        cfg.trials,
        cfg.seed,
    );
    let crossing = noise.index_of(0.0).and_then(|i| crossing_point(&sines, noise.median[i]));
    Ok(NoiseVsSines { noise, sines, crossing })
}

/// Linear interpolation of the first x where the median reaches `target`.
pub fn crossing_point(curve: &ExperimentResult, target: f64) -> Option<f64> {
    let m = &curve.median;
    let x = &curve.x_axis;
    let k = m.iter().position(|&v| v <= target)?;
    if k == 0 {
        return Some(x[0]);
    }
    let frac = (m[k - 1] - target) / (m[k - 1] - m[k]);
    Some(x[k - 1] + frac * (x[k] - x[k - 1]))
}
