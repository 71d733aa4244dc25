use crate::audio::{fft, AudioClip};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One-sided power spectrum of a whole clip, scaled so that the bin powers
/// sum to the mean square of the signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub bin_freqs: Vec<T>,
    pub power: Vec<T>,
    /// Sample rate of the analyzed clip.
    pub sample_rate: u32,
}

impl<T: Scalar> Spectrum<T> {
    pub fn total_power(&self) -> T {
        self.power.iter().copied().sum()
    }

    pub fn bin_width(&self) -> T {
        if self.bin_freqs.len() < 2 {
            return T::zero();
        }
        self.bin_freqs[1] - self.bin_freqs[0]
    }

    pub fn nyquist(&self) -> T {
        T::from_u32(self.sample_rate).unwrap() / T::lit(2.0)
    }

    /// Index of the bin nearest to `freq`.
    pub fn bin_of(&self, freq: T) -> usize {
        let w = self.bin_width();
        if w == T::zero() {
            return 0;
        }
        (freq / w).round().to_usize().unwrap_or(0).min(self.power.len().saturating_sub(1))
    }
}

/// Single transform over the whole mono clip (rectangular window).
pub fn power_spectrum<T: Scalar>(clip: &AudioClip<T>) -> Result<Spectrum<T>> {
    if clip.is_empty() {
        return Err(Error::EmptyAudio);
    }
    if !clip.is_mono() {
        return Err(Error::InvalidParameter("power spectrum expects a mono clip".into()));
    }
    Ok(power_spectrum_of(clip.samples(), clip.sample_rate()))
}

pub(crate) fn power_spectrum_of<T: Scalar>(x: &[T], sample_rate: u32) -> Spectrum<T> {
    let n = x.len();
    let spec = fft::forward_real(x);
    let half = n / 2;
    let norm = T::from_len(n) * T::from_len(n);
    let two = T::lit(2.0);
    let power = (0..=half)
        .map(|k| {
            let p = spec[k].norm_sqr() / norm;
            // DC and (for even n) Nyquist have no mirror image.
            if k == 0 || (n.is_multiple_of(2) && k == half) {
                p
            } else {
                p * two
            }
        })
        .collect();
    let df = T::from_u32(sample_rate).unwrap() / T::from_len(n);
    let bin_freqs = (0..=half).map(|k| T::from_len(k) * df).collect();
    Spectrum { bin_freqs, power, sample_rate }
}

/// Bands per octave of the log-frequency grid (25 cents).
pub const BANDS_PER_OCTAVE: usize = 48;

/// Lowest band edge used by default: the lowest piano A.
pub const DEFAULT_F_MIN: f64 = 27.5;

/// Power spectrum aggregated onto a 25-cent log-frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpectrum<T> {
    pub band_centers: Vec<T>,
    pub band_power: Vec<T>,
    pub f_min: T,
    pub f_max: T,
}

impl<T: Scalar> BandSpectrum<T> {
    pub fn len(&self) -> usize {
        self.band_power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.band_power.is_empty()
    }

    /// Lower and upper edge of band `b`.
    pub fn band_edges(&self, b: usize) -> (T, T) {
        let step = T::lit(2.0).powf(T::lit(0.5) / T::from_len(BANDS_PER_OCTAVE));
        (self.band_centers[b] / step, self.band_centers[b] * step)
    }

    /// Bands whose center lies in `[lo, hi)`.
    pub fn restrict(&self, lo: T, hi: T) -> BandSpectrum<T> {
        let (band_centers, band_power): (Vec<T>, Vec<T>) =
            self.band_centers.iter().zip(&self.band_power).filter(|(c, _)| **c >= lo && **c < hi).map(|(&c, &p)| (c, p)).unzip();
        BandSpectrum { band_centers, band_power, f_min: lo.max(self.f_min), f_max: hi.min(self.f_max) }
    }
}

/// Number of 25-cent bands between `f_min` and `f_max`.
pub fn band_count<T: Scalar>(f_min: T, f_max: T) -> usize {
    let exact = T::from_len(BANDS_PER_OCTAVE) * (f_max / f_min).log2();
    // Absorb rounding noise when the range is an exact number of bands.
    let rounded = exact.round();
    if (exact - rounded).abs() < T::lit(1e-9) {
        rounded.to_usize().unwrap_or(0)
    } else {
        exact.ceil().to_usize().unwrap_or(0)
    }
}

/// Aggregates bins into 25-cent bands starting at `f_min`. Each band is the
/// arithmetic mean of the bins in `[lower edge, upper edge)`; bins above
/// `f_max` are ignored. Empty bands are filled by linear interpolation
/// between the nearest non-empty neighbors (held flat past the ends).
pub fn to_band_spectrum<T: Scalar>(spec: &Spectrum<T>, f_min: T, f_max: Option<T>) -> Result<BandSpectrum<T>> {
    let f_max = f_max.unwrap_or_else(|| spec.nyquist());
    if !(f_min > T::zero() && f_min < f_max && f_max <= spec.nyquist()) {
        return Err(Error::InvalidParameter(format!("band range must satisfy 0 < f_min < f_max <= Nyquist (got {f_min}..{f_max})")));
    }
    let nb = band_count(f_min, f_max);
    let per_octave = T::from_len(BANDS_PER_OCTAVE);
    let mut sums = vec![T::zero(); nb];
    let mut counts = vec![0usize; nb];
    for (&f, &p) in spec.bin_freqs.iter().zip(&spec.power) {
        if f < f_min || f > f_max {
            continue;
        }
        let b = (per_octave * (f / f_min).log2()).floor().to_usize().unwrap_or(0).min(nb - 1);
        sums[b] = sums[b] + p;
        counts[b] += 1;
    }
    let filled: Vec<usize> = (0..nb).filter(|&b| counts[b] > 0).collect();
    if filled.len() < 2 {
        return Err(Error::TooFewBands { needed: 2, got: filled.len() });
    }
    let mut band_power: Vec<T> = (0..nb).map(|b| if counts[b] > 0 { sums[b] / T::from_len(counts[b]) } else { T::zero() }).collect();
    fill_empty(&mut band_power, &filled);
    let band_centers = (0..nb).map(|b| f_min * T::lit(2.0).powf((T::from_len(b) + T::lit(0.5)) / per_octave)).collect();
    Ok(BandSpectrum { band_centers, band_power, f_min, f_max })
}

fn fill_empty<T: Scalar>(values: &mut [T], filled: &[usize]) {
    let first = filled[0];
    let last = *filled.last().unwrap();
    for b in 0..first {
        values[b] = values[first];
    }
    for b in last + 1..values.len() {
        values[b] = values[last];
    }
    for pair in filled.windows(2) {
        let (a, z) = (pair[0], pair[1]);
        for b in a + 1..z {
            let t = T::from_len(b - a) / T::from_len(z - a);
            values[b] = values[a] + (values[z] - values[a]) * t;
        }
    }
}
