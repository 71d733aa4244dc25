//! Audio ingestion, normalization, gating and spectral transforms.

mod clip;
mod envelope;
pub(crate) mod fft;
mod gate;
mod io;
mod spectrum;

pub use clip::{peak_normalize, prepare, rms_normalize, AudioClip, ANALYSIS_RATE};
pub use envelope::{envelope, tapered_envelope, Envelope};
pub use gate::{gate, GateConfig, Gated};
pub use io::{load_audio, write_wav, WavEncoding};
pub use spectrum::{band_count, power_spectrum, to_band_spectrum, BandSpectrum, Spectrum, BANDS_PER_OCTAVE, DEFAULT_F_MIN};
