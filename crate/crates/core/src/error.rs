use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read audio file {path}: {message}")]
    Unreadable { path: PathBuf, message: String },

    #[error("unsupported audio encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("audio contains no samples")]
    EmptyAudio,

    #[error("audio is all zeros")]
    AllZero,

    #[error("no frame passed the {threshold_db} dB gate")]
    NothingPassedGate { threshold_db: f64 },

    #[error("no valid analysis frames")]
    NoValidFrames,

    #[error("frame is all zeros")]
    ZeroFrame,

    #[error("too few bands: need {needed}, got {got}")]
    TooFewBands { needed: usize, got: usize },

    #[error("loudness level {0} phon is outside 0..=90")]
    PhonOutOfRange(f64),

    #[error("partial {index} at {freq} Hz is at or above Nyquist ({nyquist} Hz)")]
    AboveNyquist { index: usize, freq: f64, nyquist: f64 },

    #[error("interquartile range is zero")]
    ZeroIqr,

    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    #[error("empty density grid")]
    EmptyGrid,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
