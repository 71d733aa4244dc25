use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Reads a PCM WAV file (16/24-bit integer or 32-bit float, mono or stereo)
/// into a clip scaled to nominal ±1.0 full scale.
pub fn load_audio<T: Scalar>(path: impl AsRef<Path>) -> Result<AudioClip<T>> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::Unsupported => Error::UnsupportedEncoding("unsupported WAV variant".into()),
        other => Error::Unreadable { path: path.to_path_buf(), message: other.to_string() },
    })?;
    let spec = reader.spec();
    if spec.channels != 1 && spec.channels != 2 {
        return Err(Error::UnsupportedEncoding(format!("{} channels", spec.channels)));
    }
    let unreadable = |e: hound::Error| Error::Unreadable { path: path.to_path_buf(), message: e.to_string() };
    let samples: Vec<T> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (16 | 24)) => {
            let full_scale = T::lit((1u32 << (bits - 1)) as f64);
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| T::from_i32(v).unwrap() / full_scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(unreadable)?
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| T::from_f32(v).unwrap()))
            .collect::<std::result::Result<_, _>>()
            .map_err(unreadable)?,
        (format, bits) => {
            return Err(Error::UnsupportedEncoding(format!("{bits}-bit {format:?}")));
        }
    };
    if samples.is_empty() {
        return Err(Error::EmptyAudio);
    }
    AudioClip::new(samples, spec.sample_rate, spec.channels)
}

/// Sample encodings accepted by [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Pcm24,
    Float32,
}

/// Writes a clip as WAV. Integer encodings clip to full scale.
pub fn write_wav<T: Scalar>(path: impl AsRef<Path>, clip: &AudioClip<T>, encoding: WavEncoding) -> Result<()> {
    let path = path.as_ref();
    let (bits, format) = match encoding {
        WavEncoding::Pcm16 => (16, SampleFormat::Int),
        WavEncoding::Pcm24 => (24, SampleFormat::Int),
        WavEncoding::Float32 => (32, SampleFormat::Float),
    };
    let spec = WavSpec { channels: clip.channels(), sample_rate: clip.sample_rate(), bits_per_sample: bits, sample_format: format };
    let io_err = |e: hound::Error| Error::Unreadable { path: path.to_path_buf(), message: e.to_string() };
    let mut writer = WavWriter::create(path, spec).map_err(io_err)?;
    for &s in clip.samples() {
        let v = s.as_f64();
        match encoding {
            WavEncoding::Float32 => writer.write_sample(v as f32),
            WavEncoding::Pcm16 | WavEncoding::Pcm24 => {
                let full = (1i64 << (bits - 1)) as f64;
                let q = (v * full).round().clamp(-full, full - 1.0) as i32;
                writer.write_sample(q)
            }
        }
        .map_err(io_err)?;
    }
    writer.finalize().map_err(io_err)
}
