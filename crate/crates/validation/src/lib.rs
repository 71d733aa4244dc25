//! Synthetic corpora for end-to-end checks of the extraction pipeline.

use std::fs;
use std::path::{Path, PathBuf};

use inharmo::audio::{write_wav, AudioClip, WavEncoding};
use inharmo::synthlab::{add_noise, render_truncated, ToneSpec};
pub type Result<T> = std::result::Result<T, Box<dyn std::error::Error + Send + Sync>>;

pub const RATE: u32 = 22_050;

/// Track `i` of the synthetic corpus: a noisy, possibly stretched complex
/// tone. Every fourth track starts with half a second of silence.
pub fn corpus_clip(i: usize, duration: f64) -> Result<AudioClip<f64>> {
    let f0 = 55.0 * 2f64.powf((i * 7 % 36) as f64 / 12.0);
    let spec = ToneSpec::harmonic(f0, 4 + i % 12, 0.6 + 0.05 * (i % 7) as f64).with_b(0.0005 * (i % 3) as f64).with_duration(duration);
    let clip = add_noise(&render_truncated::<f64>(&spec)?, 5.0 + 6.0 * (i % 6) as f64, 1000 + i as u64)?;
    if i.is_multiple_of(4) {
        return Ok(AudioClip::mono(vec![0.0; RATE as usize / 2], RATE).concat(&clip)?);
    }
    Ok(clip)
}

/// Writes `clips` as WAVs named `{prefix}{i:02}.wav` plus a CSV manifest
/// whose track ids are `t{i:02}`, and returns the manifest path.
pub fn write_corpus(dir: &Path, prefix: &str, clips: &[AudioClip<f64>], encoding: WavEncoding) -> Result<PathBuf> {
    let mut text = String::from("track_id,path,dataset,year,artist,title\n");
    for (i, clip) in clips.iter().enumerate() {
        let name = format!("{prefix}{i:02}.wav");
        write_wav(dir.join(&name), clip, encoding)?;
        text.push_str(&format!("t{i:02},{name},synthetic,{},artist{},track {i}\n", 1960 + i % 40, i % 5));
    }
    let manifest = dir.join(format!("{prefix}manifest.csv"));
    fs::write(&manifest, text)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_reproducible() {
        assert_eq!(corpus_clip(3, 0.5).unwrap(), corpus_clip(3, 0.5).unwrap());
        assert_eq!(corpus_clip(4, 0.5).unwrap().frames(), (RATE as f64 * 1.0) as usize);
    }

    #[test]
    fn manifest_lists_every_clip() {
        let dir = tempfile::tempdir().unwrap();
        let clips: Vec<_> = (0..3).map(|i| corpus_clip(i, 0.2).unwrap()).collect();
        let m = write_corpus(dir.path(), "x", &clips, WavEncoding::Pcm16).unwrap();
        let text = fs::read_to_string(m).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(dir.path().join("x02.wav").exists());
    }
}
