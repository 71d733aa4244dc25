use inharmo::audio::{load_audio, prepare, write_wav, AudioClip, WavEncoding, ANALYSIS_RATE};
use inharmo::features::{hr_inharmonicity, track_features, FeatureConfig, FrameConfig};
use inharmo::synthlab::{add_noise, experiment_inharmonic_partials, render, InharmonicPartialsConfig, ToneSpec};
use inharmo::weighting::default_weights;
use inharmo::{AudioClip32, TrackFeatures};

fn features(clip: &AudioClip<f64>) -> TrackFeatures {
    track_features(clip, &default_weights(), &FeatureConfig::default()).unwrap()
}

#[test]
fn stereo_file_at_another_rate_matches_the_mono_original() {
    let mono: AudioClip<f64> = render(&ToneSpec::harmonic(220.0, 8, 0.8).with_duration(2.0).with_sample_rate(44_100)).unwrap();
    let interleaved: Vec<f64> = mono.samples().iter().flat_map(|&x| [x, x]).collect();
    let stereo = AudioClip::new(interleaved, 44_100, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stereo.wav");
    write_wav(&path, &stereo, WavEncoding::Float32).unwrap();

    let loaded: AudioClip<f64> = load_audio(&path).unwrap();
    assert_eq!(loaded.channels(), 2);
    let from_file = features(&prepare(&loaded, ANALYSIS_RATE).unwrap());
    let direct: AudioClip<f64> = render(&ToneSpec::harmonic(220.0, 8, 0.8).with_duration(2.0)).unwrap();
    let reference = features(&direct);
    assert!((from_file.hr_inharmonicity_raw - reference.hr_inharmonicity_raw).abs() < 1e-4);
    assert!((from_file.noisiness_raw - reference.noisiness_raw).abs() < 1e-4);
}

#[test]
fn single_precision_agrees_with_double() {
    let tone: AudioClip<f64> = render(&ToneSpec::harmonic(196.0, 10, 0.8).with_duration(1.0)).unwrap();
    let noisy = add_noise(&tone, 15.0, 3).unwrap();
    let single: AudioClip32 = noisy.cast();
    let a = hr_inharmonicity(&noisy, FrameConfig::default()).unwrap();
    let b = hr_inharmonicity(&single, FrameConfig::default()).unwrap();
    assert!((a - b as f64).abs() < 1e-4, "{a} vs {b}");
}

#[test]
fn experiments_do_not_depend_on_the_thread_count() {
    let cfg = InharmonicPartialsConfig { trials: 6, ..Default::default() };
    let on = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| experiment_inharmonic_partials(&cfg).unwrap())
    };
    assert_eq!(on(1), on(4));
}
