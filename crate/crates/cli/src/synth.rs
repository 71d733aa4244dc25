//! `synth` subcommand: synthetic experiments and tone rendering.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use inharmo::audio::{write_wav, WavEncoding};
use inharmo::synthlab::{
    beating_map, experiment_inharmonic_partials, experiment_noise_vs_sines, experiment_scales, experiment_shift_partial,
    experiment_two_sine, pairwise_partial_matrix, render, BeatingConfig, ExperimentResult, InharmonicPartialsConfig, NoiseVsSinesConfig,
    ScaleCase, ScalesConfig, ShiftPartialConfig, ToneSpec, TwoSineConfig, DEFAULT_SEED,
};

use crate::table::fmt_f64;
use crate::CliError;

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub experiment: Experiment,
    /// Seed for randomized experiments.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output file; CSV goes to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_case(s: &str) -> Result<ScaleCase, String> {
    s.parse().map_err(|e: inharmo::Error| e.to_string())
}

#[derive(Debug, Clone, Subcommand)]
pub enum Experiment {
    /// HR against the number of randomly mistuned partials.
    InharmonicPartials {
        #[arg(long, default_value_t = 0.8)]
        s: f64,
        #[arg(long, default_value_t = 220.0)]
        f0: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// HR while one partial moves to the next harmonic position.
    ShiftPartial {
        #[arg(long, default_value_t = 4)]
        partial: usize,
        #[arg(long, default_value_t = 220)]
        steps: usize,
        #[arg(long, default_value_t = 0.8)]
        s: f64,
        #[arg(long, default_value_t = 220.0)]
        f0: f64,
    },
    /// HR of two equal sines swept over intervals.
    TwoSine {
        #[arg(long, default_value_t = 220.0)]
        f_low: f64,
        #[arg(long, default_value_t = 2400.0)]
        max_cents: f64,
        #[arg(long, default_value_t = 1.0)]
        step_cents: f64,
    },
    /// HR of superposed tones drawn from a scale.
    Scales {
        /// continuous, chromatic-et, triad-et or triad-just.
        #[arg(long, value_parser = parse_case)]
        case: ScaleCase,
        #[arg(long, default_value_t = 10)]
        max_tones: usize,
        #[arg(long, default_value_t = 500)]
        trials: usize,
    },
    /// HR of every pair of partials of two tones.
    Pairwise {
        #[arg(long, default_value_t = 220.0)]
        f0_a: f64,
        #[arg(long, default_value_t = 261.6255653005986)]
        f0_b: f64,
        #[arg(long, default_value_t = 10)]
        partials: usize,
        #[arg(long, default_value_t = 0.8)]
        s: f64,
        #[arg(long, default_value_t = 0.0)]
        b_coeff: f64,
    },
    /// Envelope spectra of two complex tones over an interval sweep. Writes
    /// the dense grid to --out and the HR curve next to it.
    Beating {
        #[arg(long, default_value_t = 10.0)]
        step_cents: f64,
        #[arg(long, default_value_t = 1200.0)]
        max_cents: f64,
    },
    /// Sine plus noise at falling SNR versus sine plus random sines.
    NoiseVsSines {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 30)]
        max_k: usize,
    },
    /// Renders a complex tone to a WAV file (requires --out).
    Render {
        #[arg(long, default_value_t = 220.0)]
        f0: f64,
        #[arg(long, default_value_t = 10)]
        partials: usize,
        #[arg(long, default_value_t = 0.8)]
        s: f64,
        #[arg(long, default_value_t = 0.0)]
        b_coeff: f64,
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
    },
}

fn curve_csv(r: &ExperimentResult, prefix: Option<&str>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["x", "median", "p25", "p75", "trials", "seed"];
    if prefix.is_some() {
        header.insert(0, "curve");
    }
    w.write_record(&header)?;
    append_curve(&mut w, r, prefix)?;
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn append_curve(w: &mut csv::Writer<Vec<u8>>, r: &ExperimentResult, prefix: Option<&str>) -> Result<(), CliError> {
    for i in 0..r.len() {
        let mut rec = vec![
            fmt_f64(r.x_axis[i]),
            fmt_f64(r.median[i]),
            fmt_f64(r.p25[i]),
            fmt_f64(r.p75[i]),
            r.trials.to_string(),
            r.seed.to_string(),
        ];
        if let Some(p) = prefix {
            rec.insert(0, p.to_string());
        }
        w.write_record(&rec)?;
    }
    Ok(())
}

/// Output of one synth run: the main CSV plus optional extra files and messages.
#[derive(Debug, Default)]
pub struct SynthOutput {
    pub csv: Vec<u8>,
    /// Written next to the main output, `(file-name suffix, bytes)`.
    pub extra: Vec<(String, Vec<u8>)>,
    pub messages: Vec<String>,
}

fn err(e: inharmo::Error) -> CliError {
    CliError::Input(e.to_string())
}

/// Runs an experiment and returns its CSV; `render` writes its WAV directly.
pub fn run_synth(args: &SynthArgs) -> Result<SynthOutput, CliError> {
    let seed = args.seed;
    let mut out = SynthOutput::default();
    match &args.experiment {
        Experiment::InharmonicPartials { s, f0, trials } => {
            let cfg = InharmonicPartialsConfig { f0: *f0, s: *s, trials: *trials, seed, ..Default::default() };
            out.csv = curve_csv(&experiment_inharmonic_partials(&cfg).map_err(err)?, None)?;
            out.messages.push(format!("seed: {seed}"));
        }
        Experiment::ShiftPartial { partial, steps, s, f0 } => {
            let cfg = ShiftPartialConfig { f0: *f0, s: *s, partial_index: *partial, steps: *steps, ..Default::default() };
            out.csv = curve_csv(&experiment_shift_partial(&cfg).map_err(err)?, None)?;
        }
        Experiment::TwoSine { f_low, max_cents, step_cents } => {
            let cfg = TwoSineConfig { f_low: *f_low, max_cents: *max_cents, step_cents: *step_cents };
            out.csv = curve_csv(&experiment_two_sine(&cfg).map_err(err)?, None)?;
        }
        Experiment::Scales { case, max_tones, trials } => {
            let cfg = ScalesConfig { max_tones: *max_tones, trials: *trials, seed, ..ScalesConfig::new(*case) };
            out.csv = curve_csv(&experiment_scales(&cfg).map_err(err)?, None)?;
            out.messages.push(format!("seed: {seed}"));
        }
        Experiment::Pairwise { f0_a, f0_b, partials, s, b_coeff } => {
            let a = ToneSpec::harmonic(*f0_a, *partials, *s).with_b(*b_coeff);
            let b = ToneSpec::harmonic(*f0_b, *partials, *s).with_b(*b_coeff);
            let m = pairwise_partial_matrix(&a, &b).map_err(err)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["i", "j", "freq_i", "freq_j", "tone_i", "tone_j", "hr"])?;
            for i in 0..m.frequencies.len() {
                for j in 0..m.frequencies.len() {
                    w.write_record([
                        i.to_string(),
                        j.to_string(),
                        fmt_f64(m.frequencies[i]),
                        fmt_f64(m.frequencies[j]),
                        m.tone[i].to_string(),
                        m.tone[j].to_string(),
                        fmt_f64(m.values[i][j]),
                    ])?;
                }
            }
            out.csv = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
            out.messages.push(format!("mean HR within tones {:.4}, across tones {:.4}", m.within_tone_mean(), m.cross_tone_mean()));
        }
        Experiment::Beating { step_cents, max_cents } => {
            let cfg = BeatingConfig { step_cents: *step_cents, max_cents: *max_cents, ..Default::default() };
            let map = beating_map(&cfg).map_err(err)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["cents", "env_freq", "power"])?;
            for (c, row) in map.cents.iter().zip(&map.rows) {
                for (f, p) in map.env_freqs.iter().zip(row) {
                    w.write_record([fmt_f64(*c), fmt_f64(*f), fmt_f64(*p)])?;
                }
            }
            out.csv = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["cents", "hr", "beat_freq"])?;
            for i in 0..map.cents.len() {
                w.write_record([fmt_f64(map.cents[i]), fmt_f64(map.hr[i]), fmt_f64(map.peak_below(i, 20.0).0)])?;
            }
            out.extra.push(("hr".into(), w.into_inner().map_err(|e| CliError::Io(e.into_error()))?));
            out.messages.push(format!("envelope-spectrum floor (map median): {}", fmt_f64(map.floor)));
        }
        Experiment::NoiseVsSines { trials, max_k } => {
            let cfg = NoiseVsSinesConfig { trials: *trials, max_k: *max_k, seed, ..Default::default() };
            let r = experiment_noise_vs_sines(&cfg).map_err(err)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["curve", "x", "median", "p25", "p75", "trials", "seed"])?;
            append_curve(&mut w, &r.noise, Some("noise_snr_db"))?;
            append_curve(&mut w, &r.sines, Some("random_sines"))?;
            out.csv = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
            out.messages.push(format!("seed: {seed}"));
            out.messages.push(match r.crossing {
                Some(k) => format!("0 dB noise matches {k:.2} random sines"),
                None => "0 dB noise is not reached by the random-sines curve".into(),
            });
        }
        Experiment::Render { f0, partials, s, b_coeff, duration } => {
            let Some(path) = &args.out else {
                return Err(CliError::Input("render needs --out".into()));
            };
            let spec = ToneSpec::harmonic(*f0, *partials, *s).with_b(*b_coeff).with_duration(*duration);
            let clip = render::<f64>(&spec).map_err(err)?;
            write_wav(path, &clip, WavEncoding::Float32).map_err(err)?;
            out.messages.push(format!("wrote {}", path.display()));
        }
    }
    Ok(out)
}
