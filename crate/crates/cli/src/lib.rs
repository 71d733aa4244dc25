//! Command-line front end for corpus feature extraction and analysis.

pub mod cache;
pub mod compare;
pub mod extract;
pub mod manifest;
pub mod project;
pub mod report;
pub mod synth;
pub mod table;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use inharmo::audio::GateConfig;
use inharmo::features::{FeatureConfig, FrameConfig};
use inharmo::weighting::{contour_to_weights, iso226_contour, DEFAULT_PHON};

use crate::extract::{extract, write_errors, ExtractOptions};
use crate::manifest::load_manifest;
use crate::project::ProjectionFile;
use crate::report::{GroupBy, ReportOptions};
use crate::table::{fmt_f64, FeatureTable, Variant};

pub use crate::cache::CACHE_DIR_ENV;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or unreadable user input; exit code 1.
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "inharmo", version, about = "Inharmonicity and noisiness analysis of music corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute per-track features for a manifest.
    Extract(ExtractArgs),
    /// Fit or apply the PC1/PC2 projection.
    Project(ProjectArgs),
    /// Grouped summaries of a (projected) feature table.
    Report(ReportArgs),
    /// Paired feature differences between two tables.
    Compare(CompareArgs),
    /// Synthetic experiments.
    Synth(synth::SynthArgs),
    /// Equal-loudness weighting curve.
    Weights(WeightsArgs),
}

#[derive(Debug, Args)]
#[group(id = "variant", multiple = false)]
pub struct VariantFlags {
    /// Only loudness-weighted features.
    #[arg(long, group = "variant")]
    pub weighted: bool,
    /// Only features of the unweighted audio.
    #[arg(long, group = "variant")]
    pub raw: bool,
    /// Both variants (the default).
    #[arg(long, group = "variant")]
    pub both: bool,
}

impl VariantFlags {
    pub fn variants(&self) -> Vec<Variant> {
        if self.weighted {
            vec![Variant::Weighted]
        } else if self.raw {
            vec![Variant::Raw]
        } else {
            Variant::ALL.to_vec()
        }
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// CSV or JSON manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output feature table (CSV). Failures go to errors.csv in the same directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, env = CACHE_DIR_ENV)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub variant: VariantFlags,
    /// Gate threshold in dB relative to the peak.
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    pub gate_db: f64,
    /// HarmonicRatio frame length in samples.
    #[arg(long, default_value_t = 2048)]
    pub frame: usize,
    /// HarmonicRatio hop in samples.
    #[arg(long, default_value_t = 1024)]
    pub hop: usize,
    /// Loudness level of the weighting contour.
    #[arg(long, default_value_t = DEFAULT_PHON)]
    pub phon: f64,
}

impl ExtractArgs {
    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            frame: FrameConfig { frame_length: self.frame, hop: self.hop },
            gate: GateConfig { threshold_db: self.gate_db, ..GateConfig::default() },
            phon: self.phon,
            ..FeatureConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Feature table from `extract`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Projection JSON: written with --fit, read otherwise.
    #[arg(long)]
    pub projection: PathBuf,
    /// Fit the projection on the input table.
    #[arg(long)]
    pub fit: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Directory receiving the report CSVs.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub group_by: GroupBy,
    /// Centroid smoothing window, in groups.
    #[arg(long, default_value_t = 5)]
    pub smooth: usize,
    /// Density-contour histogram cells per axis.
    #[arg(long, default_value_t = 40)]
    pub grid: usize,
    /// Density-contour mean-filter size, in cells.
    #[arg(long, default_value_t = 3)]
    pub filter: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Per-pair deltas; the median summary is printed to stdout.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long, default_value_t = DEFAULT_PHON)]
    pub phon: f64,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}{ext}"))
}

/// Location of the errors sidecar for an extract output path.
pub fn errors_path(out: &Path) -> PathBuf {
    out.parent().unwrap_or(Path::new(".")).join("errors.csv")
}

fn run_extract(args: &ExtractArgs) -> Result<i32, CliError> {
    let records = load_manifest(&args.manifest)?;
    let opts = ExtractOptions {
        config: args.feature_config(),
        variants: args.variant.variants(),
        jobs: args.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        cache_dir: args.cache_dir.clone(),
    };
    let report = extract(&records, &opts)?;
    report.table.write(&args.out)?;
    eprintln!("{} tracks: {} computed, {} from cache, {} failed", records.len(), report.computed, report.cached, report.errors.len());
    if report.errors.is_empty() {
        return Ok(EXIT_OK);
    }
    let path = errors_path(&args.out);
    write_errors(&path, &report.errors)?;
    eprintln!("failures written to {}", path.display());
    Ok(EXIT_PARTIAL)
}

fn run_project(args: &ProjectArgs) -> Result<i32, CliError> {
    let mut table = FeatureTable::read(&args.input)?;
    let file = if args.fit {
        let f = project::fit(&table)?;
        f.save(&args.projection)?;
        f
    } else {
        if !args.projection.exists() {
            return Err(CliError::Input(format!("projection {} does not exist; fit one with --fit", args.projection.display())));
        }
        ProjectionFile::load(&args.projection)?
    };
    project::apply(&mut table, &file)?;
    table.write(&args.out)?;
    Ok(EXIT_OK)
}

fn run_report(args: &ReportArgs) -> Result<i32, CliError> {
    let table = FeatureTable::read(&args.input)?;
    let opts = ReportOptions {
        smooth_window: args.smooth,
        contour_grid: args.grid,
        contour_filter: args.filter,
        ..ReportOptions::new(args.group_by)
    };
    let out = report::report(&table, &opts, &args.out)?;
    for n in &out.notices {
        eprintln!("notice: {n}");
    }
    for f in &out.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(EXIT_OK)
}

fn run_compare(args: &CompareArgs) -> Result<i32, CliError> {
    let a = FeatureTable::read(&args.a)?;
    let b = FeatureTable::read(&args.b)?;
    let c = compare::compare(&a, &b)?;
    c.write_pairs(std::fs::File::create(&args.out)?)?;
    c.write_summary(std::io::stdout())?;
    if c.unmatched_a.is_empty() && c.unmatched_b.is_empty() {
        return Ok(EXIT_OK);
    }
    eprintln!(
        "unmatched pairs: {} only in {}: [{}]; {} only in {}: [{}]",
        c.unmatched_a.len(),
        args.a.display(),
        c.unmatched_a.join(", "),
        c.unmatched_b.len(),
        args.b.display(),
        c.unmatched_b.join(", ")
    );
    Ok(EXIT_PARTIAL)
}

fn run_synth(args: &synth::SynthArgs) -> Result<i32, CliError> {
    let out = synth::run_synth(args)?;
    if !matches!(args.experiment, synth::Experiment::Render { .. }) {
        write_output(args.out.as_deref(), &out.csv)?;
        for (suffix, bytes) in &out.extra {
            match &args.out {
                Some(p) => std::fs::write(sibling(p, suffix), bytes)?,
                None => std::io::stdout().write_all(bytes)?,
            }
        }
    }
    for m in &out.messages {
        eprintln!("{m}");
    }
    Ok(EXIT_OK)
}

/// CSV of the weighting curve at the contour's frequencies.
pub fn weights_csv(phon: f64) -> Result<Vec<u8>, CliError> {
    let contour = iso226_contour(phon).map_err(|e| CliError::Input(e.to_string()))?;
    let curve: inharmo::WeightCurve = contour_to_weights(&contour);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["frequency", "gain_db", "linear_gain"])?;
    for (f, g) in curve.freqs.iter().zip(&curve.linear_gain) {
        w.write_record([fmt_f64(*f), fmt_f64(20.0 * g.log10()), fmt_f64(*g)])?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn run_weights(args: &WeightsArgs) -> Result<i32, CliError> {
    write_output(args.out.as_deref(), &weights_csv(args.phon)?)?;
    Ok(EXIT_OK)
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Extract(a) => run_extract(a),
        Command::Project(a) => run_project(a),
        Command::Report(a) => run_report(a),
        Command::Compare(a) => run_compare(a),
        Command::Synth(a) => run_synth(a),
        Command::Weights(a) => run_weights(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FATAL
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn variant_flags_default_to_both() {
        let cli = Cli::try_parse_from(["inharmo", "extract", "--manifest", "m.csv", "--out", "o.csv"]).unwrap();
        let Command::Extract(a) = cli.command else { panic!("not extract") };
        assert_eq!(a.variant.variants(), Variant::ALL.to_vec());
        assert_eq!(a.feature_config().key(), FeatureConfig::default().key());
    }

    #[test]
    fn errors_land_next_to_the_output() {
        assert_eq!(errors_path(Path::new("out/features.csv")), Path::new("out/errors.csv"));
    }
}
