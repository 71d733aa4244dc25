//! Cached, parallel per-track feature extraction.

use std::fs;
use std::path::{Path, PathBuf};

use inharmo::audio::{gate, load_audio, prepare};
use inharmo::features::{gated_features, FeatureConfig};
use inharmo::weighting::{contour_to_weights, iso226_contour};
use inharmo::{FeaturePair, WeightCurve};
use rayon::prelude::*;

use crate::cache::{sha256_hex, Cache, CacheEntry};
use crate::manifest::TrackRecord;
use crate::table::{FeatureRow, FeatureTable, Variant};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub config: FeatureConfig,
    pub variants: Vec<Variant>,
    pub jobs: usize,
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackError {
    pub track_id: String,
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ExtractReport {
    pub table: FeatureTable,
    pub errors: Vec<TrackError>,
    pub computed: usize,
    pub cached: usize,
}

enum Outcome {
    Cached(FeatureRow),
    Computed(FeatureRow),
    Failed(TrackError),
}

struct Extractor<'a> {
    opts: &'a ExtractOptions,
    config_key: String,
    weights: WeightCurve,
    cache: Option<Cache>,
}

impl Extractor<'_> {
    fn process(&self, rec: &TrackRecord) -> Outcome {
        let fail = |message: String| Outcome::Failed(TrackError { track_id: rec.meta.track_id.clone(), path: rec.path.clone(), message });
        let bytes = match fs::read(&rec.path) {
            Ok(b) => b,
            Err(e) => return fail(format!("cannot read audio file: {e}")),
        };
        let hash = sha256_hex(&bytes);
        let previous = self.cache.as_ref().and_then(|c| c.get(&hash, &self.config_key));
        let mut row = FeatureRow { meta: rec.meta.clone(), ..Default::default() };
        if let Some(entry) = &previous {
            row.raw = entry.raw.map(Into::into);
            row.weighted = entry.weighted.map(Into::into);
            if self.opts.variants.iter().all(|&v| row.features(v).is_some()) {
                return Outcome::Cached(self.keep_requested(row));
            }
        }
        match self.compute(&rec.path) {
            Ok((raw, weighted)) => {
                row.raw = raw.or(row.raw);
                row.weighted = weighted.or(row.weighted);
            }
            Err(e) => return fail(e.to_string()),
        }
        if let Some(cache) = &self.cache {
            let entry = CacheEntry {
                content_hash: hash,
                config_key: self.config_key.clone(),
                tool_version: inharmo::VERSION.to_string(),
                raw: row.raw.map(Into::into),
                weighted: row.weighted.map(Into::into),
            };
            if let Err(e) = cache.put(&entry) {
                eprintln!("warning: could not cache {}: {e}", rec.meta.track_id);
            }
        }
        Outcome::Computed(self.keep_requested(row))
    }

    fn keep_requested(&self, mut row: FeatureRow) -> FeatureRow {
        if !self.opts.variants.contains(&Variant::Raw) {
            row.raw = None;
        }
        if !self.opts.variants.contains(&Variant::Weighted) {
            row.weighted = None;
        }
        row
    }

    fn compute(&self, path: &Path) -> inharmo::Result<(Option<FeaturePair>, Option<FeaturePair>)> {
        let cfg = &self.opts.config;
        let clip = prepare(&load_audio::<f64>(path)?, cfg.sample_rate)?;
        let gated = gate(&clip, cfg.gate)?;
        let raw = if self.opts.variants.contains(&Variant::Raw) { Some(gated_features(&gated, None, cfg)?) } else { None };
        let weighted =
            if self.opts.variants.contains(&Variant::Weighted) { Some(gated_features(&gated, Some(&self.weights), cfg)?) } else { None };
        Ok((raw, weighted))
    }
}

/// Extracts features for every record. Row order follows the manifest
/// regardless of `jobs`; failing tracks become [`TrackError`]s.
pub fn extract(records: &[TrackRecord], opts: &ExtractOptions) -> Result<ExtractReport, CliError> {
    opts.config.frame.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let contour = iso226_contour(opts.config.phon).map_err(|e| CliError::Input(e.to_string()))?;
    let extractor = Extractor {
        opts,
        config_key: opts.config.key(),
        weights: contour_to_weights(&contour),
        cache: opts.cache_dir.as_deref().map(Cache::open).transpose()?,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Outcome> = pool.install(|| records.par_iter().map(|r| extractor.process(r)).collect());

    let mut report = ExtractReport {
        table: FeatureTable::new(Variant::ALL.into_iter().filter(|v| opts.variants.contains(v)).collect()),
        errors: Vec::new(),
        computed: 0,
        cached: 0,
    };
    for o in outcomes {
        match o {
            Outcome::Cached(row) => {
                report.cached += 1;
                report.table.rows.push(row);
            }
            Outcome::Computed(row) => {
                report.computed += 1;
                report.table.rows.push(row);
            }
            Outcome::Failed(e) => report.errors.push(e),
        }
    }
    Ok(report)
}

pub fn write_errors(path: &Path, errors: &[TrackError]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["track_id", "path", "error"])?;
    for e in errors {
        w.write_record([e.track_id.as_str(), &e.path.display().to_string(), e.message.as_str()])?;
    }
    w.flush()?;
    Ok(())
}
