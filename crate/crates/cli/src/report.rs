//! Grouped corpus summaries written as a set of CSV files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use inharmo::scalar::quantile;
use inharmo::stats::{conditional_median, density_contour, group_summaries, percentile_curve, smooth_centroid_curve};

use crate::table::{fmt_f64, FeatureRow, FeatureTable, Variant};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GroupBy {
    Year,
    Dataset,
    Artist,
}

/// Group label; years sort numerically, labels lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroupKey {
    Year(i32),
    Label(String),
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKey::Year(y) => write!(f, "{y}"),
            GroupKey::Label(s) => f.write_str(s),
        }
    }
}

fn key_of(row: &FeatureRow, by: GroupBy) -> Option<GroupKey> {
    match by {
        GroupBy::Year => row.meta.year.map(GroupKey::Year),
        GroupBy::Dataset => row.meta.dataset.clone().map(GroupKey::Label),
        GroupBy::Artist => row.meta.artist.clone().map(GroupKey::Label),
    }
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub group_by: GroupBy,
    /// Centered moving-average length for centroid curves, in groups.
    pub smooth_window: usize,
    pub contour_grid: usize,
    pub contour_filter: usize,
    pub median_bins: usize,
}

impl ReportOptions {
    pub fn new(group_by: GroupBy) -> Self {
        Self { group_by, smooth_window: 5, contour_grid: 40, contour_filter: 3, median_bins: 20 }
    }
}

/// Files written and notices about skipped sections.
#[derive(Debug, Clone, Default)]
pub struct ReportOutput {
    pub files: Vec<PathBuf>,
    pub notices: Vec<String>,
}

type Column = (String, Box<dyn Fn(&FeatureRow) -> Option<f64>>);

fn columns(table: &FeatureTable) -> Vec<Column> {
    let mut cols: Vec<Column> = Vec::new();
    for &v in &table.variants {
        cols.push((format!("hr_inharmonicity_{}", v.suffix()), Box::new(move |r: &FeatureRow| r.features(v).map(|f| f.hr_inharmonicity))));
        cols.push((format!("noisiness_{}", v.suffix()), Box::new(move |r: &FeatureRow| r.features(v).map(|f| f.noisiness))));
    }
    for &v in &table.pc_variants {
        cols.push((format!("pc1_{}", v.suffix()), Box::new(move |r: &FeatureRow| r.pcs(v).map(|p| p[0]))));
        cols.push((format!("pc2_{}", v.suffix()), Box::new(move |r: &FeatureRow| r.pcs(v).map(|p| p[1]))));
    }
    cols
}

struct Out<'a> {
    dir: &'a Path,
    result: ReportOutput,
}

impl Out<'_> {
    fn writer(&mut self, name: &str, header: &[&str]) -> Result<csv::Writer<std::fs::File>, CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        self.result.files.push(path);
        Ok(w)
    }

    fn notice(&mut self, msg: String) {
        self.result.notices.push(msg);
    }
}

pub fn report(table: &FeatureTable, opts: &ReportOptions, out_dir: &Path) -> Result<ReportOutput, CliError> {
    std::fs::create_dir_all(out_dir)?;
    let mut out = Out { dir: out_dir, result: ReportOutput::default() };

    let mut groups: BTreeMap<GroupKey, Vec<&FeatureRow>> = BTreeMap::new();
    let mut missing = 0usize;
    for row in &table.rows {
        match key_of(row, opts.group_by) {
            Some(k) => groups.entry(k).or_default().push(row),
            None => missing += 1,
        }
    }
    if groups.is_empty() && !table.rows.is_empty() {
        return Err(CliError::Input(format!("no track has a {:?} value to group by", opts.group_by).to_lowercase()));
    }
    if missing > 0 {
        out.notice(format!("{missing} tracks without a {:?} value were left out of grouped reports", opts.group_by));
    }
    let cols = columns(table);

    let mut w = out.writer("group_stats.csv", &["group", "count", "feature", "median", "p25", "p75", "iqr"])?;
    for (key, rows) in &groups {
        for (name, get) in &cols {
            let v: Vec<f64> = rows.iter().filter_map(|r| get(r)).collect();
            if v.is_empty() {
                continue;
            }
            let q = |p: f64| quantile(&v, p).unwrap();
            let (m, p25, p75) = (q(0.5), q(0.25), q(0.75));
            w.write_record([
                key.to_string(),
                v.len().to_string(),
                name.clone(),
                fmt_f64(m),
                fmt_f64(p25),
                fmt_f64(p75),
                fmt_f64(p75 - p25),
            ])?;
        }
    }
    w.flush()?;

    let mut w = out.writer("percentiles.csv", &["feature", "percentile", "value"])?;
    for (name, get) in &cols {
        let v: Vec<f64> = table.rows.iter().filter_map(get).collect();
        if let Ok(curve) = percentile_curve(&v) {
            for (p, value) in curve {
                w.write_record([name.clone(), p.to_string(), fmt_f64(value)])?;
            }
        }
    }
    w.flush()?;

    for &v in &table.variants {
        let pairs: Vec<(f64, f64)> = table.rows.iter().filter_map(|r| r.features(v)).map(|f| (f.noisiness, f.hr_inharmonicity)).collect();
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        match conditional_median(&x, &y, opts.median_bins) {
            Ok(bins) => {
                let mut w = out.writer(&format!("conditional_median_{}.csv", v.suffix()), &["bin", "noisiness", "hr_inharmonicity"])?;
                for (i, (a, b)) in bins.into_iter().enumerate() {
                    w.write_record([i.to_string(), fmt_f64(a), fmt_f64(b)])?;
                }
                w.flush()?;
            }
            Err(_) => {
                out.notice(format!("conditional median ({}) skipped: {} tracks for {} bins", v.suffix(), pairs.len(), opts.median_bins))
            }
        }
    }

    for &v in &table.pc_variants {
        centroids(&mut out, &groups, v, opts)?;
        contours(&mut out, &groups, v, opts)?;
    }
    if table.pc_variants.is_empty() {
        out.notice("no pc1/pc2 columns: centroid and contour reports skipped (run `project` first)".into());
    }
    Ok(out.result)
}

fn centroids(out: &mut Out<'_>, groups: &BTreeMap<GroupKey, Vec<&FeatureRow>>, v: Variant, opts: &ReportOptions) -> Result<(), CliError> {
    let records: Vec<(GroupKey, f64, f64)> =
        groups.iter().flat_map(|(k, rows)| rows.iter().filter_map(|r| r.pcs(v)).map(move |p| (k.clone(), p[0], p[1]))).collect();
    let summaries = group_summaries(&records);
    let smooth = smooth_centroid_curve(&summaries, opts.smooth_window);
    let mut w = out.writer(
        &format!("centroids_{}.csv", v.suffix()),
        &["group", "count", "pc1", "pc2", "pc1_smoothed", "pc2_smoothed", "variance_sum"],
    )?;
    for (s, sm) in summaries.iter().zip(smooth) {
        w.write_record([
            s.key.to_string(),
            s.count.to_string(),
            fmt_f64(s.centroid[0]),
            fmt_f64(s.centroid[1]),
            fmt_f64(sm[0]),
            fmt_f64(sm[1]),
            fmt_f64(s.variance_sum),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn contours(out: &mut Out<'_>, groups: &BTreeMap<GroupKey, Vec<&FeatureRow>>, v: Variant, opts: &ReportOptions) -> Result<(), CliError> {
    let mut w = out.writer(&format!("contours_{}.csv", v.suffix()), &["group", "polygon", "vertex", "pc1", "pc2"])?;
    let mut skipped = Vec::new();
    for (key, rows) in groups {
        let pts: Vec<[f64; 2]> = rows.iter().filter_map(|r| r.pcs(v)).collect();
        if pts.len() < inharmo::stats::MIN_CONTOUR_POINTS {
            skipped.push(format!("{key} ({} tracks)", pts.len()));
            continue;
        }
        let polys = density_contour(&pts, opts.contour_grid, opts.contour_filter)
            .map_err(|e| CliError::Input(format!("contour for {key}: {e}")))?;
        for (pi, poly) in polys.iter().enumerate() {
            for (vi, p) in poly.iter().enumerate() {
                w.write_record([key.to_string(), pi.to_string(), vi.to_string(), fmt_f64(p[0]), fmt_f64(p[1])])?;
            }
        }
    }
    w.flush()?;
    if !skipped.is_empty() {
        out.notice(format!(
            "contours ({}) skipped for groups with fewer than {} tracks: {}",
            v.suffix(),
            inharmo::stats::MIN_CONTOUR_POINTS,
            skipped.join(", ")
        ));
    }
    Ok(())
}
