//! Long-format per-track feature tables.

use std::io::{Read, Write};
use std::path::Path;

use inharmo::FeaturePair;

use crate::manifest::TrackMeta;
use crate::CliError;

/// Formats a float with 9 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.8e}")
}

/// Which audio variants a table carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Raw,
    Weighted,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Raw, Variant::Weighted];

    pub fn suffix(self) -> &'static str {
        match self {
            Variant::Raw => "raw",
            Variant::Weighted => "weighted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureRow {
    pub meta: TrackMeta,
    pub raw: Option<FeaturePair>,
    pub weighted: Option<FeaturePair>,
    pub pc_raw: Option<[f64; 2]>,
    pub pc_weighted: Option<[f64; 2]>,
}

impl FeatureRow {
    pub fn features(&self, v: Variant) -> Option<FeaturePair> {
        match v {
            Variant::Raw => self.raw,
            Variant::Weighted => self.weighted,
        }
    }

    pub fn pcs(&self, v: Variant) -> Option<[f64; 2]> {
        match v {
            Variant::Raw => self.pc_raw,
            Variant::Weighted => self.pc_weighted,
        }
    }

    pub fn set_pcs(&mut self, v: Variant, pc: [f64; 2]) {
        match v {
            Variant::Raw => self.pc_raw = Some(pc),
            Variant::Weighted => self.pc_weighted = Some(pc),
        }
    }
}

/// Rows plus the set of column groups present.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub variants: Vec<Variant>,
    pub pc_variants: Vec<Variant>,
    pub rows: Vec<FeatureRow>,
}

const META_COLUMNS: [&str; 6] = ["track_id", "dataset", "year", "artist", "title", "group_id"];

fn feature_columns(v: Variant) -> [String; 2] {
    [format!("hr_inharmonicity_{}", v.suffix()), format!("noisiness_{}", v.suffix())]
}

fn pc_columns(v: Variant) -> [String; 2] {
    [format!("pc1_{}", v.suffix()), format!("pc2_{}", v.suffix())]
}

impl FeatureTable {
    pub fn new(variants: Vec<Variant>) -> Self {
        Self { variants, pc_variants: Vec::new(), rows: Vec::new() }
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = META_COLUMNS.iter().map(|s| s.to_string()).collect();
        for &v in &self.variants {
            h.extend(feature_columns(v));
        }
        for &v in &self.pc_variants {
            h.extend(pc_columns(v));
        }
        h
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        let opt = |s: &Option<String>| s.clone().unwrap_or_default();
        for r in &self.rows {
            let m = &r.meta;
            let mut rec = vec![
                m.track_id.clone(),
                opt(&m.dataset),
                m.year.map(|y| y.to_string()).unwrap_or_default(),
                opt(&m.artist),
                opt(&m.title),
                opt(&m.group_id),
            ];
            for &v in &self.variants {
                let f = r.features(v).ok_or_else(|| CliError::Input(format!("track {} lacks {} features", m.track_id, v.suffix())))?;
                rec.push(fmt_f64(f.hr_inharmonicity));
                rec.push(fmt_f64(f.noisiness));
            }
            for &v in &self.pc_variants {
                let pc = r.pcs(v).ok_or_else(|| CliError::Input(format!("track {} lacks {} components", m.track_id, v.suffix())))?;
                rec.push(fmt_f64(pc[0]));
                rec.push(fmt_f64(pc[1]));
            }
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let f = std::fs::File::create(path).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn read_from<R: Read>(input: R, name: &str) -> Result<Self, CliError> {
        let bad = |msg: String| CliError::Input(format!("{name}: {msg}"));
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
        let col = |c: &str| header.iter().position(|h| h == c);
        let track_col = col("track_id").ok_or_else(|| bad("missing track_id column".into()))?;
        let mut table = FeatureTable::default();
        let mut feature_idx = Vec::new();
        let mut pc_idx = Vec::new();
        for v in Variant::ALL {
            let [a, b] = feature_columns(v);
            if let (Some(i), Some(j)) = (col(&a), col(&b)) {
                table.variants.push(v);
                feature_idx.push((v, i, j));
            }
            let [a, b] = pc_columns(v);
            if let (Some(i), Some(j)) = (col(&a), col(&b)) {
                table.pc_variants.push(v);
                pc_idx.push((v, i, j));
            }
        }
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let text = |c: Option<usize>| c.and_then(|i| rec.get(i)).filter(|s| !s.is_empty()).map(str::to_string);
            let num = |i: usize| -> Result<f64, CliError> {
                rec.get(i).unwrap_or("").parse::<f64>().map_err(|e| bad(format!("row {}: column {}: {e}", line + 1, &header[i])))
            };
            let year = match text(col("year")) {
                Some(y) => Some(y.parse::<i32>().map_err(|e| bad(format!("row {}: year: {e}", line + 1)))?),
                None => None,
            };
            let mut row = FeatureRow {
                meta: TrackMeta {
                    track_id: rec.get(track_col).unwrap_or("").to_string(),
                    dataset: text(col("dataset")),
                    year,
                    artist: text(col("artist")),
                    title: text(col("title")),
                    group_id: text(col("group_id")),
                },
                ..Default::default()
            };
            for &(v, i, j) in &feature_idx {
                let pair = FeaturePair { hr_inharmonicity: num(i)?, noisiness: num(j)? };
                match v {
                    Variant::Raw => row.raw = Some(pair),
                    Variant::Weighted => row.weighted = Some(pair),
                }
            }
            for &(v, i, j) in &pc_idx {
                row.set_pcs(v, [num(i)?, num(j)?]);
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let f = std::fs::File::open(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::read_from(f, &path.display().to_string())
    }
}
