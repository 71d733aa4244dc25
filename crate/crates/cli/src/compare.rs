//! Paired differences between two feature tables.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use inharmo::scalar::median;

use crate::table::{fmt_f64, FeatureRow, FeatureTable, Variant};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct PairDelta {
    pub key: String,
    pub track_a: String,
    pub track_b: String,
    /// `b - a` per feature, in [`Comparison::features`] order.
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub features: Vec<String>,
    pub pairs: Vec<PairDelta>,
    /// Median of `|delta|` per feature; `None` without pairs.
    pub median_abs: Vec<Option<f64>>,
    pub unmatched_a: Vec<String>,
    pub unmatched_b: Vec<String>,
}

type Getter = fn(&FeatureRow, Variant) -> Option<f64>;

fn getters(a: &FeatureTable, b: &FeatureTable) -> Vec<(String, Variant, Getter)> {
    let mut out: Vec<(String, Variant, Getter)> = Vec::new();
    for v in Variant::ALL {
        if a.variants.contains(&v) && b.variants.contains(&v) {
            out.push((format!("hr_inharmonicity_{}", v.suffix()), v, |r, v| r.features(v).map(|f| f.hr_inharmonicity)));
            out.push((format!("noisiness_{}", v.suffix()), v, |r, v| r.features(v).map(|f| f.noisiness)));
        }
    }
    for v in Variant::ALL {
        if a.pc_variants.contains(&v) && b.pc_variants.contains(&v) {
            out.push((format!("pc1_{}", v.suffix()), v, |r, v| r.pcs(v).map(|p| p[0])));
            out.push((format!("pc2_{}", v.suffix()), v, |r, v| r.pcs(v).map(|p| p[1])));
        }
    }
    out
}

fn index(table: &FeatureTable, name: &str) -> Result<HashMap<String, usize>, CliError> {
    let mut map = HashMap::new();
    for (i, r) in table.rows.iter().enumerate() {
        if map.insert(r.meta.pair_key().to_string(), i).is_some() {
            return Err(CliError::Input(format!("{name}: pairing key '{}' occurs twice", r.meta.pair_key())));
        }
    }
    Ok(map)
}

/// Pairs rows by `group_id` (falling back to `track_id`) in the order of
/// table `a`.
pub fn compare(a: &FeatureTable, b: &FeatureTable) -> Result<Comparison, CliError> {
    let get = getters(a, b);
    if get.is_empty() {
        return Err(CliError::Input("the tables share no feature columns".into()));
    }
    let ia = index(a, "first table")?;
    let ib = index(b, "second table")?;
    let mut pairs = Vec::new();
    let mut unmatched_a = Vec::new();
    for ra in &a.rows {
        let key = ra.meta.pair_key();
        let Some(&j) = ib.get(key) else {
            unmatched_a.push(key.to_string());
            continue;
        };
        let rb = &b.rows[j];
        let deltas = get
            .iter()
            .map(|(_, v, g)| match (g(ra, *v), g(rb, *v)) {
                (Some(x), Some(y)) => y - x,
                _ => f64::NAN,
            })
            .collect();
        pairs.push(PairDelta { key: key.to_string(), track_a: ra.meta.track_id.clone(), track_b: rb.meta.track_id.clone(), deltas });
    }
    let mut unmatched_b: Vec<String> = b.rows.iter().map(|r| r.meta.pair_key().to_string()).filter(|k| !ia.contains_key(k)).collect();
    unmatched_b.sort();
    let median_abs = (0..get.len())
        .map(|i| {
            let v: Vec<f64> = pairs.iter().map(|p| p.deltas[i].abs()).filter(|d| !d.is_nan()).collect();
            median(&v)
        })
        .collect();
    Ok(Comparison { features: get.into_iter().map(|g| g.0).collect(), pairs, median_abs, unmatched_a, unmatched_b })
}

impl Comparison {
    pub fn write_pairs<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["pair_key".to_string(), "track_id_a".into(), "track_id_b".into()];
        header.extend(self.features.iter().map(|f| format!("delta_{f}")));
        w.write_record(&header)?;
        for p in &self.pairs {
            let mut rec = vec![p.key.clone(), p.track_a.clone(), p.track_b.clone()];
            rec.extend(p.deltas.iter().map(|&d| fmt_f64(d)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["feature", "pairs", "median_abs_diff"])?;
        for (f, m) in self.features.iter().zip(&self.median_abs) {
            w.write_record([f.clone(), self.pairs.len().to_string(), m.map(fmt_f64).unwrap_or_default()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Median absolute difference by feature name.
    pub fn summary(&self) -> BTreeMap<String, Option<f64>> {
        self.features.iter().cloned().zip(self.median_abs.iter().copied()).collect()
    }
}
