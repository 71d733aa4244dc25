//! Fitting and applying the (noisiness, HR-inharmonicity) projection.

use std::path::Path;

use inharmo::stats::{fit_projection, Exponents};
use inharmo::Projection;
use serde::{Deserialize, Serialize};

use crate::table::{FeatureTable, Variant};
use crate::CliError;

/// Projection document: one fitted projection per audio variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ProjectionFile {
    pub raw: Option<Projection>,
    pub weighted: Option<Projection>,
}

impl ProjectionFile {
    pub fn get(&self, v: Variant) -> Option<&Projection> {
        match v {
            Variant::Raw => self.raw.as_ref(),
            Variant::Weighted => self.weighted.as_ref(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read projection {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("projection {}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

pub fn exponents_for(v: Variant) -> Exponents {
    match v {
        Variant::Raw => Exponents::RAW,
        Variant::Weighted => Exponents::WEIGHTED,
    }
}

/// Fits one projection per variant present in the table.
pub fn fit(table: &FeatureTable) -> Result<ProjectionFile, CliError> {
    if table.variants.is_empty() {
        return Err(CliError::Input("table has no feature columns to fit".into()));
    }
    let mut file = ProjectionFile::default();
    for &v in &table.variants {
        let pairs: Vec<_> = table.rows.iter().filter_map(|r| r.features(v)).collect();
        let x: Vec<f64> = pairs.iter().map(|p| p.noisiness).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.hr_inharmonicity).collect();
        let p =
            fit_projection(&x, &y, exponents_for(v)).map_err(|e| CliError::Input(format!("cannot fit {} projection: {e}", v.suffix())))?;
        match v {
            Variant::Raw => file.raw = Some(p),
            Variant::Weighted => file.weighted = Some(p),
        }
    }
    Ok(file)
}

/// Sets pc1/pc2 for every variant that has both features and a projection.
pub fn apply(table: &mut FeatureTable, file: &ProjectionFile) -> Result<(), CliError> {
    let usable: Vec<Variant> = table.variants.iter().copied().filter(|&v| file.get(v).is_some()).collect();
    if usable.is_empty() && !table.rows.is_empty() {
        return Err(CliError::Input("projection has no variant matching the table's feature columns".into()));
    }
    for &v in &usable {
        let p = file.get(v).unwrap();
        for row in &mut table.rows {
            if let Some(f) = row.features(v) {
                row.set_pcs(v, p.project(f.noisiness, f.hr_inharmonicity));
            }
        }
        if !table.pc_variants.contains(&v) {
            table.pc_variants.push(v);
        }
    }
    table.pc_variants.sort();
    Ok(())
}
