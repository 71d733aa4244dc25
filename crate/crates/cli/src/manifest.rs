//! Track manifests: CSV with a header row, or a JSON array of records.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Descriptive fields of one track.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TrackMeta {
    pub track_id: String,
    pub dataset: Option<String>,
    pub year: Option<i32>,
    pub artist: Option<String>,
    pub title: Option<String>,
    pub group_id: Option<String>,
}

impl TrackMeta {
    /// Key used to pair rows across tables.
    pub fn pair_key(&self) -> &str {
        self.group_id.as_deref().unwrap_or(&self.track_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackRecord {
    pub meta: TrackMeta,
    /// Absolute, or relative to the manifest's directory once loaded.
    pub path: PathBuf,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    track_id: String,
    path: String,
    #[serde(default)]
    dataset: Option<String>,
    #[serde(default, deserialize_with = "year_field")]
    year: Option<i32>,
    #[serde(default)]
    artist: Option<String>,
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    group_id: Option<String>,
}

/// Accepts integers, numeric strings and empty cells.
fn year_field<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<i32>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Year {
        Int(i64),
        Text(String),
    }
    match Option::<Year>::deserialize(d)? {
        None => Ok(None),
        Some(Year::Int(y)) => i32::try_from(y).map(Some).map_err(serde::de::Error::custom),
        Some(Year::Text(s)) if s.trim().is_empty() => Ok(None),
        Some(Year::Text(s)) => s.trim().parse().map(Some).map_err(serde::de::Error::custom),
    }
}

fn non_empty(v: Option<String>) -> Option<String> {
    v.filter(|s| !s.trim().is_empty())
}

/// Reads and validates a manifest. Relative paths are resolved against the
/// manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<TrackRecord>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read manifest {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('[');
    let raw: Vec<RawRecord> = if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("manifest {}: {e}", path.display())))?
    } else {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        reader.deserialize().collect::<Result<_, _>>().map_err(|e| CliError::Input(format!("manifest {}: {e}", path.display())))?
    };
    let base = path.parent().unwrap_or(Path::new("."));
    let mut seen = HashSet::new();
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let row = i + 1;
            if r.track_id.trim().is_empty() {
                return Err(CliError::Input(format!("manifest record {row}: empty track_id")));
            }
            if !seen.insert(r.track_id.clone()) {
                return Err(CliError::Input(format!("manifest record {row}: duplicate track_id '{}'", r.track_id)));
            }
            if let Some(y) = r.year {
                if !(1900..=2100).contains(&y) {
                    return Err(CliError::Input(format!("manifest record {row}: year {y} outside 1900-2100")));
                }
            }
            if r.path.trim().is_empty() {
                return Err(CliError::Input(format!("manifest record {row}: empty path")));
            }
            let p = PathBuf::from(&r.path);
            Ok(TrackRecord {
                meta: TrackMeta {
                    track_id: r.track_id,
                    dataset: non_empty(r.dataset),
                    year: r.year,
                    artist: non_empty(r.artist),
                    title: non_empty(r.title),
                    group_id: non_empty(r.group_id),
                },
                path: if p.is_absolute() { p } else { base.join(p) },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn csv_manifest_with_optional_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "m.csv",
            "track_id,path,dataset,year,artist,title,group_id\na,a.wav,bea,1965,X,Song,\nb,/abs/b.wav,,,,,pair1\n",
        );
        let m = load_manifest(&p).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].path, dir.path().join("a.wav"));
        assert_eq!(m[0].meta.year, Some(1965));
        assert_eq!(m[0].meta.group_id, None);
        assert_eq!(m[0].meta.pair_key(), "a");
        assert_eq!(m[1].path, PathBuf::from("/abs/b.wav"));
        assert_eq!(m[1].meta.pair_key(), "pair1");
        assert_eq!(m[1].meta.dataset, None);
    }

    #[test]
    fn minimal_csv_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "m.csv", "track_id,path\nx,x.wav\n");
        assert_eq!(load_manifest(&p).unwrap()[0].meta.track_id, "x");
        let j =
            write(dir.path(), "m.json", r#"[{"track_id":"x","path":"x.wav","year":"1999"},{"track_id":"y","path":"y.wav","year":2001}]"#);
        let m = load_manifest(&j).unwrap();
        assert_eq!(m[0].meta.year, Some(1999));
        assert_eq!(m[1].meta.year, Some(2001));
    }

    #[test]
    fn invalid_manifests() {
        let dir = tempfile::tempdir().unwrap();
        for (name, text) in [
            ("dup.csv", "track_id,path\na,a.wav\na,b.wav\n"),
            ("year.csv", "track_id,path,year\na,a.wav,1800\n"),
            ("nopath.csv", "track_id\na\n"),
            ("bad.json", "[{\"track_id\": 3"),
            ("badyear.csv", "track_id,path,year\na,a.wav,soon\n"),
        ] {
            let p = write(dir.path(), name, text);
            assert!(matches!(load_manifest(&p), Err(CliError::Input(_))), "{name}");
        }
        assert!(load_manifest(&dir.path().join("missing.csv")).is_err());
    }
}
