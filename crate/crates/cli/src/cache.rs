//! Content-addressed feature cache: one JSON document per (audio hash,
//! feature config), written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use inharmo::FeaturePair;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Environment variable that sets the cache directory when `--cache-dir` is absent.
pub const CACHE_DIR_ENV: &str = "INHARM_CACHE_DIR";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoredPair {
    pub hr_inharmonicity: f64,
    pub noisiness: f64,
}

impl From<FeaturePair> for StoredPair {
    fn from(p: FeaturePair) -> Self {
        Self { hr_inharmonicity: p.hr_inharmonicity, noisiness: p.noisiness }
    }
}

impl From<StoredPair> for FeaturePair {
    fn from(p: StoredPair) -> Self {
        Self { hr_inharmonicity: p.hr_inharmonicity, noisiness: p.noisiness }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub content_hash: String,
    pub config_key: String,
    pub tool_version: String,
    pub raw: Option<StoredPair>,
    pub weighted: Option<StoredPair>,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create cache directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn entry_path(&self, content_hash: &str, config_key: &str) -> PathBuf {
        let name = sha256_hex(format!("{content_hash}\n{config_key}").as_bytes());
        self.dir.join(format!("{name}.json"))
    }

    /// Returns the entry only if both the content hash and the config key
    /// match; unreadable or corrupt files count as misses.
    pub fn get(&self, content_hash: &str, config_key: &str) -> Option<CacheEntry> {
        let text = fs::read_to_string(self.entry_path(content_hash, config_key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        (entry.content_hash == content_hash && entry.config_key == config_key).then_some(entry)
    }

    /// Writes to a temporary file in the cache directory, then renames it
    /// over the final name.
    pub fn put(&self, entry: &CacheEntry) -> Result<(), CliError> {
        let path = self.entry_path(&entry.content_hash, &entry.config_key);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(serde_json::to_string_pretty(entry)?.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
        Ok(())
    }
}
