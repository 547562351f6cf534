//! Benchmark manifests: one JSON object per line pairing an image with its
//! ground-truth transcription.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Synthetic,
    Real,
}

/// One line of the manifest. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub image_path: PathBuf,
    pub ground_truth_path: PathBuf,
    pub source: Source,
    #[serde(default)]
    pub tags: Vec<String>,
}

/// An entry whose files were not all found at load time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryFlag {
    pub id: String,
    pub missing: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub schema_version: u32,
    /// Directory the entry paths are resolved against.
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
    pub flags: Vec<EntryFlag>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    schema_version: u32,
}

impl DatasetManifest {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.root.join(path)
    }

    pub fn ground_truth(&self, entry: &ManifestEntry) -> PathBuf {
        self.resolve(&entry.ground_truth_path)
    }

    pub fn is_flagged(&self, id: &str) -> bool {
        self.flags.iter().any(|f| f.id == id)
    }

    /// Builds a manifest from entries, checking ids and files.
    pub fn from_entries(root: PathBuf, entries: Vec<ManifestEntry>) -> Result<Self, HarnessError> {
        let mut seen = BTreeSet::new();
        for e in &entries {
            if e.id.is_empty() {
                return Err(HarnessError::Schema("entry with empty id".into()));
            }
            if !seen.insert(e.id.as_str()) {
                return Err(HarnessError::DuplicateId(e.id.clone()));
            }
        }
        let flags = entries
            .iter()
            .filter_map(|e| {
                let missing: Vec<PathBuf> = [&e.image_path, &e.ground_truth_path]
                    .into_iter()
                    .filter(|p| !root.join(p).is_file())
                    .cloned()
                    .collect();
                (!missing.is_empty()).then(|| EntryFlag {
                    id: e.id.clone(),
                    missing,
                })
            })
            .collect();
        Ok(Self {
            schema_version: MANIFEST_SCHEMA_VERSION,
            root,
            entries,
            flags,
        })
    }

    /// JSONL text: a schema header line, then one entry per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = format!("{{\"schema_version\":{}}}\n", self.schema_version);
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }
}

/// Parses manifest text. An optional first line `{"schema_version": 1}`
/// declares the format version; blank lines are skipped.
pub fn parse_manifest(text: &str, root: PathBuf) -> Result<DatasetManifest, HarnessError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    let mut schema_version = MANIFEST_SCHEMA_VERSION;
    if let Some((_, first)) = lines.peek() {
        if let Ok(h) = serde_json::from_str::<Header>(first) {
            schema_version = h.schema_version;
            lines.next();
        }
    }
    if schema_version != MANIFEST_SCHEMA_VERSION {
        return Err(HarnessError::Schema(format!(
            "unsupported manifest schema version {schema_version}"
        )));
    }
    let mut entries = Vec::new();
    for (n, line) in lines {
        let entry: ManifestEntry = serde_json::from_str(line)
            .map_err(|e| HarnessError::Schema(format!("line {}: {e}", n + 1)))?;
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(HarnessError::Schema("manifest has no entries".into()));
    }
    DatasetManifest::from_entries(root, entries)
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let root = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    parse_manifest(&text, root)
}
