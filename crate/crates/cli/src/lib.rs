//! Benchmark harness: manifests, evaluation runs, ground-truth lint and
//! report rendering. The `ardoc` binary is a thin layer over this library.

pub mod lint;
pub mod manifest;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use lint::{lint_ground_truth, Finding, FindingKind, LintConfig};
pub use manifest::{load_manifest, parse_manifest, DatasetManifest, ManifestEntry, Source};
pub use report::{render_markdown, EvalReport};
pub use run::{run_evaluation, RunOptions};

/// Environment variable read for the worker count.
pub const WORKERS_ENV: &str = "ARDOC_WORKERS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("duplicate entry id {0:?}")]
    DuplicateId(String),
    #[error("no predictions found in {0}")]
    NoPredictions(PathBuf),
    #[error("no prediction for entry {0:?}")]
    MissingPrediction(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
