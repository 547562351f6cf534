//! Benchmark evaluation over a manifest and a directory of predictions.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use ardoc_core::eval::{evaluate_texts, CorpusStats, EvalOptions};
use ardoc_core::Warning;

use crate::manifest::{DatasetManifest, ManifestEntry};
use crate::report::{config_fingerprint, EntryResult, EvalReport, Skipped, REPORT_SCHEMA_VERSION};
use crate::HarnessError;

/// File names tried, in order, for an entry's prediction.
pub const PREDICTION_SUFFIXES: [&str; 3] = [".md", ".txt", ""];

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub eval: EvalOptions,
    pub model_name: String,
    /// Fail on a missing prediction instead of scoring it as empty.
    pub strict: bool,
    /// Worker threads; `None` lets the thread pool decide.
    pub workers: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            eval: EvalOptions::default(),
            model_name: "model".to_string(),
            strict: false,
            workers: None,
        }
    }
}

pub fn prediction_path(pred_dir: &Path, id: &str) -> Option<PathBuf> {
    PREDICTION_SUFFIXES
        .iter()
        .map(|s| pred_dir.join(format!("{id}{s}")))
        .find(|p| p.is_file())
}

fn read_text(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

enum Outcome {
    Scored(Box<EntryResult>),
    Skipped(Skipped),
}

fn evaluate_entry(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
    pred_dir: &Path,
    opts: &RunOptions,
) -> Result<Outcome, HarnessError> {
    let gt_path = manifest.ground_truth(entry);
    let reference = match fs::read_to_string(&gt_path) {
        Ok(t) => t,
        Err(e) if e.kind() == ErrorKind::NotFound => {
            return Ok(Outcome::Skipped(Skipped {
                id: entry.id.clone(),
                reason: format!("ground truth not found: {}", gt_path.display()),
            }))
        }
        Err(e) => return Err(HarnessError::io(&gt_path, e)),
    };
    let mut warnings = Vec::new();
    let hypothesis = match prediction_path(pred_dir, &entry.id) {
        Some(p) => read_text(&p)?,
        None if opts.strict => return Err(HarnessError::MissingPrediction(entry.id.clone())),
        None => {
            warnings.push(Warning::MissingPrediction {
                id: entry.id.clone(),
            });
            String::new()
        }
    };
    let pair = evaluate_texts(&reference, &hypothesis, &opts.eval);
    warnings.extend(pair.warnings.iter().cloned());
    let (report, error) = match pair.report(&opts.eval) {
        Ok(mut r) => {
            r.warnings.clear();
            (Some(r), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(Outcome::Scored(Box::new(EntryResult {
        id: entry.id.clone(),
        stats: pair.stats,
        report,
        error,
        warnings,
    })))
}

/// Scores every manifest entry against `pred_dir` and pools a corpus row.
///
/// Entries are evaluated in parallel and collected in id order, so the
/// report does not depend on manifest order or worker count.
pub fn run_evaluation(
    manifest: &DatasetManifest,
    pred_dir: &Path,
    opts: &RunOptions,
) -> Result<EvalReport, HarnessError> {
    if !pred_dir.is_dir() {
        return Err(HarnessError::NoPredictions(pred_dir.to_path_buf()));
    }
    if manifest
        .entries
        .iter()
        .all(|e| prediction_path(pred_dir, &e.id).is_none())
    {
        return Err(HarnessError::NoPredictions(pred_dir.to_path_buf()));
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Schema(format!("worker pool: {e}")))?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|e| evaluate_entry(manifest, e, pred_dir, opts))
            .collect::<Result<_, _>>()
    })?;

    let mut per_entry = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Scored(r) => per_entry.push(*r),
            Outcome::Skipped(s) => skipped.push(s),
        }
    }
    per_entry.sort_by(|a, b| a.id.cmp(&b.id));
    skipped.sort_by(|a, b| a.id.cmp(&b.id));

    let mut corpus = CorpusStats::default();
    for e in &per_entry {
        corpus.push(ardoc_core::PairEvaluation {
            stats: e.stats.clone(),
            warnings: Vec::new(),
        });
    }
    let (corpus, corpus_error) = match corpus.finish(&opts.eval) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        model_name: opts.model_name.clone(),
        config_fingerprint: config_fingerprint(&opts.eval),
        options: opts.eval.clone(),
        per_entry,
        skipped,
        corpus,
        corpus_error,
    })
}
