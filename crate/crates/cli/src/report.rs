//! Evaluation reports and their JSON and Markdown renderings.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ardoc_core::eval::{CorpusStats, EvalOptions, PairStats};
use ardoc_core::metrics::MetricError;
use ardoc_core::{MetricReport, Warning};

use crate::HarnessError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Scores for one manifest entry. `stats` holds the raw counts the corpus
/// row is pooled from; `report` is absent when the pair cannot be scored on
/// its own (an empty reference).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryResult {
    pub id: String,
    pub stats: PairStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Warning>,
}

/// An entry left out of scoring, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub model_name: String,
    pub config_fingerprint: String,
    pub options: EvalOptions,
    /// Sorted by id.
    pub per_entry: Vec<EntryResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<Skipped>,
    pub corpus: Option<MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_error: Option<String>,
}

/// SHA-256 over the JSON form of the evaluation options.
pub fn config_fingerprint(opts: &EvalOptions) -> String {
    let json = serde_json::to_string(opts).expect("options serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

impl EvalReport {
    /// Pools the per-entry counts into a corpus row.
    pub fn recompute_corpus(&self) -> Result<MetricReport, MetricError> {
        let mut corpus = CorpusStats::default();
        for e in &self.per_entry {
            corpus.push(ardoc_core::PairEvaluation {
                stats: e.stats.clone(),
                warnings: Vec::new(),
            });
        }
        corpus.finish(&self.options)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let r: Self = serde_json::from_str(text)?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(HarnessError::Schema(format!(
                "unsupported report schema version {}",
                r.schema_version
            )));
        }
        Ok(r)
    }

    /// One JSON object per entry.
    pub fn records_jsonl(&self) -> String {
        self.per_entry
            .iter()
            .map(|e| serde_json::to_string(e).expect("entry serializes") + "\n")
            .collect()
    }

    pub fn to_markdown(&self) -> String {
        let rows: Vec<(&str, &MetricReport)> = self
            .corpus
            .iter()
            .map(|c| (self.model_name.as_str(), c))
            .collect();
        render_markdown(&rows)
    }
}

pub const MARKDOWN_HEADER: &str = "| Model | WER ↓ | CER ↓ | BLEU ↑ | CHRF ↑ | TEDS ↑ | MARS ↑ |\n\
                                   |---|---|---|---|---|---|---|\n";

/// One table row: WER, CER, BLEU and CHRF to 2 places, TEDS as an integer,
/// MARS to 3 places.
pub fn format_row(model: &str, r: &MetricReport) -> String {
    format!(
        "| {} | {:.2} | {:.2} | {:.2} | {:.2} | {:.0} | {:.3} |\n",
        model.replace('|', "\\|"),
        r.wer,
        r.cer,
        r.bleu,
        r.chrf,
        r.teds,
        r.mars
    )
}

/// A comparison table with one row per model. No rows gives the header only.
pub fn render_markdown(rows: &[(&str, &MetricReport)]) -> String {
    let mut out = MARKDOWN_HEADER.to_string();
    for (model, r) in rows {
        out.push_str(&format_row(model, r));
    }
    out
}
