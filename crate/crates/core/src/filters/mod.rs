//! Corpus-quality filters: character n-gram perplexity and table sparsity.

mod lm;
mod sparsity;

pub use lm::{train_lm, train_lm_with_unit, CharNgramLm, LmError, LmUnit, LM_SCHEMA_VERSION};
pub use sparsity::{table_sparsity, Sparsity};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doc::Document;
use crate::warning::Warning;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("expected a <table> root, found <{0}>")]
    NotATable(String),
    #[error("perplexity threshold {0} must exceed 1")]
    PplThreshold(f64),
    #[error("sparsity threshold {0} outside [0, 1]")]
    SparsityThreshold(f64),
}

pub const DEFAULT_SPARSITY_THRESHOLD: f64 = 0.25;

/// Rejection thresholds. Both comparisons are strict: a document is dropped
/// only when a value is above its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub ppl_threshold: f64,
    #[serde(default = "default_sparsity")]
    pub sparsity_threshold: f64,
}

fn default_sparsity() -> f64 {
    DEFAULT_SPARSITY_THRESHOLD
}

impl FilterConfig {
    pub fn new(ppl_threshold: f64) -> Result<Self, FilterError> {
        let cfg = Self {
            ppl_threshold,
            sparsity_threshold: DEFAULT_SPARSITY_THRESHOLD,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        if self.ppl_threshold.is_nan() || self.ppl_threshold <= 1.0 {
            return Err(FilterError::PplThreshold(self.ppl_threshold));
        }
        if !(0.0..=1.0).contains(&self.sparsity_threshold) {
            return Err(FilterError::SparsityThreshold(self.sparsity_threshold));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectReason {
    Perplexity { value: f64, threshold: f64 },
    TableSparsity { table: usize, sparsity: f64, threshold: f64 },
}

/// Why one document was dropped. `index` is its position in the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejected {
    pub index: usize,
    pub document: Document,
    pub reasons: Vec<RejectReason>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterOutcome {
    pub kept: Vec<Document>,
    pub rejected: Vec<Rejected>,
    pub warnings: Vec<Warning>,
}

/// Every reason `doc` would be rejected for; empty means keep.
///
/// Perplexity is measured on the document's plain text; a document without
/// text is scored on the end marker alone.
pub fn rejection_reasons(
    doc: &Document,
    lm: &CharNgramLm,
    cfg: &FilterConfig,
) -> (Vec<RejectReason>, Vec<Warning>) {
    let mut reasons = Vec::new();
    let mut warnings = Vec::new();
    let ppl = lm.perplexity_lenient(&doc.plain_text());
    if ppl > cfg.ppl_threshold {
        reasons.push(RejectReason::Perplexity {
            value: ppl,
            threshold: cfg.ppl_threshold,
        });
    }
    for (i, table) in doc.tables().enumerate() {
        let tree = table.tree();
        let s = match table_sparsity(&tree) {
            Ok(s) => s,
            Err(_) => continue,
        };
        warnings.extend(s.warning);
        if s.fraction > cfg.sparsity_threshold {
            reasons.push(RejectReason::TableSparsity {
                table: i,
                sparsity: s.fraction,
                threshold: cfg.sparsity_threshold,
            });
        }
    }
    (reasons, warnings)
}

/// Splits `docs` into kept and rejected, preserving input order in both.
pub fn filter_corpus(docs: Vec<Document>, lm: &CharNgramLm, cfg: &FilterConfig) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for (index, document) in docs.into_iter().enumerate() {
        let (reasons, mut warnings) = rejection_reasons(&document, lm, cfg);
        out.warnings.append(&mut warnings);
        if reasons.is_empty() {
            out.kept.push(document);
        } else {
            out.rejected.push(Rejected {
                index,
                document,
                reasons,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doc::parse_markdown;
    use proptest::prelude::*;

    fn lm() -> CharNgramLm {
        train_lm(&["جدول بيانات المبيعات السنوية", "نص عربي عادي"], 3, 0.1).unwrap()
    }

    fn table(cells: &[&str]) -> String {
        let rows: String = cells
            .chunks(2)
            .map(|r| format!("<tr><td>{}</td><td>{}</td></tr>", r[0], r[1]))
            .collect();
        format!("<table>{rows}</table>")
    }

    #[test]
    fn boundary_table_is_kept() {
        let doc = parse_markdown(&format!("نص عربي\n\n{}", table(&["أ", "", "ب", "ج"])));
        let out = filter_corpus(vec![doc], &lm(), &FilterConfig::new(1e6).unwrap());
        assert_eq!(out.kept.len(), 1);
        assert!(out.rejected.is_empty());
    }

    #[test]
    fn one_sparse_table_rejects_document() {
        let text = format!(
            "{}\n\n{}\n\n{}",
            table(&["أ", "ب", "ج", "د"]),
            table(&["أ", "", "", "د"]),
            table(&["هـ", "و", "ز", "ح"])
        );
        let out = filter_corpus(vec![parse_markdown(&text)], &lm(), &FilterConfig::new(1e6).unwrap());
        assert!(out.kept.is_empty());
        assert_eq!(
            out.rejected[0].reasons,
            vec![RejectReason::TableSparsity {
                table: 1,
                sparsity: 0.5,
                threshold: 0.25
            }]
        );
    }

    #[test]
    fn pipe_tables_count_too() {
        let doc = parse_markdown("| a | |\n|---|---|\n| | |");
        let out = filter_corpus(vec![doc], &lm(), &FilterConfig::new(1e6).unwrap());
        assert_eq!(out.rejected.len(), 1);
    }

    #[test]
    fn perplexity_rejection() {
        let doc = parse_markdown("zzzz qqqq xxxx");
        let (reasons, _) = rejection_reasons(&doc, &lm(), &FilterConfig::new(1.5).unwrap());
        assert!(matches!(reasons[0], RejectReason::Perplexity { .. }));
    }

    #[test]
    fn empty_input() {
        let out = filter_corpus(Vec::new(), &lm(), &FilterConfig::new(10.0).unwrap());
        assert!(out.kept.is_empty() && out.rejected.is_empty());
    }

    #[test]
    fn config_validation() {
        assert_eq!(FilterConfig::new(1.0), Err(FilterError::PplThreshold(1.0)));
        let bad = FilterConfig {
            ppl_threshold: 5.0,
            sparsity_threshold: 1.5,
        };
        assert_eq!(bad.validate(), Err(FilterError::SparsityThreshold(1.5)));
    }

    proptest! {
        #[test]
        fn partition_is_order_preserving(
            docs in prop::collection::vec(("[ابت ]{0,10}", prop::collection::vec(any::<bool>(), 4)), 0..12),
            threshold in 2.0f64..40.0,
        ) {
            let docs: Vec<Document> = docs
                .iter()
                .map(|(t, cells)| {
                    let c: Vec<&str> = cells.iter().map(|&f| if f { "x" } else { "" }).collect();
                    parse_markdown(&format!("{t}\n\n{}", table(&c)))
                })
                .collect();
            let out = filter_corpus(docs.clone(), &lm(), &FilterConfig::new(threshold).unwrap());
            prop_assert_eq!(out.kept.len() + out.rejected.len(), docs.len());
            let rejected_idx: Vec<usize> = out.rejected.iter().map(|r| r.index).collect();
            prop_assert!(rejected_idx.windows(2).all(|w| w[0] < w[1]));
            let kept_expected: Vec<&Document> = docs
                .iter()
                .enumerate()
                .filter(|(i, _)| !rejected_idx.contains(i))
                .map(|(_, d)| d)
                .collect();
            prop_assert_eq!(out.kept.iter().collect::<Vec<_>>(), kept_expected);
            for r in &out.rejected {
                prop_assert_eq!(&r.document, &docs[r.index]);
            }
        }
    }
}
