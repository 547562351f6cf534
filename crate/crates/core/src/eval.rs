//! Per-pair evaluation and corpus aggregation.
//!
//! Both sides of a pair go through the same normalization. Text metrics see
//! the serialized normalized text; TEDS sees the document tree. Every metric
//! keeps additive statistics ([`PairStats`]) so that a corpus score is a fold
//! over pairs in any order.

use serde::{Deserialize, Serialize};

use crate::doc::{document_to_tree, parse_markdown_with, serialize, serialize_with_rule};
use crate::doc::{tables_to_tree, Document};
use crate::metrics::{
    bleu_stats, cer_counts, chrf_stats, mars, wer_counts, BleuStats, CharUnit, ChrfStats,
    EditCounts, MetricError,
};
use crate::normalize::{
    convert_md_tables, normalize_arabic, standardize_with_warnings, NormalizeConfig,
};
use crate::teds::{teds_similarity_with, CostModel};
use crate::warning::Warning;

/// Which part of a document TEDS compares.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TedsScope {
    #[default]
    Document,
    Tables,
}

/// How BLEU and ChrF are combined over a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Pool n-gram counts, then score once.
    #[default]
    Corpus,
    /// Score each pair, then average.
    SentenceMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub normalize: NormalizeConfig,
    pub teds_scope: TedsScope,
    pub teds_cost: CostModel,
    pub char_unit: CharUnit,
    /// Decimal places kept in the reported TEDS; `None` keeps full precision.
    pub teds_decimals: Option<u32>,
    pub aggregation: Aggregation,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            normalize: NormalizeConfig::default(),
            teds_scope: TedsScope::Document,
            teds_cost: CostModel::default(),
            char_unit: CharUnit::Codepoint,
            teds_decimals: Some(0),
            aggregation: Aggregation::Corpus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub wer: f64,
    pub cer: f64,
    pub bleu: f64,
    pub chrf: f64,
    pub teds: f64,
    pub mars: f64,
    #[serde(default)]
    pub warnings: Vec<Warning>,
}

/// A document after the full normalization pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub document: Document,
    pub text: String,
    pub warnings: Vec<Warning>,
}

/// Standardizes raw text, normalizes characters, parses and converts pipe
/// tables to HTML.
pub fn normalize_text(text: &str, cfg: &NormalizeConfig) -> Normalized {
    let standardized = standardize_with_warnings(text, cfg);
    let chars = normalize_arabic(&standardized.text, cfg);
    let mut parsed = convert_md_tables(parse_markdown_with(&chars, &cfg.parse_options()));
    let mut warnings = standardized.warnings;
    warnings.append(&mut parsed.warnings);
    Normalized {
        text: serialize_with_rule(&parsed, &cfg.hr_normal_form),
        document: parsed,
        warnings,
    }
}

/// [`normalize_text`] on the serialized document, keeping its parse warnings.
pub fn normalize_document(doc: &Document, cfg: &NormalizeConfig) -> Normalized {
    let mut n = normalize_text(&serialize(doc), cfg);
    let mut warnings = doc.warnings.clone();
    warnings.append(&mut n.warnings);
    n.warnings = warnings;
    n
}

/// Additive statistics for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub wer: EditCounts,
    pub cer: EditCounts,
    pub bleu: BleuStats,
    pub chrf: ChrfStats,
    /// Raw TEDS similarity in [0, 1].
    pub teds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairEvaluation {
    pub stats: PairStats,
    pub warnings: Vec<Warning>,
}

impl PairEvaluation {
    pub fn report(&self, opts: &EvalOptions) -> Result<MetricReport, MetricError> {
        let mut corpus = CorpusStats::default();
        corpus.push(self.clone());
        corpus.finish(opts)
    }
}

/// Evaluates one pair with default options apart from `cfg`.
pub fn evaluate_pair(
    reference: &Document,
    hypothesis: &Document,
    cfg: &NormalizeConfig,
) -> Result<MetricReport, MetricError> {
    let opts = EvalOptions {
        normalize: cfg.clone(),
        ..EvalOptions::default()
    };
    evaluate_pair_with(reference, hypothesis, &opts).report(&opts)
}

/// Computes pair statistics. Never fails; an empty reference only becomes
/// an error when a report is requested.
pub fn evaluate_pair_with(
    reference: &Document,
    hypothesis: &Document,
    opts: &EvalOptions,
) -> PairEvaluation {
    let r = normalize_document(reference, &opts.normalize);
    let h = normalize_document(hypothesis, &opts.normalize);
    score_normalized(r, h, opts)
}

/// Evaluates raw texts. Markup inside a line, such as a watermark between
/// two words, is removed before the text is split into blocks, so this is
/// the entry point for model output read from files.
pub fn evaluate_texts(reference: &str, hypothesis: &str, opts: &EvalOptions) -> PairEvaluation {
    let r = normalize_text(reference, &opts.normalize);
    let h = normalize_text(hypothesis, &opts.normalize);
    score_normalized(r, h, opts)
}

fn score_normalized(r: Normalized, h: Normalized, opts: &EvalOptions) -> PairEvaluation {
    let (rt, ht) = match opts.teds_scope {
        TedsScope::Document => (document_to_tree(&r.document), document_to_tree(&h.document)),
        TedsScope::Tables => (tables_to_tree(&r.document), tables_to_tree(&h.document)),
    };
    let stats = PairStats {
        wer: wer_counts(&r.text, &h.text),
        cer: cer_counts(&r.text, &h.text, opts.char_unit),
        bleu: bleu_stats(&r.text, &h.text),
        chrf: chrf_stats(&r.text, &h.text),
        teds: teds_similarity_with(&rt, &ht, &opts.teds_cost),
    };
    let mut warnings = r.warnings;
    warnings.extend(h.warnings);
    PairEvaluation { stats, warnings }
}

/// Running fold over pairs. Merging is associative and commutative up to
/// floating-point summation order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub pairs: usize,
    pub wer: EditCounts,
    pub cer: EditCounts,
    pub bleu: BleuStats,
    pub chrf: ChrfStats,
    pub teds_sum: f64,
    pub bleu_sentence_sum: f64,
    pub chrf_sentence_sum: f64,
    pub warnings: Vec<Warning>,
}

impl CorpusStats {
    pub fn push(&mut self, pair: PairEvaluation) {
        let s = pair.stats;
        self.pairs += 1;
        self.wer += s.wer;
        self.cer += s.cer;
        self.bleu += s.bleu;
        self.chrf += s.chrf;
        self.teds_sum += s.teds;
        self.bleu_sentence_sum += s.bleu.score();
        self.chrf_sentence_sum += s.chrf.score();
        self.warnings.extend(pair.warnings);
    }

    pub fn merge(mut self, other: CorpusStats) -> CorpusStats {
        self.pairs += other.pairs;
        self.wer += other.wer;
        self.cer += other.cer;
        self.bleu += other.bleu;
        self.chrf += other.chrf;
        self.teds_sum += other.teds_sum;
        self.bleu_sentence_sum += other.bleu_sentence_sum;
        self.chrf_sentence_sum += other.chrf_sentence_sum;
        self.warnings.extend(other.warnings);
        self
    }

    pub fn finish(&self, opts: &EvalOptions) -> Result<MetricReport, MetricError> {
        if self.pairs == 0 {
            return Err(MetricError::EmptyCorpus);
        }
        let n = self.pairs as f64;
        let (bleu, chrf) = match opts.aggregation {
            Aggregation::Corpus => (self.bleu.score(), self.chrf.score()),
            Aggregation::SentenceMean => (self.bleu_sentence_sum / n, self.chrf_sentence_sum / n),
        };
        let teds = round_to(100.0 * self.teds_sum / n, opts.teds_decimals).clamp(0.0, 100.0);
        Ok(MetricReport {
            wer: self.wer.rate()?,
            cer: self.cer.rate()?,
            bleu,
            chrf,
            teds,
            mars: mars(chrf, teds)?,
            warnings: self.warnings.clone(),
        })
    }
}

fn round_to(x: f64, decimals: Option<u32>) -> f64 {
    match decimals {
        None => x,
        Some(d) => {
            let scale = 10f64.powi(d as i32);
            (x * scale).round() / scale
        }
    }
}
