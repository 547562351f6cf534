//! Ground-truth checks for problems seen in benchmark transcriptions:
//! stray Latin-script sentences in Arabic pages, missing page numbers,
//! sparse tables and broken HTML.

use std::fs;

use serde::{Deserialize, Serialize};

use ardoc_core::filters::table_sparsity;
use ardoc_core::{parse_markdown, Block, Document, Warning};

use crate::manifest::DatasetManifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LintConfig {
    /// Consecutive Latin-script words that count as a suspicious run.
    pub latin_run_words: usize,
    /// Minimum share of Arabic letters for a document to count as Arabic.
    pub arabic_share: f64,
    pub sparsity_threshold: f64,
}

impl Default for LintConfig {
    fn default() -> Self {
        Self {
            latin_run_words: 5,
            arabic_share: 0.5,
            sparsity_threshold: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FindingKind {
    HallucinationSuspect { words: usize, excerpt: String },
    MissingPageNumber,
    SparseTable { table: usize, sparsity: f64 },
    UnparseableHtml { detail: String },
    Unreadable { detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub id: String,
    #[serde(flatten)]
    pub kind: FindingKind,
}

pub fn is_arabic_letter(c: char) -> bool {
    c.is_alphabetic()
        && matches!(c as u32,
            0x0600..=0x06FF | 0x0750..=0x077F | 0x08A0..=0x08FF | 0xFB50..=0xFDFF | 0xFE70..=0xFEFF)
}

pub fn is_latin_letter(c: char) -> bool {
    c.is_alphabetic()
        && matches!(c as u32, 0x41..=0x5A | 0x61..=0x7A | 0xC0..=0x24F | 0x1E00..=0x1EFF)
}

#[derive(PartialEq)]
enum WordKind {
    Latin,
    Other,
    Neutral,
}

fn word_kind(w: &str) -> WordKind {
    let mut letters = w.chars().filter(|c| c.is_alphabetic()).peekable();
    if letters.peek().is_none() {
        return WordKind::Neutral;
    }
    if letters.all(is_latin_letter) {
        WordKind::Latin
    } else {
        WordKind::Other
    }
}

/// Longest run of Latin-script words, skipping over words without letters
/// (numbers, punctuation). Returns the word count and the run's text.
pub fn longest_latin_run(text: &str) -> (usize, String) {
    let words: Vec<&str> = text.split_whitespace().collect();
    let (mut best, mut best_span) = (0, (0, 0));
    let (mut count, mut start) = (0, 0);
    for (i, w) in words.iter().enumerate() {
        match word_kind(w) {
            WordKind::Latin => {
                if count == 0 {
                    start = i;
                }
                count += 1;
                if count > best {
                    best = count;
                    best_span = (start, i + 1);
                }
            }
            WordKind::Other => count = 0,
            WordKind::Neutral => {}
        }
    }
    (best, words[best_span.0..best_span.1].join(" "))
}

/// Share of letters that are Arabic; 0 for text without letters.
pub fn arabic_share(text: &str) -> f64 {
    let (mut arabic, mut total) = (0usize, 0usize);
    for c in text.chars().filter(|c| c.is_alphabetic()) {
        total += 1;
        if is_arabic_letter(c) {
            arabic += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        arabic as f64 / total as f64
    }
}

/// Findings for one parsed transcription.
pub fn lint_document(id: &str, doc: &Document, cfg: &LintConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    let finding = |kind| Finding {
        id: id.to_string(),
        kind,
    };
    let text = doc.plain_text();
    if arabic_share(&text) >= cfg.arabic_share {
        let (words, excerpt) = longest_latin_run(&text);
        if words >= cfg.latin_run_words {
            out.push(finding(FindingKind::HallucinationSuspect { words, excerpt }));
        }
    }
    let has_page_number = doc
        .blocks
        .iter()
        .any(|b| matches!(b, Block::SpecialTag { name, .. } if name == "page_number"));
    if !has_page_number {
        out.push(finding(FindingKind::MissingPageNumber));
    }
    for (i, table) in doc.tables().enumerate() {
        if let Ok(s) = table_sparsity(&table.tree()) {
            if s.fraction > cfg.sparsity_threshold {
                out.push(finding(FindingKind::SparseTable {
                    table: i,
                    sparsity: s.fraction,
                }));
            }
        }
    }
    for w in &doc.warnings {
        if matches!(w, Warning::MalformedHtml { .. } | Warning::UnclosedTag { .. }) {
            out.push(finding(FindingKind::UnparseableHtml {
                detail: w.to_string(),
            }));
        }
    }
    out
}

/// Lints every ground-truth file in the manifest, in manifest order.
pub fn lint_ground_truth(manifest: &DatasetManifest, cfg: &LintConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    for entry in &manifest.entries {
        match fs::read_to_string(manifest.ground_truth(entry)) {
            Ok(text) => out.extend(lint_document(&entry.id, &parse_markdown(&text), cfg)),
            Err(e) => out.push(Finding {
                id: entry.id.clone(),
                kind: FindingKind::Unreadable {
                    detail: e.to_string(),
                },
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<FindingKind> {
        lint_document("x", &parse_markdown(text), &LintConfig::default())
            .into_iter()
            .map(|f| f.kind)
            .collect()
    }

    const PAGE: &str = "<page_number>3</page_number>";

    #[test]
    fn english_sentence_in_arabic_page() {
        let text = format!(
            "هذا نص عربي طويل يتحدث عن تاريخ المدينة القديمة وأسواقها\n\nYou're right - let me write it exactly as it appears in the image\n\nثم يكمل النص العربي هنا بجمل أخرى كثيرة ومتنوعة\n\n{PAGE}"
        );
        let k = kinds(&text);
        assert_eq!(k.len(), 1, "{k:?}");
        assert!(matches!(&k[0], FindingKind::HallucinationSuspect { words, .. } if *words >= 10));
    }

    #[test]
    fn short_latin_terms_are_fine() {
        let text = format!("استخدم نظام Linux مع برنامج Python 3.12 في المختبر\n\n{PAGE}");
        assert!(kinds(&text).is_empty());
    }

    #[test]
    fn english_document_is_not_flagged() {
        let text = format!("This page is entirely written in English with many words.\n\n{PAGE}");
        assert!(kinds(&text).is_empty());
    }

    #[test]
    fn missing_page_number() {
        assert_eq!(kinds("نص عربي"), vec![FindingKind::MissingPageNumber]);
    }

    #[test]
    fn clean_entry() {
        assert!(kinds(&format!("# عنوان\n\nنص عربي سليم\n\n{PAGE}")).is_empty());
    }

    #[test]
    fn sparse_table_and_broken_html() {
        let text = format!("<table><tr><td></td><td></td></tr></table>\n\n{PAGE}");
        assert!(matches!(kinds(&text)[..], [FindingKind::SparseTable { table: 0, .. }]));
        let text = format!("<table><tr><td>x</td></table>\n\n{PAGE}");
        assert!(matches!(kinds(&text)[..], [FindingKind::UnparseableHtml { .. }]));
    }

    #[test]
    fn neutral_tokens_do_not_break_runs() {
        assert_eq!(longest_latin_run("a b - 12 c d e").0, 5);
        assert_eq!(longest_latin_run("a b كلمة c d").0, 2);
        assert_eq!(longest_latin_run("").0, 0);
    }
}
