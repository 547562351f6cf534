//! Core machinery for evaluating Arabic document OCR output.
//!
//! The crate is organised bottom-up:
//!
//! - [`html`] tokenizes HTML and builds [`HtmlTree`]s for tables.
//! - [`doc`] parses mixed Markdown/HTML text into a block [`Document`] and
//!   serializes it back in canonical form.
//! - [`normalize`] implements the output-standardization protocol applied to
//!   both references and predictions before scoring.
//! - [`metrics`] holds WER, CER, BLEU, ChrF and MARS; [`teds`] the tree edit
//!   distance similarity.
//! - [`eval`] composes everything into per-pair reports and corpus folds.
//! - [`filters`] holds the corpus-quality filters (character n-gram
//!   perplexity and table sparsity).

pub mod doc;
pub mod eval;
pub mod filters;
pub mod html;
pub mod inline;
pub mod metrics;
pub mod normalize;
pub mod teds;
mod warning;

pub use doc::{
    document_to_tree, parse_markdown, parse_markdown_with, serialize, tables_to_tree,
    try_parse_markdown, Block, Document, HeadingLevel, MdTable, ParseError, ParseOptions,
    SourceKind, Table,
};
pub use eval::{
    evaluate_pair, evaluate_pair_with, evaluate_texts, EvalOptions, MetricReport, PairEvaluation,
};
pub use html::{parse_html_table, CellSpan, HtmlError, HtmlTree, NodeKind};
pub use normalize::{convert_md_tables, normalize_arabic, standardize, NormalizeConfig};
pub use warning::Warning;
