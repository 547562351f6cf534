use std::fmt;

use serde::{Deserialize, Serialize};

/// Non-fatal conditions noticed while parsing, normalizing or scoring.
///
/// Warnings travel with documents and metric reports so that a malformed
/// prediction is scored (not dropped) while still being visible in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// An HTML region could not be parsed and was kept as plain text.
    MalformedHtml { offset: usize, detail: String },
    /// A tag with no matching close was stripped during standardization.
    UnclosedTag { tag: String },
    /// A Markdown table row whose cell count differs from the delimiter row.
    MalformedMdTable { row: usize, expected: usize, found: usize },
    /// A table with no cells at all.
    EmptyTable,
    /// The prediction file for an entry was not found; scored as empty.
    MissingPrediction { id: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::MalformedHtml { offset, detail } => {
                write!(f, "malformed HTML at byte {offset}: {detail}")
            }
            Warning::UnclosedTag { tag } => write!(f, "unclosed <{tag}> stripped"),
            Warning::MalformedMdTable { row, expected, found } => write!(
                f,
                "markdown table row {row} has {found} cells, expected {expected}"
            ),
            Warning::EmptyTable => f.write_str("table has no cells"),
            Warning::MissingPrediction { id } => write!(f, "no prediction for entry {id}"),
        }
    }
}
