//! Output standardization applied to references and predictions alike.
//!
//! Models disagree on formatting far more than on content: one writes `***`
//! where another writes `---`, one wraps cells in `<strong>` and another in
//! `<b>`, some emit page furniture tags that others never produce. The steps
//! here erase those differences before any metric is computed:
//!
//! 1. strip HTML tags outside tables, keeping their inner text;
//! 2. convert Markdown pipe tables to HTML ([`convert_md_tables`]);
//! 3. write every horizontal rule in one normal form;
//! 4. write headers in ATX form with trimmed text;
//! 5. use `<b>`/`<i>` for bold/italic inside tables;
//! 6. drop model-specific tags together with their content.
//!
//! [`standardize`] runs steps 1 and 3–6 on text. Step 2 works on a parsed
//! [`Document`]. [`normalize_arabic`] is the separate character-level policy
//! (Unicode form, optional diacritic stripping, whitespace).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::doc::{
    is_horizontal_rule, parse_markdown_with, serialize_with_rule, special_element_at, Block,
    Document, ParseOptions, Table, DEFAULT_SPECIAL_TAGS,
};
use crate::html::{self, Token};
use crate::warning::Warning;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnicodeForm {
    #[default]
    Nfc,
    Nfkc,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizeConfig {
    /// Tags removed together with their content.
    pub model_tags_to_remove: BTreeSet<String>,
    pub unicode_form: UnicodeForm,
    /// Diacritics count toward the metrics unless this is set.
    pub strip_diacritics: bool,
    pub hr_normal_form: String,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        Self {
            model_tags_to_remove: ["page_number", "watermark"]
                .into_iter()
                .map(String::from)
                .collect(),
            unicode_form: UnicodeForm::Nfc,
            strip_diacritics: false,
            hr_normal_form: "---".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("horizontal rule form {0:?} is not itself a horizontal rule")]
    RuleForm(String),
    #[error("invalid tag name {0:?}")]
    TagName(String),
}

impl NormalizeConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        // A rule made only of dashes would read as a setext underline after a
        // paragraph, but serialization always separates blocks by a blank line.
        if !is_horizontal_rule(&self.hr_normal_form)
            || self.hr_normal_form.trim() != self.hr_normal_form
        {
            return Err(ConfigError::RuleForm(self.hr_normal_form.clone()));
        }
        for tag in &self.model_tags_to_remove {
            let ok = tag.starts_with(|c: char| c.is_ascii_lowercase())
                && tag
                    .bytes()
                    .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-');
            if !ok {
                return Err(ConfigError::TagName(tag.clone()));
            }
        }
        Ok(())
    }

    /// Parser options recognising the default special tags plus every
    /// configured model tag.
    pub fn parse_options(&self) -> ParseOptions {
        let mut opts = ParseOptions::default();
        opts.special_tags
            .extend(self.model_tags_to_remove.iter().cloned());
        opts
    }

    fn special_tags(&self) -> BTreeSet<String> {
        DEFAULT_SPECIAL_TAGS
            .iter()
            .map(|s| s.to_string())
            .chain(self.model_tags_to_remove.iter().cloned())
            .collect()
    }
}

/// Result of [`standardize_with_warnings`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Standardized {
    pub text: String,
    pub warnings: Vec<Warning>,
}

/// Runs standardization steps 1, 3, 4, 5 and 6 in that order.
pub fn standardize(text: &str, cfg: &NormalizeConfig) -> String {
    standardize_with_warnings(text, cfg).text
}

pub fn standardize_with_warnings(text: &str, cfg: &NormalizeConfig) -> Standardized {
    let special = cfg.special_tags();
    let mut warnings = Vec::new();

    // Steps 1 and 6 run to a joint fixpoint: stripping a tag can splice its
    // neighbours into a new tag.
    let mut current = text.to_string();
    loop {
        let (stripped, w) = strip_tags_outside_tables(&current, &special);
        for warning in w {
            if !warnings.contains(&warning) {
                warnings.push(warning);
            }
        }
        let next = remove_model_tags(&stripped, &cfg.model_tags_to_remove);
        if next == current {
            break;
        }
        current = next;
    }

    // Steps 3 and 4 fall out of parsing plus canonical serialization.
    let mut doc = parse_markdown_with(&current, &cfg.parse_options());
    warnings.append(&mut doc.warnings);
    unify_table_formatting(&mut doc);
    // Model tags left open inside a cell close with it.
    let model_tags = &cfg.model_tags_to_remove;
    for block in &mut doc.blocks {
        if let Block::Table(Table::Html(tree)) = block {
            tree.remove_elements(&|name| model_tags.contains(name));
        }
    }
    Standardized {
        text: serialize_with_rule(&doc, &cfg.hr_normal_form),
        warnings,
    }
}

/// Step 1: drops every tag outside `<table>` regions and keeps the text.
///
/// Tables that fail to parse are not tables: their tags are stripped too.
/// Special-tag elements survive (with any markup inside them stripped) so
/// that step 6 can remove model tags as whole elements.
pub fn strip_tags_outside_tables(
    text: &str,
    special_tags: &BTreeSet<String>,
) -> (String, Vec<Warning>) {
    let mut out = String::with_capacity(text.len());
    let mut warnings = Vec::new();
    let mut pos = 0;
    while let Some((tok, end)) = html::next_token(text, pos) {
        match tok {
            Token::Text(t) => out.push_str(t),
            Token::Start { ref name, .. } if name == "table" => {
                match html::parse_table_prefix(&text[pos..]) {
                    Ok((_, consumed)) => {
                        out.push_str(&text[pos..pos + consumed]);
                        pos += consumed;
                        continue;
                    }
                    Err(e) => warnings.push(Warning::MalformedHtml {
                        offset: pos,
                        detail: e.to_string(),
                    }),
                }
            }
            Token::Start { ref name, .. } if special_tags.contains(name) => {
                match special_element_at(text, pos, special_tags) {
                    Some(Ok((name, content, close_end))) => {
                        let inner = strip_all_tags(&text[content]);
                        if inner.is_empty() && html::is_void(&name) {
                            out.push_str(&format!("<{name}/>"));
                        } else {
                            out.push_str(&format!("<{name}>{inner}</{name}>"));
                        }
                        pos = close_end;
                        continue;
                    }
                    _ => warnings.push(Warning::UnclosedTag { tag: name.clone() }),
                }
            }
            _ => {}
        }
        pos = end;
    }
    (out, warnings)
}

fn strip_all_tags(text: &str) -> String {
    html::tokens(text)
        .filter_map(|(_, tok, _)| match tok {
            Token::Text(t) => Some(t),
            _ => None,
        })
        .collect()
}

/// Step 6: removes every complete `<tag>…</tag>` element (and `<tag/>`) for
/// the given tag names, wherever it appears.
pub fn remove_model_tags(text: &str, tags: &BTreeSet<String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    while let Some((tok, end)) = html::next_token(text, pos) {
        if let Token::Start {
            ref name,
            self_closing,
            ..
        } = tok
        {
            if tags.contains(name) {
                if self_closing {
                    pos = end;
                    continue;
                }
                if let Some((_, close_end)) = html::find_close(text, end, name) {
                    pos = close_end;
                    continue;
                }
            }
        }
        out.push_str(&text[pos..end]);
        pos = end;
    }
    out
}

/// Step 5: `<strong>` becomes `<b>` and `<em>` becomes `<i>` inside tables.
pub fn unify_table_formatting(doc: &mut Document) {
    let rename = |name: &str| match name {
        "strong" => Some("b"),
        "em" => Some("i"),
        _ => None,
    };
    for block in &mut doc.blocks {
        if let Block::Table(Table::Html(tree)) = block {
            tree.rename_elements(&rename);
        }
    }
}

/// Step 2: every Markdown pipe table becomes an HTML table tree. Rows with a
/// cell count different from the delimiter row are reported; short rows are
/// padded with empty cells.
pub fn convert_md_tables(mut doc: Document) -> Document {
    for block in &mut doc.blocks {
        if let Block::Table(Table::Markdown(md)) = block {
            doc.warnings.extend(md.shape_warnings());
            *block = Block::Table(Table::Html(md.to_tree()));
        }
    }
    doc
}

/// Character-level normalization: Unicode form, optional removal of
/// combining marks, whitespace runs collapsed to one space, line ends trimmed.
pub fn normalize_arabic(text: &str, cfg: &NormalizeConfig) -> String {
    let normalize = |s: &str| -> String {
        match cfg.unicode_form {
            UnicodeForm::Nfc => s.nfc().collect(),
            UnicodeForm::Nfkc => s.nfkc().collect(),
        }
    };
    let mut s = normalize(text);
    if cfg.strip_diacritics {
        let stripped: String = s.chars().filter(|&c| !is_combining_mark(c)).collect();
        // Removing marks can bring composable characters together.
        s = normalize(&stripped);
    }
    s.split('\n')
        .map(|line| line.split_whitespace().collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}
