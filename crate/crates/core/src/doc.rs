//! Block-structured documents parsed from mixed Markdown and HTML.
//!
//! Ground truth and model output share one format: Markdown for running
//! text, raw HTML for tables, and a small set of special tags
//! (`<page_number>`, `<watermark>`, `<img>`) for page furniture. The parser
//! here is line oriented and total; [`try_parse_markdown`] is the strict
//! variant that reports the first malformed HTML region instead of falling
//! back to plain text.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::html::{self, collapse_ws, trim_cell_edges, HtmlError, HtmlTree};
use crate::inline::{parse_inline, Inline};
use crate::warning::Warning;

/// Special tags recognised when no configuration says otherwise.
pub const DEFAULT_SPECIAL_TAGS: [&str; 3] = ["page_number", "watermark", "img"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    #[default]
    Reference,
    Prediction,
}

/// ATX heading level, always in `1..=6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HeadingLevel(u8);

impl HeadingLevel {
    pub fn new(level: u8) -> Option<Self> {
        (1..=6).contains(&level).then_some(Self(level))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

/// A pipe table as written in Markdown, before conversion to HTML.
///
/// Rows keep the cell count they were written with; padding happens when the
/// tree is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdTable {
    /// Column count declared by the delimiter row.
    pub columns: usize,
    /// Header row first. Cell text is trimmed with `\|` unescaped.
    pub rows: Vec<Vec<String>>,
}

impl MdTable {
    /// Builds the HTML tree. Emphasis in cells becomes `b`/`i` elements.
    /// The header row becomes an ordinary `td` row;
    /// short rows are padded with empty cells up to the declared column
    /// count, long rows keep their extra cells.
    pub fn to_tree(&self) -> HtmlTree {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let width = row.len().max(self.columns);
                let cells = (0..width)
                    .map(|i| {
                        let text = row.get(i).map(|c| collapse_ws(c)).unwrap_or_default();
                        let mut cell = HtmlTree::element("td", inline_nodes(&parse_inline(&text)));
                        trim_cell_edges(&mut cell);
                        cell
                    })
                    .collect();
                HtmlTree::element("tr", cells)
            })
            .collect();
        HtmlTree::element("table", rows)
    }

    /// One warning per row whose cell count differs from the delimiter row.
    pub fn shape_warnings(&self) -> Vec<Warning> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, row)| row.len() != self.columns)
            .map(|(row, cells)| Warning::MalformedMdTable {
                row,
                expected: self.columns,
                found: cells.len(),
            })
            .collect()
    }
}

fn inline_nodes(spans: &[Inline]) -> Vec<HtmlTree> {
    spans
        .iter()
        .map(|span| match span {
            Inline::Text(t) => HtmlTree::text(t.clone()),
            Inline::Strong(inner) => HtmlTree::element("b", inline_nodes(inner)),
            Inline::Emphasis(inner) => HtmlTree::element("i", inline_nodes(inner)),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Table {
    Html(HtmlTree),
    Markdown(MdTable),
}

impl Table {
    pub fn tree(&self) -> HtmlTree {
        match self {
            Table::Html(tree) => tree.clone(),
            Table::Markdown(md) => md.to_tree(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    /// Inline text; emphasis markers (`**`, `*`, `_`) stay in the text.
    Paragraph(String),
    Header { level: HeadingLevel, text: String },
    HorizontalRule,
    Table(Table),
    SpecialTag { name: String, content: String },
}

impl Block {
    pub fn header(level: u8, text: impl Into<String>) -> Self {
        Block::Header {
            level: HeadingLevel::new(level).expect("heading level in 1..=6"),
            text: text.into(),
        }
    }

    pub fn paragraph(text: impl Into<String>) -> Self {
        Block::Paragraph(text.into())
    }

    pub fn special(name: impl Into<String>, content: impl Into<String>) -> Self {
        Block::SpecialTag {
            name: name.into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub blocks: Vec<Block>,
    pub source_kind: SourceKind,
    pub warnings: Vec<Warning>,
}

impl Document {
    pub fn new(blocks: Vec<Block>) -> Self {
        Self {
            blocks,
            ..Self::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn tables(&self) -> impl Iterator<Item = &Table> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Table(t) => Some(t),
            _ => None,
        })
    }

    /// Running text of the document: paragraphs, headers and table cell
    /// text, one block per line. Special tags are page furniture and are
    /// left out.
    pub fn plain_text(&self) -> String {
        let mut lines = Vec::new();
        for block in &self.blocks {
            match block {
                Block::Paragraph(t) | Block::Header { text: t, .. } => lines.push(t.clone()),
                Block::Table(table) => {
                    let tree = table.tree();
                    let text = tree.text_content();
                    if !text.is_empty() {
                        lines.push(text);
                    }
                }
                Block::HorizontalRule | Block::SpecialTag { .. } => {}
            }
        }
        lines.join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOptions {
    pub special_tags: BTreeSet<String>,
    pub source_kind: SourceKind,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            special_tags: DEFAULT_SPECIAL_TAGS.iter().map(|s| s.to_string()).collect(),
            source_kind: SourceKind::Reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed table at byte {offset}: {source}")]
    Table { offset: usize, source: HtmlError },
    #[error("unclosed <{tag}> at byte {offset}")]
    UnclosedTag { tag: String, offset: usize },
}

/// Lenient parse with default options. Never fails; malformed HTML regions
/// become paragraph text and are listed in [`Document::warnings`].
pub fn parse_markdown(text: &str) -> Document {
    parse_markdown_with(text, &ParseOptions::default())
}

pub fn parse_markdown_with(text: &str, opts: &ParseOptions) -> Document {
    Parser::new(text, opts, false)
        .run()
        .expect("lenient parse is total")
}

/// Strict parse: the first malformed table or unclosed special tag is an error.
pub fn try_parse_markdown(text: &str, opts: &ParseOptions) -> Result<Document, ParseError> {
    Parser::new(text, opts, true).run()
}

/// Tags that may be written without content or a closing tag.
fn is_void_special(name: &str) -> bool {
    html::is_void(name)
}

/// Tag name, content range and end offset of a special-tag element.
pub(crate) type SpecialElement = (String, std::ops::Range<usize>, usize);

/// Locates a complete special-tag element starting at `pos`.
///
/// Returns `(name, content_range, end)` or an error when the opening tag is
/// never closed. Nested elements of the same name close first. Void-capable tags (`img`) close at the next `</img>` that
/// comes before another `<img`, otherwise they are empty.
pub(crate) fn special_element_at(
    s: &str,
    pos: usize,
    tags: &BTreeSet<String>,
) -> Option<Result<SpecialElement, ParseError>> {
    let (name, open_end, self_closing) = html::element_start(s, pos, tags)?;
    if self_closing {
        return Some(Ok((name, open_end..open_end, open_end)));
    }
    if is_void_special(&name) {
        let close = html::find_close(s, open_end, &name);
        let next_open = html::find_open(s, open_end, &name).unwrap_or(usize::MAX);
        return Some(Ok(match close {
            Some((cs, ce)) if cs < next_open => (name, open_end..cs, ce),
            _ => (name, open_end..open_end, open_end),
        }));
    }
    Some(match html::find_matching_close(s, open_end, &name) {
        Some((cs, ce)) => Ok((name, open_end..cs, ce)),
        None => Err(ParseError::UnclosedTag { tag: name, offset: pos }),
    })
}

fn is_table_start(s: &str, pos: usize) -> bool {
    matches!(html::try_tag(s, pos), Some((html::Token::Start { ref name, .. }, _)) if name == "table")
}

struct Parser<'a> {
    text: &'a str,
    opts: &'a ParseOptions,
    strict: bool,
    blocks: Vec<Block>,
    para: Vec<String>,
    warnings: Vec<Warning>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, opts: &'a ParseOptions, strict: bool) -> Self {
        Self {
            text,
            opts,
            strict,
            blocks: Vec::new(),
            para: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn flush_para(&mut self) {
        if !self.para.is_empty() {
            let text = self.para.join("\n");
            self.para.clear();
            self.blocks.push(Block::Paragraph(text));
        }
    }

    fn is_element_start(&self, pos: usize) -> bool {
        self.text.as_bytes().get(pos) == Some(&b'<')
            && (is_table_start(self.text, pos)
                || html::element_start(self.text, pos, &self.opts.special_tags).is_some())
    }

    /// Whether a complete table or special-tag element starts at `pos`.
    /// Malformed elements inside a line stay text.
    fn element_parses(&self, pos: usize) -> bool {
        let s = self.text;
        if !self.is_element_start(pos) {
            return false;
        }
        if is_table_start(s, pos) {
            return html::parse_table_prefix(&s[pos..]).is_ok();
        }
        matches!(special_element_at(s, pos, &self.opts.special_tags), Some(Ok(_)))
    }

    /// First offset in `from..to` where a complete element starts.
    fn next_element(&self, from: usize, to: usize) -> Option<usize> {
        let s = self.text;
        (from..to)
            .filter(|&i| s.as_bytes()[i] == b'<' && s.is_char_boundary(i))
            .find(|&i| self.element_parses(i))
    }

    /// Tries to parse a table or special-tag element at `pos`. Returns the
    /// offset to resume from, or `None` (after recording a warning) when the
    /// element is malformed.
    fn element(&mut self, pos: usize) -> Result<Option<usize>, ParseError> {
        let s = self.text;
        if is_table_start(s, pos) {
            return match html::parse_table_prefix(&s[pos..]) {
                Ok((tree, consumed)) => {
                    self.flush_para();
                    self.blocks.push(Block::Table(Table::Html(tree)));
                    Ok(Some(pos + consumed))
                }
                Err(source) => self.malformed(ParseError::Table { offset: pos, source }),
            };
        }
        match special_element_at(s, pos, &self.opts.special_tags) {
            Some(Ok((name, content, end))) => {
                self.flush_para();
                self.blocks.push(Block::SpecialTag {
                    name,
                    content: s[content].to_string(),
                });
                Ok(Some(end))
            }
            Some(Err(e)) => self.malformed(e),
            None => Ok(None),
        }
    }

    fn malformed(&mut self, err: ParseError) -> Result<Option<usize>, ParseError> {
        if self.strict {
            return Err(err);
        }
        let offset = match &err {
            ParseError::Table { offset, .. } | ParseError::UnclosedTag { offset, .. } => *offset,
        };
        self.warnings.push(Warning::MalformedHtml {
            offset,
            detail: err.to_string(),
        });
        Ok(None)
    }

    fn run(mut self) -> Result<Document, ParseError> {
        let s = self.text;
        let mut pos = 0;
        // Set after a failed element parse: the rest of the line is text.
        let mut literal_until = 0;
        while pos < s.len() {
            let line_end = s[pos..].find('\n').map_or(s.len(), |i| pos + i);
            let line = &s[pos..line_end];
            if line.trim().is_empty() {
                self.flush_para();
                pos = line_end + 1;
                continue;
            }
            let lead = pos + (line.len() - line.trim_start().len());

            if lead >= literal_until && self.is_element_start(lead) {
                if let Some(next) = self.element(lead)? {
                    pos = next;
                    continue;
                }
                // The malformed tag stays text; later elements still split.
                literal_until = lead + 1;
            }

            // A table or special tag later on the line ends this segment.
            let search_from = (lead + 1).max(literal_until);
            let seg_end = self.next_element(search_from, line_end).unwrap_or(line_end);

            // Pipe tables consume whole lines and are never split.
            if lead >= literal_until && seg_end == line_end {
                if let Some(next) = self.pipe_table(pos, line_end) {
                    pos = next;
                    continue;
                }
            }

            self.line(s[pos..seg_end].trim());
            pos = if seg_end == line_end {
                line_end + 1
            } else {
                seg_end
            };
        }
        self.flush_para();
        Ok(Document {
            blocks: self.blocks,
            source_kind: self.opts.source_kind,
            warnings: self.warnings,
        })
    }

    /// Classifies one trimmed, non-empty line segment.
    fn line(&mut self, seg: &str) {
        if seg.is_empty() {
            return;
        }
        if let Some((level, text)) = atx_header(seg) {
            self.flush_para();
            self.blocks.push(Block::Header { level, text });
            return;
        }
        if !self.para.is_empty() {
            if let Some(level) = setext_level(seg) {
                let text = collapse_ws(&self.para.join(" "));
                self.para.clear();
                self.blocks.push(Block::Header {
                    level: HeadingLevel::new(level).expect("setext level is 1 or 2"),
                    text,
                });
                return;
            }
        }
        if is_horizontal_rule(seg) {
            self.flush_para();
            self.blocks.push(Block::HorizontalRule);
            return;
        }
        self.para.push(seg.to_string());
    }

    fn pipe_table(&mut self, pos: usize, line_end: usize) -> Option<usize> {
        let s = self.text;
        let header = &s[pos..line_end];
        if !has_unescaped_pipe(header) || line_end >= s.len() {
            return None;
        }
        let delim_start = line_end + 1;
        let line_end = s[delim_start..].find('\n').map_or(s.len(), |i| delim_start + i);
        // An element later on the delimiter line ends the table there.
        let split = self.next_element(delim_start, line_end);
        let delim_end = split.unwrap_or(line_end);
        let columns = delimiter_columns(&s[delim_start..delim_end])?;

        self.flush_para();
        let mut rows = vec![split_pipe_row(header)];
        let mut next = split.unwrap_or(line_end + 1);
        while split.is_none() && next < s.len() {
            let end = s[next..].find('\n').map_or(s.len(), |i| next + i);
            let row = &s[next..end];
            if row.trim().is_empty()
                || !has_unescaped_pipe(row)
                || self.next_element(next, end).is_some()
            {
                break;
            }
            rows.push(split_pipe_row(row));
            next = end + 1;
        }
        self.blocks
            .push(Block::Table(Table::Markdown(MdTable { columns, rows })));
        Some(next)
    }
}

fn atx_header(seg: &str) -> Option<(HeadingLevel, String)> {
    let hashes = seg.bytes().take_while(|&b| b == b'#').count();
    let level = HeadingLevel::new(u8::try_from(hashes).ok()?)?;
    let rest = &seg[hashes..];
    if !(rest.is_empty() || rest.starts_with([' ', '\t'])) {
        return None;
    }
    let mut text = rest.trim();
    // Optional closing sequence: a run of '#' preceded by whitespace.
    let without = text.trim_end_matches('#');
    if without.is_empty() {
        text = "";
    } else if without.len() != text.len() && without.ends_with([' ', '\t']) {
        text = without.trim_end();
    }
    Some((level, text.to_string()))
}

fn setext_level(seg: &str) -> Option<u8> {
    if seg.bytes().all(|b| b == b'=') {
        Some(1)
    } else if seg.bytes().all(|b| b == b'-') {
        Some(2)
    } else {
        None
    }
}

/// Three or more of the same `-`, `*` or `_`, optionally separated by
/// spaces or tabs, and nothing else.
pub(crate) fn is_horizontal_rule(seg: &str) -> bool {
    let mut marker = None;
    let mut count = 0;
    for c in seg.trim().chars() {
        match c {
            ' ' | '\t' => {}
            '-' | '*' | '_' => {
                if *marker.get_or_insert(c) != c {
                    return false;
                }
                count += 1;
            }
            _ => return false,
        }
    }
    count >= 3
}

fn has_unescaped_pipe(line: &str) -> bool {
    let mut escaped = false;
    for c in line.chars() {
        match c {
            '\\' if !escaped => escaped = true,
            '|' if !escaped => return true,
            _ => escaped = false,
        }
    }
    false
}

fn split_pipe_row(line: &str) -> Vec<String> {
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut escaped = false;
    for c in line.trim().chars() {
        if escaped {
            if c != '|' {
                cur.push('\\');
            }
            cur.push(c);
            escaped = false;
            continue;
        }
        match c {
            '\\' => escaped = true,
            '|' => cells.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    if escaped {
        cur.push('\\');
    }
    cells.push(cur);
    // Leading and trailing pipes delimit, they do not open empty cells.
    if line.trim_start().starts_with('|') {
        cells.remove(0);
    }
    if line.trim_end().ends_with('|') && !line.trim_end().ends_with("\\|") && !cells.is_empty() {
        cells.pop();
    }
    cells.into_iter().map(|c| c.trim().to_string()).collect()
}

fn delimiter_columns(line: &str) -> Option<usize> {
    if !has_unescaped_pipe(line) {
        return None;
    }
    let cells = split_pipe_row(line);
    let ok = !cells.is_empty()
        && cells.iter().all(|c| {
            let inner = c.strip_prefix(':').unwrap_or(c);
            let inner = inner.strip_suffix(':').unwrap_or(inner);
            !inner.is_empty() && inner.bytes().all(|b| b == b'-')
        });
    ok.then_some(cells.len())
}

fn escape_cell(text: &str) -> String {
    text.replace('|', "\\|")
}

fn header_line(level: HeadingLevel, text: &str) -> String {
    let mut line = "#".repeat(level.get() as usize);
    if !text.is_empty() {
        line.push(' ');
        line.push_str(text);
        // Protect a trailing hash run from being read as a closing sequence.
        let stripped = text.trim_end_matches('#');
        if stripped.len() != text.len() && (stripped.is_empty() || stripped.ends_with([' ', '\t']))
        {
            line.push_str(" #");
        }
    }
    line
}

fn md_table_text(md: &MdTable) -> String {
    let mut lines = Vec::with_capacity(md.rows.len() + 1);
    let row_line = |row: &Vec<String>| {
        if row.is_empty() {
            return "|".to_string();
        }
        let cells: Vec<String> = row.iter().map(|c| escape_cell(c)).collect();
        format!("| {} |", cells.join(" | "))
    };
    if let Some(head) = md.rows.first() {
        lines.push(row_line(head));
    }
    lines.push(format!("|{}", " --- |".repeat(md.columns)));
    for row in md.rows.iter().skip(1) {
        lines.push(row_line(row));
    }
    lines.join("\n")
}

fn block_text(block: &Block, hr_form: &str) -> String {
    match block {
        Block::Paragraph(t) => t.clone(),
        Block::Header { level, text } => header_line(*level, text),
        Block::HorizontalRule => hr_form.to_string(),
        Block::Table(Table::Html(tree)) => tree.to_html(),
        Block::Table(Table::Markdown(md)) => md_table_text(md),
        Block::SpecialTag { name, content } => {
            if content.is_empty() && is_void_special(name) {
                format!("<{name}/>")
            } else {
                format!("<{name}>{content}</{name}>")
            }
        }
    }
}

/// Canonical text form: ATX headers, `---` rules, tables as written (HTML
/// from the tree, pipe tables re-rendered), blocks separated by a blank line.
pub fn serialize(doc: &Document) -> String {
    serialize_with_rule(doc, "---")
}

pub(crate) fn serialize_with_rule(doc: &Document, hr_form: &str) -> String {
    doc.blocks
        .iter()
        .map(|b| block_text(b, hr_form))
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn text_node_child(text: &str) -> Vec<HtmlTree> {
    vec![HtmlTree::text(text)]
}

/// Builds the whole-document tree compared by TEDS.
///
/// The root is a synthetic `doc` node with one child per block: `h1`..`h6`
/// and `p` carry a text child, rules become `hr`, tables contribute their own
/// tree and special tags an element named after the tag.
pub fn document_to_tree(doc: &Document) -> HtmlTree {
    let children = doc
        .blocks
        .iter()
        .map(|block| match block {
            Block::Paragraph(t) => HtmlTree::element("p", text_node_child(t)),
            Block::Header { level, text } => {
                HtmlTree::element(format!("h{}", level.get()), text_node_child(text))
            }
            Block::HorizontalRule => HtmlTree::element("hr", Vec::new()),
            Block::Table(table) => table.tree(),
            Block::SpecialTag { name, content } => {
                let children = if content.trim().is_empty() {
                    Vec::new()
                } else {
                    text_node_child(content.trim())
                };
                HtmlTree::element(name.as_str(), children)
            }
        })
        .collect();
    HtmlTree::element("doc", children)
}

/// Tables-only variant of [`document_to_tree`]: a `doc` root over the
/// document's tables.
pub fn tables_to_tree(doc: &Document) -> HtmlTree {
    HtmlTree::element("doc", doc.tables().map(Table::tree).collect())
}
