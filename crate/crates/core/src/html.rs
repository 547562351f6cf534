//! A small, lenient HTML tokenizer and a strict table tree builder.
//!
//! The tokenizer never fails: anything that does not form a syntactically
//! complete tag is text. The tree builder, in contrast, is strict about
//! balance and table nesting, because a table that does not close cleanly is
//! a malformed prediction the caller has to know about.

use std::fmt;

use thiserror::Error;

/// Elements that never have content or an end tag.
const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];

pub(crate) fn is_void(name: &str) -> bool {
    VOID_ELEMENTS.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token<'a> {
    Text(&'a str),
    Start {
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    },
    End {
        name: String,
    },
    /// Comments, doctypes and processing instructions.
    Comment,
}

/// Returns the token starting at `pos` and the byte offset just past it.
pub(crate) fn next_token(s: &str, pos: usize) -> Option<(Token<'_>, usize)> {
    if pos >= s.len() {
        return None;
    }
    if let Some(tag) = try_tag(s, pos) {
        return Some(tag);
    }
    let bytes = s.as_bytes();
    let mut i = pos + 1;
    while i < s.len() {
        if bytes[i] == b'<' && try_tag(s, i).is_some() {
            break;
        }
        i += 1;
    }
    Some((Token::Text(&s[pos..i]), i))
}

/// Iterates over all tokens of `s` together with their start offsets.
pub(crate) fn tokens(s: &str) -> impl Iterator<Item = (usize, Token<'_>, usize)> + '_ {
    let mut pos = 0;
    std::iter::from_fn(move || {
        let start = pos;
        let (tok, end) = next_token(s, pos)?;
        pos = end;
        Some((start, tok, end))
    })
}

fn is_name_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b':')
}

/// Parses a complete tag at `pos`, or returns `None` if the `<` there is text.
pub(crate) fn try_tag(s: &str, pos: usize) -> Option<(Token<'_>, usize)> {
    let bytes = s.as_bytes();
    if bytes.get(pos) != Some(&b'<') {
        return None;
    }
    let rest = &s[pos..];
    if let Some(body) = rest.strip_prefix("<!--") {
        let end = body.find("-->")?;
        return Some((Token::Comment, pos + 4 + end + 3));
    }
    match bytes.get(pos + 1)? {
        b'!' | b'?' => {
            let end = rest.find('>')?;
            Some((Token::Comment, pos + end + 1))
        }
        b'/' => {
            let start = pos + 2;
            if !bytes.get(start)?.is_ascii_alphabetic() {
                return None;
            }
            let mut i = start;
            while i < bytes.len() && is_name_char(bytes[i]) {
                i += 1;
            }
            let name = s[start..i].to_ascii_lowercase();
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if bytes.get(i) != Some(&b'>') {
                return None;
            }
            Some((Token::End { name }, i + 1))
        }
        b if b.is_ascii_alphabetic() => {
            let start = pos + 1;
            let mut i = start;
            while i < bytes.len() && is_name_char(bytes[i]) {
                i += 1;
            }
            let name = s[start..i].to_ascii_lowercase();
            // A name must be followed by whitespace, '>' or '/'.
            match bytes.get(i)? {
                b'>' | b'/' => {}
                b if b.is_ascii_whitespace() => {}
                _ => return None,
            }
            let (attrs, self_closing, end) = parse_attrs(s, i)?;
            Some((
                Token::Start {
                    name,
                    attrs,
                    self_closing,
                },
                end,
            ))
        }
        _ => None,
    }
}

type Attrs = Vec<(String, String)>;

fn parse_attrs(s: &str, mut i: usize) -> Option<(Attrs, bool, usize)> {
    let bytes = s.as_bytes();
    let mut attrs = Vec::new();
    loop {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        match *bytes.get(i)? {
            b'>' => return Some((attrs, false, i + 1)),
            b'/' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    return Some((attrs, true, i + 2));
                }
                i += 1;
                continue;
            }
            _ => {}
        }
        let name_start = i;
        while i < bytes.len()
            && !bytes[i].is_ascii_whitespace()
            && !matches!(bytes[i], b'=' | b'>' | b'/')
        {
            i += 1;
        }
        let name = s[name_start..i].to_ascii_lowercase();
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let mut value = String::new();
        if bytes.get(i) == Some(&b'=') {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            match *bytes.get(i)? {
                q @ (b'"' | b'\'') => {
                    let close = s[i + 1..].find(q as char)?;
                    value = s[i + 1..i + 1 + close].to_string();
                    i += close + 2;
                }
                _ => {
                    let v_start = i;
                    while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>' {
                        i += 1;
                    }
                    value = s[v_start..i].to_string();
                }
            }
        }
        if !name.is_empty() {
            attrs.push((name, value));
        }
    }
}

/// Decodes the handful of character references that show up in OCR output.
pub(crate) fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let decoded = rest.find(';').filter(|&semi| semi <= 10).and_then(|semi| {
            let entity = &rest[1..semi];
            let ch = match entity {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "nbsp" => Some('\u{00A0}'),
                _ => entity
                    .strip_prefix("#x")
                    .or_else(|| entity.strip_prefix("#X"))
                    .and_then(|hex| u32::from_str_radix(hex, 16).ok())
                    .or_else(|| entity.strip_prefix('#').and_then(|d| d.parse().ok()))
                    .and_then(char::from_u32),
            };
            ch.map(|c| (c, semi + 1))
        });
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &rest[len..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

pub(crate) fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
    out
}

/// Collapses every whitespace run to one space and trims both ends.
pub(crate) fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Collapses every whitespace run to one space, keeping a space at either
/// end.
fn collapse_ws_inline(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_ws = false;
    for c in s.chars() {
        if c.is_whitespace() {
            if !in_ws {
                out.push(' ');
            }
            in_ws = true;
        } else {
            out.push(c);
            in_ws = false;
        }
    }
    out
}

/// Trims whitespace at the start and end of a cell's inline content,
/// descending into leading and trailing elements.
pub(crate) fn trim_cell_edges(cell: &mut HtmlTree) {
    trim_edge(cell, true);
    trim_edge(cell, false);
}

fn trim_edge(node: &mut HtmlTree, start: bool) {
    loop {
        let child = if start {
            node.children.first_mut()
        } else {
            node.children.last_mut()
        };
        let Some(child) = child else { return };
        match &mut child.kind {
            NodeKind::Text(t) => {
                *t = if start { t.trim_start() } else { t.trim_end() }.to_string();
                if !t.is_empty() {
                    return;
                }
                if start {
                    node.children.remove(0);
                } else {
                    node.children.pop();
                }
            }
            NodeKind::Element(_) => return trim_edge(child, start),
        }
    }
}

/// Row and column span of a table cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct CellSpan {
    pub rowspan: u32,
    pub colspan: u32,
}

impl Default for CellSpan {
    fn default() -> Self {
        Self {
            rowspan: 1,
            colspan: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Element(String),
    Text(String),
}

/// Label used for text nodes wherever a plain string label is needed.
pub const TEXT_LABEL: &str = "#text";

/// An ordered, labeled tree built from HTML.
///
/// Text nodes are always leaves, and cell spans only ever appear on `td`/`th`
/// elements; the constructors uphold both.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HtmlTree {
    kind: NodeKind,
    span: Option<CellSpan>,
    children: Vec<HtmlTree>,
}

impl HtmlTree {
    pub fn element(name: impl Into<String>, children: Vec<HtmlTree>) -> Self {
        Self {
            kind: NodeKind::Element(name.into().to_ascii_lowercase()),
            span: None,
            children,
        }
    }

    pub fn text(text: impl Into<String>) -> Self {
        Self {
            kind: NodeKind::Text(text.into()),
            span: None,
            children: Vec::new(),
        }
    }

    /// Attaches a cell span. A span of 1×1 is stored as no span.
    ///
    /// # Panics
    ///
    /// Panics if the node is not a `td` or `th` element.
    pub fn with_span(mut self, span: CellSpan) -> Self {
        assert!(self.is_cell(), "cell span on non-cell node {}", self.label());
        self.span = (span != CellSpan::default()).then_some(span);
        self
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    /// Element name, or [`TEXT_LABEL`] for text nodes.
    pub fn label(&self) -> &str {
        match &self.kind {
            NodeKind::Element(name) => name,
            NodeKind::Text(_) => TEXT_LABEL,
        }
    }

    pub fn text_value(&self) -> Option<&str> {
        match &self.kind {
            NodeKind::Text(t) => Some(t),
            NodeKind::Element(_) => None,
        }
    }

    pub fn is_text(&self) -> bool {
        matches!(self.kind, NodeKind::Text(_))
    }

    pub fn is_cell(&self) -> bool {
        matches!(self.label(), "td" | "th")
    }

    pub fn span(&self) -> Option<CellSpan> {
        self.span
    }

    /// Span with the 1×1 default filled in.
    pub fn effective_span(&self) -> CellSpan {
        self.span.unwrap_or_default()
    }

    pub fn children(&self) -> &[HtmlTree] {
        &self.children
    }

    /// Appends a child.
    ///
    /// # Panics
    ///
    /// Panics when called on a text node.
    pub fn push_child(&mut self, child: HtmlTree) {
        assert!(!self.is_text(), "text nodes are leaves");
        self.children.push(child);
    }

    /// Number of nodes in the tree, including the root.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(HtmlTree::size).sum::<usize>()
    }

    /// Preorder traversal.
    pub fn preorder(&self) -> Vec<&HtmlTree> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(node.children.iter().rev());
        }
        out
    }

    /// All `td`/`th` nodes in document order, including those of nested tables.
    pub fn cells(&self) -> Vec<&HtmlTree> {
        self.preorder().into_iter().filter(|n| n.is_cell()).collect()
    }

    /// Concatenated descendant text, space separated.
    pub fn text_content(&self) -> String {
        let parts: Vec<&str> = self
            .preorder()
            .into_iter()
            .filter_map(HtmlTree::text_value)
            .collect();
        parts.join(" ")
    }

    /// Renames elements in place; `f` returns the replacement name, if any.
    pub fn rename_elements(&mut self, f: &impl Fn(&str) -> Option<&'static str>) {
        if let NodeKind::Element(name) = &mut self.kind {
            if let Some(new) = f(name) {
                *name = new.to_string();
            }
        }
        for child in &mut self.children {
            child.rename_elements(f);
        }
    }

    /// Drops every element whose name matches `f`, with its content.
    /// Neighbouring text merges and cell edges are trimmed again.
    pub fn remove_elements(&mut self, f: &impl Fn(&str) -> bool) {
        let before = self.children.len();
        self.children
            .retain(|c| !matches!(&c.kind, NodeKind::Element(name) if f(name)));
        for child in &mut self.children {
            child.remove_elements(f);
        }
        if self.children.len() != before {
            let mut merged: Vec<HtmlTree> = Vec::with_capacity(self.children.len());
            for child in self.children.drain(..) {
                match (merged.last_mut().map(|m| &mut m.kind), &child.kind) {
                    (Some(NodeKind::Text(prev)), NodeKind::Text(t)) => {
                        prev.push_str(t);
                        *prev = collapse_ws_inline(prev);
                    }
                    _ => merged.push(child),
                }
            }
            self.children = merged;
        }
        if self.is_cell() || self.label() == "caption" {
            trim_cell_edges(self);
        }
    }

    /// Canonical HTML rendering. Only span attributes are emitted.
    pub fn to_html(&self) -> String {
        let mut out = String::new();
        self.write_html(&mut out);
        out
    }

    fn write_html(&self, out: &mut String) {
        match &self.kind {
            NodeKind::Text(t) => out.push_str(&escape_text(t)),
            NodeKind::Element(name) => {
                out.push('<');
                out.push_str(name);
                if let Some(span) = self.span {
                    if span.rowspan != 1 {
                        out.push_str(&format!(" rowspan=\"{}\"", span.rowspan));
                    }
                    if span.colspan != 1 {
                        out.push_str(&format!(" colspan=\"{}\"", span.colspan));
                    }
                }
                out.push('>');
                if is_void(name) && self.children.is_empty() {
                    return;
                }
                for child in &self.children {
                    child.write_html(out);
                }
                out.push_str("</");
                out.push_str(name);
                out.push('>');
            }
        }
    }
}

impl fmt::Display for HtmlTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_html())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HtmlError {
    #[error("input does not start with <table>")]
    NotATable,
    #[error("unbalanced HTML at byte {offset}: {detail}")]
    UnbalancedHtml { offset: usize, detail: String },
    #[error("<{tag}> may not appear inside <{parent}>")]
    IllegalNesting { tag: String, parent: String },
    #[error("unexpected content after </table> at byte {offset}")]
    TrailingContent { offset: usize },
}

fn allowed_parents(tag: &str) -> Option<&'static [&'static str]> {
    Some(match tag {
        "tr" => &["table", "thead", "tbody", "tfoot"],
        "td" | "th" => &["tr"],
        "thead" | "tbody" | "tfoot" | "caption" | "colgroup" => &["table"],
        "col" => &["table", "colgroup"],
        _ => return None,
    })
}

fn parse_span(attrs: &[(String, String)]) -> CellSpan {
    let get = |key: &str| {
        attrs
            .iter()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.trim().parse::<u32>().ok())
            .filter(|&v| v >= 1)
            .unwrap_or(1)
    };
    CellSpan {
        rowspan: get("rowspan"),
        colspan: get("colspan"),
    }
}

fn new_element(name: &str, attrs: &[(String, String)]) -> HtmlTree {
    let node = HtmlTree::element(name, Vec::new());
    if node.is_cell() {
        node.with_span(parse_span(attrs))
    } else {
        node
    }
}

fn is_structural(label: &str) -> bool {
    matches!(
        label,
        "table" | "tr" | "thead" | "tbody" | "tfoot" | "td" | "th" | "caption"
    )
}

/// Parses one `<table>` element at the start of `s` (after optional
/// whitespace) and returns the tree and the byte offset just past `</table>`.
pub(crate) fn parse_table_prefix(s: &str) -> Result<(HtmlTree, usize), HtmlError> {
    let lead = s.len() - s.trim_start().len();
    let mut stack: Vec<HtmlTree> = Vec::new();
    let mut pending = String::new();

    fn flush(pending: &mut String, stack: &mut [HtmlTree]) {
        if pending.is_empty() {
            return;
        }
        // Inside a cell, spaces between inline elements separate words.
        let in_cell = stack
            .iter()
            .rev()
            .map(HtmlTree::label)
            .find(|l| is_structural(l))
            .is_some_and(|l| matches!(l, "td" | "th" | "caption"));
        let decoded = decode_entities(pending);
        pending.clear();
        let text = if in_cell {
            collapse_ws_inline(&decoded)
        } else {
            collapse_ws(&decoded)
        };
        if !text.is_empty() {
            if let Some(top) = stack.last_mut() {
                top.push_child(HtmlTree::text(text));
            }
        }
    }

    let mut pos = lead;
    while let Some((tok, end)) = next_token(s, pos) {
        let offset = pos;
        pos = end;
        match tok {
            Token::Comment => {}
            Token::Text(t) => {
                if stack.is_empty() {
                    return Err(HtmlError::NotATable);
                }
                pending.push_str(t);
            }
            Token::Start {
                name,
                attrs,
                self_closing,
            } => {
                flush(&mut pending, &mut stack);
                match stack.last() {
                    None if name != "table" => return Err(HtmlError::NotATable),
                    None => {}
                    Some(parent) => {
                        if let Some(allowed) = allowed_parents(&name) {
                            if !allowed.contains(&parent.label()) {
                                return Err(HtmlError::IllegalNesting {
                                    tag: name,
                                    parent: parent.label().to_string(),
                                });
                            }
                        }
                    }
                }
                let node = new_element(&name, &attrs);
                if is_void(&name) || self_closing {
                    match stack.last_mut() {
                        Some(top) => top.push_child(node),
                        // A self-closing <table/> is an empty table.
                        None => return Ok((node, end)),
                    }
                } else {
                    stack.push(node);
                }
            }
            Token::End { name } => {
                // Stray void end tags are ignored and do not split text.
                if is_void(&name) {
                    continue;
                }
                if stack.is_empty() {
                    return Err(HtmlError::NotATable);
                }
                // Inline end tags without an open match inside the current
                // cell are ignored.
                let inline_open = stack
                    .iter()
                    .rev()
                    .take_while(|n| !is_structural(n.label()))
                    .any(|n| n.label() == name);
                if !is_structural(&name) && !inline_open {
                    continue;
                }
                flush(&mut pending, &mut stack);
                // Open inline elements close implicitly.
                while let Some(top) = stack.last() {
                    if top.label() == name || is_structural(top.label()) {
                        break;
                    }
                    let done = stack.pop().expect("checked non-empty");
                    stack.last_mut().expect("inline under a table").push_child(done);
                }
                let top = stack.last().expect("table stays open");
                if top.label() != name {
                    return Err(HtmlError::UnbalancedHtml {
                        offset,
                        detail: format!("</{name}> closes <{}>", top.label()),
                    });
                }
                let mut done = stack.pop().expect("checked non-empty");
                if matches!(done.label(), "td" | "th" | "caption") {
                    trim_cell_edges(&mut done);
                }
                match stack.last_mut() {
                    Some(parent) => parent.push_child(done),
                    None => return Ok((done, end)),
                }
            }
        }
    }
    match stack.last() {
        None => Err(HtmlError::NotATable),
        Some(top) => Err(HtmlError::UnbalancedHtml {
            offset: s.len(),
            detail: format!("unclosed <{}>", top.label()),
        }),
    }
}

/// Parses a complete HTML table into an [`HtmlTree`] rooted at `table`.
///
/// Whitespace runs collapse to one space. Cell content is trimmed at its
/// edges, whitespace between structural elements is dropped, and
/// every attribute except `rowspan`/`colspan` on cells is discarded.
/// Inline elements left open close with their cell, and inline end tags
/// with nothing to close are ignored. Structural mismatches are errors.
pub fn parse_html_table(html: &str) -> Result<HtmlTree, HtmlError> {
    let (tree, end) = parse_table_prefix(html)?;
    let rest = &html[end..];
    if let Some(extra) = rest.find(|c: char| !c.is_whitespace()) {
        return Err(HtmlError::TrailingContent { offset: end + extra });
    }
    Ok(tree)
}

/// If an opening tag whose name is in `names` starts at `pos`, returns its
/// name, the offset past the tag, and whether it was self-closing.
pub(crate) fn element_start<'n>(
    s: &str,
    pos: usize,
    names: impl IntoIterator<Item = &'n String>,
) -> Option<(String, usize, bool)> {
    match try_tag(s, pos)? {
        (
            Token::Start {
                name, self_closing, ..
            },
            end,
        ) if names.into_iter().any(|n| *n == name) => Some((name, end, self_closing)),
        _ => None,
    }
}

/// Finds the first `</name>` at or after `from`, honouring tag syntax.
/// Returns the start and end offsets of the closing tag.
pub(crate) fn find_close(s: &str, from: usize, name: &str) -> Option<(usize, usize)> {
    let mut pos = from;
    while let Some((tok, end)) = next_token(s, pos) {
        if let Token::End { name: n } = &tok {
            if n == name {
                return Some((pos, end));
            }
        }
        pos = end;
    }
    None
}

/// Like [`find_close`], but nested `<name>` elements must close first and
/// complete tables are skipped whole.
pub(crate) fn find_matching_close(s: &str, from: usize, name: &str) -> Option<(usize, usize)> {
    let mut depth = 0usize;
    let mut pos = from;
    while let Some((tok, end)) = next_token(s, pos) {
        match &tok {
            Token::Start { name: n, .. } if n == "table" => {
                if let Ok((_, consumed)) = parse_table_prefix(&s[pos..]) {
                    pos += consumed;
                    continue;
                }
            }
            Token::Start {
                name: n,
                self_closing: false,
                ..
            } if n == name => depth += 1,
            Token::End { name: n } if n == name => {
                if depth == 0 {
                    return Some((pos, end));
                }
                depth -= 1;
            }
            _ => {}
        }
        pos = end;
    }
    None
}

/// Offset of the next `<name` opening tag at or after `from`.
pub(crate) fn find_open(s: &str, from: usize, name: &str) -> Option<usize> {
    let mut pos = from;
    while let Some((tok, end)) = next_token(s, pos) {
        if let Token::Start { name: n, .. } = &tok {
            if n == name {
                return Some(pos);
            }
        }
        pos = end;
    }
    None
}
