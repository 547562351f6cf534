//! Emphasis spans inside paragraph text.
//!
//! Paragraph blocks keep their emphasis markers as text. This module splits
//! that text into spans when something needs the structure, such as HTML
//! emission for rendering.

use crate::html::escape_text;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inline {
    Text(String),
    Strong(Vec<Inline>),
    Emphasis(Vec<Inline>),
}

/// Splits `text` into text, `**strong**` and `*emphasis*`/`_emphasis_` spans.
/// Unmatched markers stay literal.
pub fn parse_inline(text: &str) -> Vec<Inline> {
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if c == '*' || c == '_' {
            let double = rest.starts_with("**") || rest.starts_with("__");
            let marker = if double { &rest[..2] } else { &rest[..1] };
            let body = &rest[marker.len()..];
            if let Some(end) = find_closing(body, marker) {
                if end > 0 {
                    if !buf.is_empty() {
                        out.push(Inline::Text(std::mem::take(&mut buf)));
                    }
                    let inner = parse_inline(&body[..end]);
                    out.push(if double {
                        Inline::Strong(inner)
                    } else {
                        Inline::Emphasis(inner)
                    });
                    rest = &body[end + marker.len()..];
                    continue;
                }
            }
            buf.push_str(marker);
            rest = body;
            continue;
        }
        buf.push(c);
        rest = &rest[c.len_utf8()..];
    }
    if !buf.is_empty() {
        out.push(Inline::Text(buf));
    }
    out
}

fn find_closing(body: &str, marker: &str) -> Option<usize> {
    let mut from = 0;
    while let Some(i) = body[from..].find(marker) {
        let at = from + i;
        // A single marker must not be half of a double one.
        let doubled = marker.len() == 1
            && (body[at + 1..].starts_with(marker) || (at > 0 && body[..at].ends_with(marker)));
        if !doubled {
            return Some(at);
        }
        from = at + if body[at + 1..].starts_with(marker) { 2 } else { 1 };
    }
    None
}

pub fn inline_to_html(spans: &[Inline]) -> String {
    let mut out = String::new();
    for span in spans {
        match span {
            Inline::Text(t) => out.push_str(&escape_text(t)),
            Inline::Strong(inner) => {
                out.push_str("<strong>");
                out.push_str(&inline_to_html(inner));
                out.push_str("</strong>");
            }
            Inline::Emphasis(inner) => {
                out.push_str("<em>");
                out.push_str(&inline_to_html(inner));
                out.push_str("</em>");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strong_and_emphasis() {
        assert_eq!(
            inline_to_html(&parse_inline("نص **عريض** و*مائل*")),
            "نص <strong>عريض</strong> و<em>مائل</em>"
        );
        assert_eq!(
            inline_to_html(&parse_inline("**a *b* c**")),
            "<strong>a <em>b</em> c</strong>"
        );
    }

    #[test]
    fn unmatched_markers_are_literal() {
        assert_eq!(inline_to_html(&parse_inline("2 * 3 = 6")), "2 * 3 = 6");
        assert_eq!(inline_to_html(&parse_inline("**open")), "**open");
        assert_eq!(inline_to_html(&parse_inline("a <b>")), "a &lt;b&gt;");
    }
}
