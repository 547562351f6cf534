use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use super::MetricError;

/// Unit-cost Levenshtein distance between two sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[prefix..], &b[prefix..]);
    let suffix = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[..a.len() - suffix], &b[..b.len() - suffix]);
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    if b.len() <= 64 {
        bit_parallel(a, b)
    } else if a.len() <= 64 {
        bit_parallel(b, a)
    } else {
        levenshtein_row(a, b)
    }
}

/// Myers' bit-vector algorithm in Hyyrö's global-distance form; `b` is the
/// pattern and fits in one word.
fn bit_parallel<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let m = b.len();
    let high = 1u64 << (m - 1);
    let (mut pv, mut mv) = (!0u64, 0u64);
    let mut score = m;
    for x in a {
        let eq = b
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, y)| acc | (u64::from(x == y) << j));
        let xv = eq | mv;
        let xh = ((eq & pv).wrapping_add(pv) ^ pv) | eq;
        let mut ph = mv | !(xh | pv);
        let mut mh = pv & xh;
        if ph & high != 0 {
            score += 1;
        } else if mh & high != 0 {
            score -= 1;
        }
        ph = (ph << 1) | 1;
        mh <<= 1;
        pv = mh | !(xv | ph);
        mv = ph & xv;
    }
    score
}

/// Single-row dynamic program.
fn levenshtein_row<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0; b.len() + 1];
    for (j, slot) in row.iter_mut().enumerate() {
        *slot = j;
    }
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        let mut left = i + 1;
        row[0] = left;
        for (y, cell) in b.iter().zip(row[1..].iter_mut()) {
            let up = *cell;
            left = (diag + usize::from(x != y)).min(up + 1).min(left + 1);
            diag = up;
            *cell = left;
        }
    }
    row[b.len()]
}

/// Edit operations and reference length; sums across a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditCounts {
    pub edits: usize,
    pub reference_len: usize,
}

impl EditCounts {
    /// Edits per reference unit. May exceed 1.
    pub fn rate(&self) -> Result<f64, MetricError> {
        if self.reference_len == 0 {
            return Err(MetricError::EmptyReference);
        }
        Ok(self.edits as f64 / self.reference_len as f64)
    }
}

impl Add for EditCounts {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            edits: self.edits + rhs.edits,
            reference_len: self.reference_len + rhs.reference_len,
        }
    }
}

impl AddAssign for EditCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

/// What a "character" is for CER.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharUnit {
    /// Unicode scalar values; combining marks count individually.
    #[default]
    Codepoint,
    /// Extended grapheme clusters.
    Grapheme,
}

pub fn cer_counts(reference: &str, hypothesis: &str, unit: CharUnit) -> EditCounts {
    match unit {
        CharUnit::Codepoint => {
            let r: Vec<char> = reference.chars().collect();
            let h: Vec<char> = hypothesis.chars().collect();
            EditCounts {
                edits: levenshtein(&r, &h),
                reference_len: r.len(),
            }
        }
        CharUnit::Grapheme => {
            let r: Vec<&str> = reference.graphemes(true).collect();
            let h: Vec<&str> = hypothesis.graphemes(true).collect();
            EditCounts {
                edits: levenshtein(&r, &h),
                reference_len: r.len(),
            }
        }
    }
}

/// Character error rate over codepoints.
pub fn cer(reference: &str, hypothesis: &str) -> Result<f64, MetricError> {
    cer_counts(reference, hypothesis, CharUnit::Codepoint).rate()
}

pub fn wer_counts(reference: &str, hypothesis: &str) -> EditCounts {
    let r: Vec<&str> = reference.split_whitespace().collect();
    let h: Vec<&str> = hypothesis.split_whitespace().collect();
    EditCounts {
        edits: levenshtein(&r, &h),
        reference_len: r.len(),
    }
}

/// Word error rate over whitespace tokens. Unbounded above.
pub fn wer(reference: &str, hypothesis: &str) -> Result<f64, MetricError> {
    wer_counts(reference, hypothesis).rate()
}
