use std::collections::HashMap;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::{check_corpus, MetricError};

pub const BLEU_MAX_ORDER: usize = 4;

/// Clipped n-gram matches and totals for orders 1..=4, plus lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuStats {
    pub matches: [u64; BLEU_MAX_ORDER],
    pub totals: [u64; BLEU_MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl Add for BleuStats {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for BleuStats {
    fn add_assign(&mut self, rhs: Self) {
        for n in 0..BLEU_MAX_ORDER {
            self.matches[n] += rhs.matches[n];
            self.totals[n] += rhs.totals[n];
        }
        self.hyp_len += rhs.hyp_len;
        self.ref_len += rhs.ref_len;
    }
}

impl BleuStats {
    /// BLEU on the 0–100 scale.
    ///
    /// Zero unigram matches give 0. Any higher order with zero matches is
    /// smoothed to `(0 + 1) / (total + 1)`.
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches[0] == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        for n in 0..BLEU_MAX_ORDER {
            let (m, t) = (self.matches[n] as f64, self.totals[n] as f64);
            let p = if self.matches[n] > 0 {
                m / t
            } else {
                (m + 1.0) / (t + 1.0)
            };
            log_sum += p.ln();
        }
        let (c, r) = (self.hyp_len as f64, self.ref_len as f64);
        let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
        100.0 * bp * (log_sum / BLEU_MAX_ORDER as f64).exp()
    }
}

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], u64> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sufficient statistics for one pair, over whitespace tokens.
pub fn bleu_stats(reference: &str, hypothesis: &str) -> BleuStats {
    let r: Vec<&str> = reference.split_whitespace().collect();
    let h: Vec<&str> = hypothesis.split_whitespace().collect();
    let mut stats = BleuStats {
        hyp_len: h.len() as u64,
        ref_len: r.len() as u64,
        ..BleuStats::default()
    };
    for n in 1..=BLEU_MAX_ORDER {
        let ref_counts = ngram_counts(&r, n);
        let hyp_counts = ngram_counts(&h, n);
        stats.totals[n - 1] = hyp_counts.values().sum();
        stats.matches[n - 1] = hyp_counts
            .iter()
            .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
    }
    stats
}

/// Corpus BLEU: counts are pooled over all pairs before scoring.
pub fn bleu<R: AsRef<str>, H: AsRef<str>>(
    references: &[R],
    hypotheses: &[H],
) -> Result<f64, MetricError> {
    check_corpus(references.len(), hypotheses.len())?;
    let stats = references
        .iter()
        .zip(hypotheses)
        .map(|(r, h)| bleu_stats(r.as_ref(), h.as_ref()))
        .fold(BleuStats::default(), Add::add);
    Ok(stats.score())
}

pub fn sentence_bleu(reference: &str, hypothesis: &str) -> f64 {
    bleu_stats(reference, hypothesis).score()
}
