use std::collections::HashMap;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::{check_corpus, MetricError};

pub const CHRF_MAX_ORDER: usize = 6;
pub const CHRF_BETA: f64 = 2.0;

/// Character n-gram matches and totals for orders 1..=6.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChrfStats {
    pub matches: [u64; CHRF_MAX_ORDER],
    pub hyp_totals: [u64; CHRF_MAX_ORDER],
    pub ref_totals: [u64; CHRF_MAX_ORDER],
}

impl Add for ChrfStats {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for ChrfStats {
    fn add_assign(&mut self, rhs: Self) {
        for n in 0..CHRF_MAX_ORDER {
            self.matches[n] += rhs.matches[n];
            self.hyp_totals[n] += rhs.hyp_totals[n];
            self.ref_totals[n] += rhs.ref_totals[n];
        }
    }
}

impl ChrfStats {
    /// ChrF on the 0–100 scale: precision and recall are averaged over the
    /// orders that occur on either side, then combined as F-beta.
    ///
    /// Orders with no n-grams on either side are skipped, so two identical
    /// short strings still score 100. Two empty sides score 100.
    pub fn score(&self) -> f64 {
        let (mut p_sum, mut r_sum, mut orders) = (0.0, 0.0, 0u32);
        for n in 0..CHRF_MAX_ORDER {
            let (m, h, r) = (self.matches[n], self.hyp_totals[n], self.ref_totals[n]);
            if h == 0 && r == 0 {
                continue;
            }
            orders += 1;
            if h > 0 {
                p_sum += m as f64 / h as f64;
            }
            if r > 0 {
                r_sum += m as f64 / r as f64;
            }
        }
        if orders == 0 {
            return 100.0;
        }
        let (p, r) = (p_sum / orders as f64, r_sum / orders as f64);
        let beta2 = CHRF_BETA * CHRF_BETA;
        let denom = beta2 * p + r;
        if denom == 0.0 {
            return 0.0;
        }
        100.0 * (1.0 + beta2) * p * r / denom
    }
}

fn char_ngrams(chars: &[char], n: usize) -> HashMap<&[char], u64> {
    let mut counts = HashMap::new();
    for gram in chars.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sufficient statistics for one pair. Whitespace is removed first.
pub fn chrf_stats(reference: &str, hypothesis: &str) -> ChrfStats {
    let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    let h: Vec<char> = hypothesis.chars().filter(|c| !c.is_whitespace()).collect();
    let mut stats = ChrfStats::default();
    for n in 1..=CHRF_MAX_ORDER {
        let rc = char_ngrams(&r, n);
        let hc = char_ngrams(&h, n);
        stats.ref_totals[n - 1] = rc.values().sum();
        stats.hyp_totals[n - 1] = hc.values().sum();
        stats.matches[n - 1] = hc
            .iter()
            .map(|(g, &c)| c.min(rc.get(g).copied().unwrap_or(0)))
            .sum();
    }
    stats
}

/// Corpus ChrF with pooled n-gram counts.
pub fn chrf<R: AsRef<str>, H: AsRef<str>>(
    references: &[R],
    hypotheses: &[H],
) -> Result<f64, MetricError> {
    check_corpus(references.len(), hypotheses.len())?;
    let stats = references
        .iter()
        .zip(hypotheses)
        .map(|(r, h)| chrf_stats(r.as_ref(), h.as_ref()))
        .fold(ChrfStats::default(), Add::add);
    Ok(stats.score())
}

pub fn sentence_chrf(reference: &str, hypothesis: &str) -> f64 {
    chrf_stats(reference, hypothesis).score()
}
