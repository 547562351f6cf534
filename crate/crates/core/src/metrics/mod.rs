//! Text metrics: WER, CER, BLEU, ChrF and the MARS composite.
//!
//! Each metric comes in two layers. The `*_stats` functions return raw
//! counts that add up across a corpus ([`EditCounts`], [`BleuStats`],
//! [`ChrfStats`]); the score functions turn pooled counts into a number.
//! Corpus scores are therefore always computed from summed counts, never
//! from averaged per-pair scores.

mod bleu;
mod chrf;
mod edit;

pub use bleu::{bleu, bleu_stats, sentence_bleu, BleuStats, BLEU_MAX_ORDER};
pub use chrf::{chrf, chrf_stats, sentence_chrf, ChrfStats, CHRF_BETA, CHRF_MAX_ORDER};
pub use edit::{cer, cer_counts, levenshtein, wer, wer_counts, CharUnit, EditCounts};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{references} references but {hypotheses} hypotheses")]
    LengthMismatch {
        references: usize,
        hypotheses: usize,
    },
    #[error("score {0} outside [0, 100]")]
    OutOfRange(f64),
}

fn check_corpus(references: usize, hypotheses: usize) -> Result<(), MetricError> {
    if references != hypotheses {
        return Err(MetricError::LengthMismatch {
            references,
            hypotheses,
        });
    }
    if references == 0 {
        return Err(MetricError::EmptyCorpus);
    }
    Ok(())
}

/// MARS: the arithmetic mean of ChrF and TEDS, both on the 0–100 scale.
pub fn mars(chrf_score: f64, teds_score: f64) -> Result<f64, MetricError> {
    for s in [chrf_score, teds_score] {
        if !(0.0..=100.0).contains(&s) {
            return Err(MetricError::OutOfRange(s));
        }
    }
    Ok((chrf_score + teds_score) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mars_reproduces_printed_rows() {
        for (c, t, m) in [(87.77, 66.0, 76.885), (89.55, 52.0, 70.775), (80.26, 56.0, 68.13)] {
            assert!((mars(c, t).unwrap() - m).abs() < 5e-4, "{c} {t}");
        }
    }

    #[test]
    fn mars_rejects_out_of_range() {
        assert_eq!(mars(101.0, 3.0), Err(MetricError::OutOfRange(101.0)));
        assert!(mars(f64::NAN, 3.0).is_err());
        assert!(mars(50.0, -0.1).is_err());
    }

    proptest! {
        #[test]
        fn mars_monotone_and_idempotent(a in 0.0..=100.0f64, b in 0.0..=100.0f64, d in 0.0..=100.0f64) {
            prop_assert_eq!(mars(a, a).unwrap(), a);
            let a2 = (a + d).min(100.0);
            prop_assert!(mars(a2, b).unwrap() >= mars(a, b).unwrap());
            prop_assert!(mars(b, a2).unwrap() >= mars(b, a).unwrap());
        }
    }
}
