use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LM_SCHEMA_VERSION: u32 = 1;

const BOS: u32 = 0;
const EOS: u32 = 1;
const UNK: u32 = 2;
const RESERVED: [&str; 3] = ["<s>", "</s>", "<unk>"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LmError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("text is empty")]
    EmptyText,
    #[error("order {0} outside 1..=6")]
    InvalidOrder(usize),
    #[error("smoothing constant {0} must be positive and finite")]
    InvalidSmoothing(f64),
    #[error("unsupported model schema version {0}")]
    Schema(u32),
    #[error("malformed model file: {0}")]
    Format(String),
}

/// What a symbol is.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LmUnit {
    #[default]
    Char,
    Word,
}

/// Add-k smoothed n-gram model over characters (or words).
///
/// Sequences are padded with `order - 1` begin symbols and one end symbol.
/// The predictable symbols are the training vocabulary, the end symbol and
/// an unknown symbol that stands for anything unseen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharNgramLm {
    schema_version: u32,
    order: usize,
    k: f64,
    unit: LmUnit,
    /// Symbol table; ids 0..3 are the begin, end and unknown markers.
    symbols: Vec<String>,
    #[serde(with = "count_table")]
    ngrams: HashMap<Vec<u32>, u64>,
    #[serde(with = "count_table")]
    contexts: HashMap<Vec<u32>, u64>,
}

mod count_table {
    use std::collections::HashMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &HashMap<Vec<u32>, u64>, s: S) -> Result<S::Ok, S::Error> {
        let mut rows: Vec<(&Vec<u32>, &u64)> = m.iter().collect();
        rows.sort();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<HashMap<Vec<u32>, u64>, D::Error> {
        let rows: Vec<(Vec<u32>, u64)> = Vec::deserialize(d)?;
        Ok(rows.into_iter().collect())
    }
}

fn check_params(order: usize, k: f64) -> Result<(), LmError> {
    if !(1..=6).contains(&order) {
        return Err(LmError::InvalidOrder(order));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(LmError::InvalidSmoothing(k));
    }
    Ok(())
}

fn split_units(text: &str, unit: LmUnit) -> Vec<String> {
    match unit {
        LmUnit::Char => text.chars().map(String::from).collect(),
        LmUnit::Word => text.split_whitespace().map(String::from).collect(),
    }
}

impl CharNgramLm {
    /// A model with no counts: every predictable symbol has the same
    /// probability `1 / (|vocab| + 2)`.
    pub fn untrained<I, S>(order: usize, k: f64, vocab: I) -> Result<Self, LmError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        check_params(order, k)?;
        let set: BTreeSet<String> = vocab.into_iter().map(Into::into).collect();
        let symbols = RESERVED
            .iter()
            .map(|s| s.to_string())
            .chain(set.into_iter().filter(|s| !RESERVED.contains(&s.as_str())))
            .collect();
        Ok(Self {
            schema_version: LM_SCHEMA_VERSION,
            order,
            k,
            unit: LmUnit::Char,
            symbols,
            ngrams: HashMap::new(),
            contexts: HashMap::new(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing_k(&self) -> f64 {
        self.k
    }

    pub fn unit(&self) -> LmUnit {
        self.unit
    }

    /// Training symbols, excluding the reserved markers.
    pub fn vocab(&self) -> &[String] {
        &self.symbols[RESERVED.len()..]
    }

    /// Number of symbols a prediction ranges over: vocabulary, end, unknown.
    pub fn outcome_count(&self) -> usize {
        self.symbols.len() - 1
    }

    fn id_map(&self) -> HashMap<&str, u32> {
        self.symbols
            .iter()
            .enumerate()
            .skip(RESERVED.len())
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect()
    }

    fn padded(&self, units: &[String], ids: &HashMap<&str, u32>) -> Vec<u32> {
        let mut seq = vec![BOS; self.order - 1];
        seq.extend(units.iter().map(|u| ids.get(u.as_str()).copied().unwrap_or(UNK)));
        seq.push(EOS);
        seq
    }

    /// Probability of symbol id `next` after `context` (the preceding
    /// `order - 1` ids).
    fn prob_ids(&self, context: &[u32], next: u32) -> f64 {
        let mut gram = context.to_vec();
        gram.push(next);
        let c = self.ngrams.get(&gram).copied().unwrap_or(0) as f64;
        let ctx = self.contexts.get(context).copied().unwrap_or(0) as f64;
        (c + self.k) / (ctx + self.k * self.outcome_count() as f64)
    }

    /// Conditional probability of `next` given the preceding symbols.
    /// Contexts shorter than `order - 1` are padded with begin markers;
    /// `None` as `next` asks for the end marker.
    pub fn prob(&self, context: &[&str], next: Option<&str>) -> f64 {
        let ids = self.id_map();
        let lookup = |s: &str| ids.get(s).copied().unwrap_or(UNK);
        let want = self.order - 1;
        let mut ctx: Vec<u32> = context.iter().rev().take(want).map(|s| lookup(s)).collect();
        ctx.resize(want, BOS);
        ctx.reverse();
        self.prob_ids(&ctx, next.map_or(EOS, lookup))
    }

    /// Probabilities for every predictable outcome after `context`, in
    /// symbol-table order (end marker, unknown, then vocabulary).
    pub fn distribution(&self, context: &[&str]) -> Vec<f64> {
        let mut out = vec![self.prob(context, None), self.prob(context, Some(RESERVED[2]))];
        out.extend(self.vocab().iter().map(|s| self.prob(context, Some(s))));
        out
    }

    /// Perplexity over the padded sequence, counting the end marker.
    pub fn perplexity(&self, text: &str) -> Result<f64, LmError> {
        let units = split_units(text, self.unit);
        if units.is_empty() {
            return Err(LmError::EmptyText);
        }
        Ok(self.perplexity_units(&units))
    }

    /// Like [`perplexity`](Self::perplexity) but defined for empty text,
    /// which scores only the end marker.
    pub fn perplexity_lenient(&self, text: &str) -> f64 {
        self.perplexity_units(&split_units(text, self.unit))
    }

    fn perplexity_units(&self, units: &[String]) -> f64 {
        let ids = self.id_map();
        let seq = self.padded(units, &ids);
        let ctx_len = self.order - 1;
        let n = seq.len() - ctx_len;
        let log_sum: f64 = (ctx_len..seq.len())
            .map(|i| self.prob_ids(&seq[i - ctx_len..i], seq[i]).ln())
            .sum();
        (-log_sum / n as f64).exp()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, LmError> {
        #[derive(Deserialize)]
        struct Header {
            schema_version: u32,
        }
        let header: Header =
            serde_json::from_str(s).map_err(|e| LmError::Format(e.to_string()))?;
        if header.schema_version != LM_SCHEMA_VERSION {
            return Err(LmError::Schema(header.schema_version));
        }
        let lm: Self = serde_json::from_str(s).map_err(|e| LmError::Format(e.to_string()))?;
        check_params(lm.order, lm.k)?;
        Ok(lm)
    }
}

/// Trains a character model.
pub fn train_lm<S: AsRef<str>>(corpus: &[S], order: usize, k: f64) -> Result<CharNgramLm, LmError> {
    train_lm_with_unit(corpus, order, k, LmUnit::Char)
}

pub fn train_lm_with_unit<S: AsRef<str>>(
    corpus: &[S],
    order: usize,
    k: f64,
    unit: LmUnit,
) -> Result<CharNgramLm, LmError> {
    check_params(order, k)?;
    if corpus.is_empty() {
        return Err(LmError::EmptyCorpus);
    }
    let docs: Vec<Vec<String>> = corpus.iter().map(|d| split_units(d.as_ref(), unit)).collect();
    let vocab: BTreeSet<&str> = docs.iter().flatten().map(String::as_str).collect();
    let mut lm = CharNgramLm::untrained(order, k, vocab)?;
    lm.unit = unit;
    let ids = lm.id_map();
    let mut ngrams: HashMap<Vec<u32>, u64> = HashMap::new();
    let mut contexts: HashMap<Vec<u32>, u64> = HashMap::new();
    for doc in &docs {
        let seq = lm.padded(doc, &ids);
        for gram in seq.windows(order) {
            *ngrams.entry(gram.to_vec()).or_insert(0) += 1;
            *contexts.entry(gram[..order - 1].to_vec()).or_insert(0) += 1;
        }
    }
    lm.ngrams = ngrams;
    lm.contexts = contexts;
    Ok(lm)
}
