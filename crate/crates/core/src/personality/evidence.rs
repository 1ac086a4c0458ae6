use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::lexicon::EvidenceLexicon;
use super::TraitError;
use crate::pattern::CompiledMatcher;

pub const RATE_MIN: f64 = 1e-6;
pub const RATE_MAX: f64 = 1.0 - 1e-6;

/// Occurrence rate with half-count smoothing, kept strictly inside (0, 1).
pub fn smooth_rate(c: u32, n: u32) -> f64 {
    let x = (c as f64 + 0.5) / (n as f64 + 1.0);
    x.clamp(RATE_MIN, RATE_MAX)
}

pub fn logit(x: f64) -> f64 {
    libm::log(x / (1.0 - x))
}

pub fn logistic(y: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-y))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceVector {
    pub counts: Vec<u32>,
    pub n_tokens: u32,
    pub rates: Vec<f64>,
}

impl EvidenceVector {
    pub fn from_counts(counts: Vec<u32>, n_tokens: u32) -> Self {
        let rates = counts.iter().map(|&c| smooth_rate(c, n_tokens)).collect();
        EvidenceVector { counts, n_tokens, rates }
    }

    /// Logit-scale observations.
    pub fn logits(&self) -> Vec<f64> {
        self.rates.iter().map(|&x| logit(x)).collect()
    }
}

/// Evidence vectors of many users over one lexicon, with generating traits when synthetic.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingCorpus {
    pub users: Vec<EvidenceVector>,
    /// Per user, one value per catalog trait.
    pub theta: Option<Vec<Vec<f64>>>,
}

/// Maps each lexicon item to its pattern index in `matcher`.
pub fn bind_patterns(lexicon: &EvidenceLexicon, matcher: &CompiledMatcher) -> Result<Vec<u32>, TraitError> {
    lexicon
        .entries()
        .iter()
        .map(|e| matcher.pattern_index(&e.pattern_id).ok_or_else(|| TraitError::LexiconMismatch(e.pattern_id.clone())))
        .collect()
}

/// Counts matches of each item's pattern over the tokenized text.
pub fn extract_evidence(
    text: &str,
    lexicon: &EvidenceLexicon,
    matcher: &CompiledMatcher,
) -> Result<EvidenceVector, TraitError> {
    let binding = bind_patterns(lexicon, matcher)?;
    let tokens = matcher.intern_text(text);
    Ok(evidence_from_tokens(&tokens, &binding, matcher))
}

/// As [`extract_evidence`] with a precomputed binding and interned tokens.
pub fn evidence_from_tokens(tokens: &[u32], binding: &[u32], matcher: &CompiledMatcher) -> EvidenceVector {
    let mut per_pattern = vec![0u32; matcher.pattern_ids().len()];
    matcher.for_each_match(tokens, |h| per_pattern[h.pattern as usize] += 1);
    let counts = binding.iter().map(|&p| per_pattern[p as usize]).collect();
    EvidenceVector::from_counts(counts, tokens.len() as u32)
}
