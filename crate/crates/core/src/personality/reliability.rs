use alloc::string::String;
use alloc::vec::Vec;

use super::alpha::cronbach_alpha;
use super::evidence::{bind_patterns, evidence_from_tokens, EvidenceVector};
use super::lexicon::EvidenceLexicon;
use super::model::{TraitModel, TraitParams};
use super::synth::SyntheticGenerator;
use super::TraitError;
use crate::pattern::CompiledMatcher;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityPoint {
    pub words: u32,
    /// None where alpha is undefined, e.g. no text at all.
    pub alpha: Option<f64>,
}

/// Standardized contribution of every trait item to the posterior mean.
pub fn contributions(params: &TraitParams, ev: &EvidenceVector) -> Vec<f64> {
    let y = ev.logits();
    params.items.iter().map(|p| p.lambda * (y[p.item] - p.mu) / p.sigma2).collect()
}

/// Split-half alpha: items alternate between two halves whose summed
/// contributions form a two-column score matrix.
pub fn split_half_alpha(params: &TraitParams, evidence: &[EvidenceVector]) -> Result<f64, TraitError> {
    if params.items.len() < 2 {
        return Err(TraitError::TooFewForAlpha { users: evidence.len(), items: params.items.len() });
    }
    let rows: Vec<Vec<f64>> = evidence
        .iter()
        .map(|ev| {
            let mut halves = alloc::vec![0.0, 0.0];
            for (k, z) in contributions(params, ev).into_iter().enumerate() {
                halves[k % 2] += z;
            }
            halves
        })
        .collect();
    cronbach_alpha(&rows)
}

/// Alpha of one trait's evidence on generated texts of each length, in input order.
/// Texts go through the matcher so the curve reflects the whole extraction path.
#[allow(clippy::too_many_arguments)]
pub fn reliability_curve(
    model: &TraitModel,
    trait_id: &str,
    lexicon: &EvidenceLexicon,
    matcher: &CompiledMatcher,
    generator: &SyntheticGenerator,
    users: usize,
    word_counts: &[u32],
    seed: u64,
) -> Result<Vec<ReliabilityPoint>, TraitError> {
    model.check_lexicon(lexicon)?;
    let params = model.trait_params(trait_id).ok_or_else(|| TraitError::UnknownTrait(String::from(trait_id)))?;
    let binding = bind_patterns(lexicon, matcher)?;
    let mut out = Vec::with_capacity(word_counts.len());
    for (i, &words) in word_counts.iter().enumerate() {
        let sample = generator.generate(users, words, seed.wrapping_add(i as u64), true);
        let evidence: Vec<EvidenceVector> = sample
            .texts
            .iter()
            .map(|t| evidence_from_tokens(&matcher.intern_text(t), &binding, matcher))
            .collect();
        let alpha = match split_half_alpha(params, &evidence) {
            Ok(a) => Some(a),
            Err(TraitError::UndefinedAlpha) => None,
            Err(e) => return Err(e),
        };
        out.push(ReliabilityPoint { words, alpha });
    }
    Ok(out)
}
