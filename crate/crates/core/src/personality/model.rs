use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::catalog::TRAITS;
use super::evidence::{logit, EvidenceVector};
use super::lexicon::EvidenceLexicon;
use super::TraitError;

/// Parameters of one evidence item: logit-scale intercept, loading, residual variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItemParams {
    /// Index into [`TraitModel::evidence_ids`].
    pub item: usize,
    pub mu: f64,
    pub lambda: f64,
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitParams {
    pub trait_id: String,
    pub items: Vec<ItemParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraitScore {
    pub theta: f64,
    pub sd: f64,
    pub evidence_used: u32,
}

/// Posterior of a trait under a standard normal prior given logit observations.
pub fn posterior(items: &[ItemParams], y: &[f64]) -> (f64, f64) {
    let mut precision = 1.0;
    let mut num = 0.0;
    for p in items {
        precision += p.lambda * p.lambda / p.sigma2;
        num += p.lambda * (y[p.item] - p.mu) / p.sigma2;
    }
    (num / precision, 1.0 / precision)
}

pub fn infer_theta(params: &TraitParams, ev: &EvidenceVector) -> TraitScore {
    let y: Vec<f64> = ev.rates.iter().map(|&x| logit(x)).collect();
    let (theta, var) = posterior(&params.items, &y);
    let evidence_used = params.items.iter().filter(|p| ev.counts[p.item] > 0).count() as u32;
    TraitScore { theta, sd: libm::sqrt(var), evidence_used }
}

/// Per-trait parameters over a fixed evidence item order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitModel {
    pub evidence_ids: Vec<String>,
    /// One entry per catalog trait, in catalog order.
    pub traits: Vec<TraitParams>,
}

impl TraitModel {
    /// A model with no items: every trait scores at the prior.
    pub fn empty(evidence_ids: Vec<String>) -> Self {
        TraitModel {
            evidence_ids,
            traits: TRAITS.iter().map(|t| TraitParams { trait_id: t.id.into(), items: Vec::new() }).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), TraitError> {
        if self.traits.len() != TRAITS.len() || self.traits.iter().zip(TRAITS.iter()).any(|(p, t)| p.trait_id != t.id) {
            return Err(TraitError::Schema(String::from("traits must follow the catalog order")));
        }
        for t in &self.traits {
            for p in &t.items {
                let finite = p.mu.is_finite() && p.lambda.is_finite() && p.sigma2.is_finite();
                if p.item >= self.evidence_ids.len() || !finite || p.sigma2 <= 0.0 {
                    return Err(TraitError::Schema(alloc::format!("bad parameters in trait {}", t.trait_id)));
                }
            }
        }
        Ok(())
    }

    /// Checks that the model's items are exactly the lexicon's, in order.
    pub fn check_lexicon(&self, lexicon: &EvidenceLexicon) -> Result<(), TraitError> {
        let same = self.evidence_ids.len() == lexicon.len()
            && self.evidence_ids.iter().zip(lexicon.entries()).all(|(a, e)| *a == e.evidence_id);
        if same {
            Ok(())
        } else {
            Err(TraitError::Schema(String::from("model evidence ids differ from the lexicon")))
        }
    }

    pub fn trait_params(&self, trait_id: &str) -> Option<&TraitParams> {
        self.traits.iter().find(|t| t.trait_id == trait_id)
    }

    /// Scores all 35 traits, in catalog order.
    pub fn score(&self, ev: &EvidenceVector) -> Vec<(String, TraitScore)> {
        self.traits.iter().map(|t| (t.trait_id.clone(), infer_theta(t, ev))).collect()
    }
}
