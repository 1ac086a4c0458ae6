//! Lexicon, cue matcher and fitted model bundled for scoring free text.

use std::path::Path;

use rep_core::dialogue::Analyzer;
use rep_core::pattern::{compile, CompileOptions, CompiledMatcher, Lemmatizer};
use rep_core::personality::evidence::{bind_patterns, evidence_from_tokens};
use rep_core::personality::{EvidenceLexicon, EvidenceVector, TraitModel, TraitScore};

use crate::formats::{self, FormatError};

#[derive(Debug, Clone)]
pub struct TraitEngine {
    pub lexicon: EvidenceLexicon,
    pub matcher: CompiledMatcher,
    pub model: TraitModel,
    binding: Vec<u32>,
}

impl TraitEngine {
    pub fn new(lexicon: EvidenceLexicon, model: TraitModel) -> Result<Self, FormatError> {
        model.validate()?;
        model.check_lexicon(&lexicon)?;
        let matcher = compile(&lexicon.cue_patterns(), Lemmatizer::Rules, &CompileOptions::default())?;
        let binding = bind_patterns(&lexicon, &matcher)?;
        Ok(TraitEngine { lexicon, matcher, model, binding })
    }

    pub fn load(lexicon: &Path, model: &Path) -> Result<Self, FormatError> {
        let lexicon = formats::parse_lexicon(&formats::read_text(lexicon)?)?;
        let model = formats::parse_model(&formats::read_text(model)?)?;
        TraitEngine::new(lexicon, model)
    }

    /// Every trait at the prior, for running without a fitted model.
    pub fn prior() -> Self {
        TraitEngine::new(EvidenceLexicon::default(), TraitModel::empty(Vec::new())).unwrap()
    }

    pub fn evidence(&self, text: &str) -> EvidenceVector {
        evidence_from_tokens(&self.matcher.intern_text(text), &self.binding, &self.matcher)
    }

    /// All 35 traits in catalog order.
    pub fn score(&self, text: &str) -> Vec<(String, TraitScore)> {
        self.model.score(&self.evidence(text))
    }
}

impl Analyzer for TraitEngine {
    fn scores(&self, text: &str) -> Vec<(String, TraitScore)> {
        self.score(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rep_core::personality::{GeneratorSpec, SyntheticGenerator};

    #[test]
    fn scores_follow_cue_counts() {
        let g = SyntheticGenerator::random(&GeneratorSpec::strong(&["warmth"], 3), 2).unwrap();
        let e = TraitEngine::new(g.lexicon.clone(), g.model.clone()).unwrap();
        let warmth = |text: &str| e.score(text).into_iter().find(|(id, _)| id == "warmth").unwrap().1.theta;
        let none = warmth("f1 f2 f3 f4 f5 f6 f7 f8");
        let some = warmth("c0000 c0001 c0002 f4 f5 f6 f7 f8");
        assert!(some > none);
        assert_eq!(e.score("").len(), 35);
    }

    #[test]
    fn prior_engine_scores_zero() {
        let e = TraitEngine::prior();
        assert!(e.score("I love it!").iter().all(|(_, s)| s.theta == 0.0 && s.sd == 1.0));
    }
}
