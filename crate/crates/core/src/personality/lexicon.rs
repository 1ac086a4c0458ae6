use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::catalog::trait_index;
use super::TraitError;
use crate::pattern::PatternSource;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceEntry {
    pub evidence_id: String,
    pub trait_id: String,
    pub pattern_id: String,
    /// Human-readable cue; shipped lexicons use the pattern's DSL text here.
    pub cue: String,
}

/// Evidence items binding cue patterns to traits. Item order is the index
/// used by evidence vectors and models.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvidenceLexicon {
    entries: Vec<EvidenceEntry>,
}

impl EvidenceLexicon {
    pub fn new(entries: Vec<EvidenceEntry>) -> Result<Self, TraitError> {
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !seen.insert(e.evidence_id.as_str()) {
                return Err(TraitError::DuplicateEvidence(e.evidence_id.clone()));
            }
            if trait_index(&e.trait_id).is_none() {
                return Err(TraitError::UnknownTrait(e.trait_id.clone()));
            }
        }
        Ok(EvidenceLexicon { entries })
    }

    pub fn entries(&self) -> &[EvidenceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, evidence_id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.evidence_id == evidence_id)
    }

    /// Item indices loading on `trait_id`, in lexicon order.
    pub fn items_for(&self, trait_id: &str) -> Vec<usize> {
        self.entries.iter().enumerate().filter(|(_, e)| e.trait_id == trait_id).map(|(i, _)| i).collect()
    }

    /// One pattern per distinct pattern id, taking the cue as its DSL text.
    pub fn cue_patterns(&self) -> Vec<PatternSource> {
        let mut by_id: BTreeMap<&str, &str> = BTreeMap::new();
        for e in &self.entries {
            by_id.entry(&e.pattern_id).or_insert(&e.cue);
        }
        by_id.into_iter().map(|(id, cue)| PatternSource::new(id, cue)).collect()
    }
}
