//! Trait evidence, the per-trait latent factor model, and its reliability.

pub mod alpha;
pub mod catalog;
pub mod em;
pub mod evidence;
pub mod lexicon;
pub mod model;
pub mod reliability;
pub mod synth;

use alloc::string::String;

pub use alpha::cronbach_alpha;
pub use catalog::{trait_index, TraitInfo, TRAITS};
pub use em::{fit_factor, fit_trait, mean_loglik, pca_init, EmOptions, FactorFit, FactorParams, FitReport, Matrix};
pub use evidence::{extract_evidence, logistic, logit, smooth_rate, EvidenceVector, TrainingCorpus};
pub use lexicon::{EvidenceEntry, EvidenceLexicon};
pub use model::{infer_theta, posterior, ItemParams, TraitModel, TraitParams, TraitScore};
pub use reliability::{reliability_curve, split_half_alpha, ReliabilityPoint};
pub use synth::{GeneratorSpec, SyntheticCorpus, SyntheticGenerator};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraitError {
    #[error("pattern `{0}` is not in the matcher")]
    LexiconMismatch(String),
    #[error("duplicate evidence id `{0}`")]
    DuplicateEvidence(String),
    #[error("unknown trait `{0}`")]
    UnknownTrait(String),
    #[error("invalid model: {0}")]
    Schema(String),
    #[error("need at least two users, got {0}")]
    TooFewUsers(usize),
    #[error("alpha needs at least two users and two items, got {users} x {items}")]
    TooFewForAlpha { users: usize, items: usize },
    #[error("alpha is undefined when total scores do not vary")]
    UndefinedAlpha,
}
