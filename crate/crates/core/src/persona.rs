//! Persona-consistent rendering of response templates.
//!
//! Every template carries authored alternatives; a persona scores each one with
//! surface cue detectors and keeps the best, breaking exact ties with a seeded draw.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::text::{sentences, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueClass {
    Emoticon,
    Exclamation,
    FirstPersonAffective,
    QuestionForm,
    SuggestionForm,
    ThirdPersonDeclarative,
    Terse,
    AssertionForm,
}

impl CueClass {
    pub const ALL: [CueClass; 8] = [
        CueClass::Emoticon,
        CueClass::Exclamation,
        CueClass::FirstPersonAffective,
        CueClass::QuestionForm,
        CueClass::SuggestionForm,
        CueClass::ThirdPersonDeclarative,
        CueClass::Terse,
        CueClass::AssertionForm,
    ];
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PersonaError {
    #[error("persona {0}: weights must be finite with at least one positive")]
    BadWeights(String),
    #[error("template {template}: no value for slot `{slot}`")]
    MissingSlot { template: String, slot: String },
    #[error("template {0}: alternatives use different slots")]
    SlotMismatch(String),
    #[error("template {0} has no alternatives")]
    EmptyTemplate(String),
    #[error("template {0}: unterminated slot")]
    BadSlot(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Persona {
    pub name: String,
    #[serde(default)]
    pub avatar: String,
    #[serde(default)]
    pub descriptors: Vec<String>,
    pub weights: BTreeMap<CueClass, f64>,
}

impl Persona {
    pub fn validate(&self) -> Result<(), PersonaError> {
        let finite = self.weights.values().all(|w| w.is_finite());
        if !finite || !self.weights.values().any(|&w| w > 0.0) {
            return Err(PersonaError::BadWeights(self.name.clone()));
        }
        Ok(())
    }

    fn weight(&self, c: CueClass) -> f64 {
        self.weights.get(&c).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseTemplate {
    pub id: String,
    pub alternatives: Vec<String>,
}

const FIRST_PERSON: &[&str] = &["i", "i'm", "i've", "i'd", "i'll", "me", "my", "mine", "myself", "we", "we're", "us", "our"];

const AFFECT: &[&str] = &[
    "love", "loved", "like", "enjoy", "enjoyed", "happy", "glad", "excited", "cry", "hope", "feel", "felt", "wonderful",
    "great", "fun", "thrilled", "sad", "miss", "delighted", "adore", "amazing", "lovely", "curious", "sorry",
];

const SUGGESTION_STARTS: &[&[&str]] = &[
    &["let's"],
    &["let", "us"],
    &["how", "about"],
    &["why", "not"],
    &["you", "could"],
    &["you", "might"],
    &["maybe"],
    &["perhaps"],
    &["shall", "we"],
    &["would", "you", "like"],
    &["feel", "free"],
];

const THIRD_PERSON_STARTS: &[&str] = &["it", "it's", "this", "that", "that's", "he", "she", "they", "there", "the"];

/// Counts of each cue class in `text`. Terse is the negated word count.
pub fn cue_counts(text: &str) -> BTreeMap<CueClass, f64> {
    let mut counts: BTreeMap<CueClass, f64> = CueClass::ALL.iter().map(|&c| (c, 0.0)).collect();
    let mut bump = |c: CueClass, by: f64| *counts.get_mut(&c).unwrap() += by;
    let mut words = 0usize;
    for s in sentences(text) {
        let ws: Vec<&str> = s.iter().filter(|t| t.kind == TokenKind::Word).map(|t| t.text.as_str()).collect();
        words += ws.len();
        let emoticons = s.iter().filter(|t| t.kind == TokenKind::Emoticon).count();
        bump(CueClass::Emoticon, emoticons as f64);
        let terminal = terminal_of(&s);
        if terminal.contains('!') {
            bump(CueClass::Exclamation, 1.0);
        }
        if terminal.contains('?') {
            bump(CueClass::QuestionForm, 1.0);
        }
        if ws.iter().any(|w| FIRST_PERSON.contains(w)) && ws.iter().any(|w| AFFECT.contains(w)) {
            bump(CueClass::FirstPersonAffective, 1.0);
        }
        if SUGGESTION_STARTS.iter().any(|p| ws.len() >= p.len() && ws[..p.len()] == **p) {
            bump(CueClass::SuggestionForm, 1.0);
        }
        if terminal == "." {
            bump(CueClass::AssertionForm, 1.0);
            if ws.first().is_some_and(|w| THIRD_PERSON_STARTS.contains(w)) {
                bump(CueClass::ThirdPersonDeclarative, 1.0);
            }
        }
    }
    bump(CueClass::Terse, -(words as f64));
    counts
}

/// Terminal punctuation of a sentence, e.g. "." or "!!" or "?!"; empty if none.
fn terminal_of(s: &[Token]) -> String {
    let mut out = String::new();
    for t in s.iter().rev() {
        match t.kind {
            TokenKind::Emoticon => continue,
            TokenKind::Punct if matches!(t.text.as_str(), "." | "!" | "?") => out.insert_str(0, &t.text),
            _ => break,
        }
    }
    out
}

pub fn style_score(text: &str, persona: &Persona) -> f64 {
    cue_counts(text).into_iter().map(|(c, n)| persona.weight(c) * n).sum()
}

/// Slot names of a template text, `{name}` delimited.
pub fn slots_of(text: &str) -> Result<BTreeSet<String>, ()> {
    let mut out = BTreeSet::new();
    let mut rest = text;
    while let Some(i) = rest.find('{') {
        let after = &rest[i + 1..];
        let j = after.find('}').ok_or(())?;
        out.insert(String::from(&after[..j]));
        rest = &after[j + 1..];
    }
    Ok(out)
}

impl ResponseTemplate {
    pub fn new(id: impl Into<String>, alternatives: Vec<String>) -> Result<Self, PersonaError> {
        let t = ResponseTemplate { id: id.into(), alternatives };
        t.slots()?;
        Ok(t)
    }

    /// The slot set shared by all alternatives.
    pub fn slots(&self) -> Result<BTreeSet<String>, PersonaError> {
        let first = self.alternatives.first().ok_or_else(|| PersonaError::EmptyTemplate(self.id.clone()))?;
        let bad = || PersonaError::BadSlot(self.id.clone());
        let slots = slots_of(first).map_err(|_| bad())?;
        for alt in &self.alternatives[1..] {
            if slots_of(alt).map_err(|_| bad())? != slots {
                return Err(PersonaError::SlotMismatch(self.id.clone()));
            }
        }
        Ok(slots)
    }
}

fn fill(template: &ResponseTemplate, text: &str, slots: &BTreeMap<String, String>) -> Result<String, PersonaError> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        let after = &rest[i + 1..];
        let j = after.find('}').ok_or_else(|| PersonaError::BadSlot(template.id.clone()))?;
        let name = &after[..j];
        let v = slots
            .get(name)
            .ok_or_else(|| PersonaError::MissingSlot { template: template.id.clone(), slot: String::from(name) })?;
        out.push_str(v);
        rest = &after[j + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Index of the alternative `persona` renders: best style score, exact ties by a seeded draw.
pub fn choose(template: &ResponseTemplate, persona: &Persona, seed: u64) -> usize {
    let scores: Vec<f64> = template.alternatives.iter().map(|a| style_score(a, persona)).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == best).collect();
    if tied.len() == 1 {
        return tied[0];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    tied[rng.random_range(0..tied.len())]
}

pub fn render(
    template: &ResponseTemplate,
    persona: &Persona,
    slots: &BTreeMap<String, String>,
    seed: u64,
) -> Result<String, PersonaError> {
    if template.alternatives.is_empty() {
        return Err(PersonaError::EmptyTemplate(template.id.clone()));
    }
    let i = choose(template, persona, seed);
    fill(template, &template.alternatives[i], slots)
}
