//! Token interning and the input alphabet of a compiled matcher.
//!
//! Interned ids are laid out as
//!
//! ```text
//! [0, 2^R)            out-of-vocabulary signatures; bit r set iff regex r matches the lemma (0 = UNK)
//! [2^R, 2^R + L)      lemma vocabulary
//! [2^R + L, ..)       literal vocabulary (surface forms)
//! ```
//!
//! Every id maps to an alphabet column: the equivalence class of tokens that
//! satisfy exactly the same edge labels. Column 0 holds tokens that satisfy no
//! label, so only wildcard edges fire on it.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;
use regex_automata::meta::Regex;
use rustc_hash::FxBuildHasher;

use super::lemma::Lemmatizer;

pub type TokenId = u32;
pub type FxMap<K, V> = HashMap<K, V, FxBuildHasher>;

/// Reserved id for tokens outside the vocabulary that match no regex.
pub const UNK: TokenId = 0;

/// Compiles `src` anchored to a whole token.
pub fn compile_token_regex(src: &str) -> Result<Regex, String> {
    let mut anchored = String::from("^(?:");
    anchored.push_str(src);
    anchored.push_str(")$");
    Regex::new(&anchored).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Signature,
    Lemma,
    Literal,
}

/// Bijection between token strings and dense ids; immutable once built.
#[derive(Debug, Clone)]
pub struct TokenInterner {
    lemmatizer: Lemmatizer,
    regex_sources: Vec<String>,
    regexes: Vec<Regex>,
    lemmas: Vec<String>,
    literals: Vec<String>,
    lemma_ids: FxMap<String, TokenId>,
    literal_ids: FxMap<String, TokenId>,
}

impl Eq for TokenInterner {}

impl PartialEq for TokenInterner {
    fn eq(&self, other: &Self) -> bool {
        self.lemmatizer == other.lemmatizer
            && self.regex_sources == other.regex_sources && self.lemmas == other.lemmas && self.literals == other.literals
    }
}

impl TokenInterner {
    /// `lemmas` and `literals` must be sorted and free of duplicates.
    pub fn new(
        lemmatizer: Lemmatizer,
        regex_sources: Vec<String>,
        lemmas: Vec<String>,
        literals: Vec<String>,
    ) -> Result<Self, String> {
        let regexes = regex_sources.iter().map(|s| compile_token_regex(s)).collect::<Result<Vec<_>, _>>()?;
        let sig = 1u32 << regex_sources.len();
        let lemma_ids = lemmas.iter().enumerate().map(|(i, l)| (l.clone(), sig + i as u32)).collect();
        let base = sig + lemmas.len() as u32;
        let literal_ids = literals.iter().enumerate().map(|(i, l)| (l.clone(), base + i as u32)).collect();
        Ok(TokenInterner { lemmatizer, regex_sources, regexes, lemmas, literals, lemma_ids, literal_ids })
    }

    pub fn lemmatizer(&self) -> Lemmatizer {
        self.lemmatizer
    }

    pub fn signature_count(&self) -> u32 {
        1 << self.regexes.len()
    }

    pub fn len(&self) -> usize {
        self.signature_count() as usize + self.lemmas.len() + self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn regex_sources(&self) -> &[String] {
        &self.regex_sources
    }

    pub fn lemmas(&self) -> &[String] {
        &self.lemmas
    }

    pub fn literals(&self) -> &[String] {
        &self.literals
    }

    pub fn lemma_id(&self, lemma: &str) -> Option<TokenId> {
        self.lemma_ids.get(lemma).copied()
    }

    pub fn literal_id(&self, word: &str) -> Option<TokenId> {
        self.literal_ids.get(word).copied()
    }

    /// Bitmask of the regexes matching `lemma`.
    pub fn regex_signature(&self, lemma: &str) -> u32 {
        self.regexes
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_match(lemma))
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }

    /// Interns one lowercased surface token.
    pub fn intern(&self, surface: &str) -> TokenId {
        if let Some(id) = self.literal_ids.get(surface) {
            return *id;
        }
        let lemma = self.lemmatizer.lemma(surface);
        if let Some(id) = self.lemma_ids.get(&lemma) {
            return *id;
        }
        self.regex_signature(&lemma)
    }

    pub fn intern_all<S: AsRef<str>>(&self, surfaces: &[S]) -> Vec<TokenId> {
        surfaces.iter().map(|s| self.intern(s.as_ref())).collect()
    }

    pub fn kind(&self, id: TokenId) -> Option<EntryKind> {
        let sig = self.signature_count();
        let id = id as usize;
        if id < sig as usize {
            Some(EntryKind::Signature)
        } else if id < sig as usize + self.lemmas.len() {
            Some(EntryKind::Lemma)
        } else if id < self.len() {
            Some(EntryKind::Literal)
        } else {
            None
        }
    }

    /// Display string of an id; signatures render as `<unk>` or `<re:mask>`.
    pub fn resolve(&self, id: TokenId) -> Option<String> {
        let sig = self.signature_count() as usize;
        let i = id as usize;
        match self.kind(id)? {
            EntryKind::Signature if i == 0 => Some("<unk>".to_string()),
            EntryKind::Signature => Some(alloc::format!("<re:{i:b}>")),
            EntryKind::Lemma => Some(self.lemmas[i - sig].clone()),
            EntryKind::Literal => Some(self.literals[i - sig - self.lemmas.len()].clone()),
        }
    }

    /// Lemma string carried by an id, used when evaluating lemma-level predicates.
    pub(crate) fn lemma_of(&self, id: TokenId) -> Option<String> {
        match self.kind(id)? {
            EntryKind::Signature => None,
            EntryKind::Lemma => self.resolve(id),
            EntryKind::Literal => self.resolve(id).map(|s| self.lemmatizer.lemma(&s)),
        }
    }
}

/// Retracted alternatives: class token id to its member token ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassTable {
    classes: Vec<Box<[TokenId]>>,
}

impl ClassTable {
    pub fn new(classes: Vec<Vec<TokenId>>) -> Self {
        ClassTable {
            classes: classes
                .into_iter()
                .map(|mut m| {
                    m.sort_unstable();
                    m.dedup();
                    m.into_boxed_slice()
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn members(&self, class: u32) -> &[TokenId] {
        &self.classes[class as usize]
    }

    pub fn contains(&self, class: u32, token: TokenId) -> bool {
        self.members(class).binary_search(&token).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[TokenId]> {
        self.classes.iter().map(|c| &**c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn interner() -> TokenInterner {
        TokenInterner::new(
            Lemmatizer::Rules,
            vec!["\\d+".into(), "[0-9]{4}".into()],
            vec!["decision".into(), "make".into()],
            vec!["will".into()],
        )
        .unwrap()
    }

    #[test]
    fn layout_and_lookup() {
        let i = interner();
        assert_eq!(i.signature_count(), 4);
        assert_eq!(i.intern("decisions"), 4);
        assert_eq!(i.intern("making"), 5);
        assert_eq!(i.intern("will"), 6);
        assert_eq!(i.intern("zebra"), UNK);
        assert_eq!(i.intern("42"), 1);
        assert_eq!(i.intern("2016"), 3);
        assert_eq!(i.resolve(5).as_deref(), Some("make"));
        assert_eq!(i.resolve(0).as_deref(), Some("<unk>"));
        assert_eq!(i.resolve(7), None);
    }

    #[test]
    fn class_membership() {
        let t = ClassTable::new(vec![vec![9, 3, 5, 3]]);
        assert_eq!(t.members(0), &[3, 5, 9]);
        assert!(t.contains(0, 5));
        assert!(!t.contains(0, 4));
    }
}
