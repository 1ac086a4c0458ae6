//! Thompson-style NFA built from an element trie with hash-consed suffixes,
//! plus the alphabet partition the DFA runs over.

use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hash;

use super::ast::Element;
use super::rewrite::RewrittenPattern;
use super::symbols::{ClassTable, EntryKind, FxMap, TokenId, TokenInterner};

/// Edge label for "any token".
pub const WILD: u32 = u32::MAX;

/// Predicate a labeled edge tests on one interned token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Lemma(TokenId),
    Literal(TokenId),
    Class(u32),
    Regex(u32),
}

#[derive(Debug, Clone, Default)]
pub struct Nfa {
    pub start: u32,
    pub eps: Vec<Vec<u32>>,
    /// `(label index or WILD, target)`
    pub edges: Vec<Vec<(u32, u32)>>,
    /// Original pattern indices accepted on reaching the state.
    pub accept: Vec<Vec<u32>>,
    pub labels: Vec<Label>,
}

impl Nfa {
    pub fn state_count(&self) -> usize {
        self.eps.len()
    }

    fn add_state(&mut self) -> u32 {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.accept.push(Vec::new());
        (self.eps.len() - 1) as u32
    }
}

struct Trie<K> {
    children: Vec<Vec<(K, u32)>>,
    labels: Vec<Vec<u32>>,
    index: FxMap<(u32, K), u32>,
}

impl<K: Clone + Eq + Hash + Ord> Trie<K> {
    fn new() -> Self {
        Trie { children: vec![Vec::new()], labels: vec![Vec::new()], index: FxMap::default() }
    }

    fn add_node(&mut self) -> u32 {
        self.children.push(Vec::new());
        self.labels.push(Vec::new());
        (self.children.len() - 1) as u32
    }

    fn insert(&mut self, seq: &[K], labels: &[u32], share: bool) {
        let mut node = 0u32;
        for k in seq {
            if share {
                if let Some(&n) = self.index.get(&(node, k.clone())) {
                    node = n;
                    continue;
                }
            }
            let n = self.add_node();
            self.children[node as usize].push((k.clone(), n));
            if share {
                self.index.insert((node, k.clone()), n);
            }
            node = n;
        }
        self.labels[node as usize].extend_from_slice(labels);
    }

    /// Merges identical subtries. Returns the canonical representative of every node.
    fn hash_cons(&mut self) -> Vec<u32> {
        let n = self.children.len();
        let mut canon: Vec<u32> = (0..n as u32).collect();
        let mut seen: FxMap<(Vec<(K, u32)>, Vec<u32>), u32> = FxMap::default();
        // children always have larger indices than their parent
        for v in (0..n).rev() {
            let mut kids: Vec<(K, u32)> =
                self.children[v].iter().map(|(k, c)| (k.clone(), canon[*c as usize])).collect();
            kids.sort();
            let mut labels = self.labels[v].clone();
            labels.sort_unstable();
            labels.dedup();
            let key = (kids, labels);
            canon[v] = *seen.entry(key).or_insert(v as u32);
        }
        canon
    }
}

struct Builder<'a> {
    nfa: Nfa,
    label_ids: FxMap<Label, u32>,
    interner: &'a TokenInterner,
}

impl Builder<'_> {
    fn label(&mut self, l: Label) -> u32 {
        let next = self.nfa.labels.len() as u32;
        *self.label_ids.entry(l).or_insert_with(|| {
            self.nfa.labels.push(l);
            next
        })
    }

    fn lemma(&mut self, lemma: &str) -> u32 {
        let id = self.interner.lemma_id(lemma).expect("lemma vocabulary covers every pattern token");
        self.label(Label::Lemma(id))
    }

    fn edge(&mut self, from: u32, label: u32, to: u32) {
        self.nfa.edges[from as usize].push((label, to));
    }

    fn eps(&mut self, from: u32, to: u32) {
        self.nfa.eps[from as usize].push(to);
    }

    fn element(&mut self, u: u32, e: &Element, v: u32) {
        match e {
            Element::Token(t) => {
                let l = self.lemma(t);
                self.edge(u, l, v);
            }
            Element::Literal(words) => {
                let mut cur = u;
                for (i, w) in words.iter().enumerate() {
                    let id = self.interner.literal_id(w).expect("literal vocabulary covers every literal");
                    let l = self.label(Label::Literal(id));
                    let next = if i + 1 == words.len() { v } else { self.nfa.add_state() };
                    self.edge(cur, l, next);
                    cur = next;
                }
            }
            Element::AnyOne => self.edge(u, WILD, v),
            Element::Gap { min, max: Some(max) } => {
                let mut cur = u;
                for i in 0..*max {
                    if i >= *min {
                        self.eps(cur, v);
                    }
                    let next = if i + 1 == *max { v } else { self.nfa.add_state() };
                    self.edge(cur, WILD, next);
                    cur = next;
                }
                if *max == 0 {
                    self.eps(u, v);
                }
            }
            Element::Gap { min, max: None } => {
                let mut cur = u;
                for _ in 0..*min {
                    let next = self.nfa.add_state();
                    self.edge(cur, WILD, next);
                    cur = next;
                }
                // fresh loop state so the self-loop never leaks onto shared trie nodes
                let lp = self.nfa.add_state();
                self.eps(cur, lp);
                self.edge(lp, WILD, lp);
                self.eps(lp, v);
            }
            Element::Alternatives(members) => self.alternatives(u, members, v),
            Element::Regex(src) => {
                let r = self
                    .interner
                    .regex_sources()
                    .iter()
                    .position(|s| s == src)
                    .expect("regex table covers every pattern regex");
                let l = self.label(Label::Regex(r as u32));
                self.edge(u, l, v);
            }
            Element::Class(c) => {
                let l = self.label(Label::Class(*c));
                self.edge(u, l, v);
            }
        }
    }

    fn alternatives(&mut self, u: u32, members: &[Vec<alloc::string::String>], v: u32) {
        let mut trie = Trie::new();
        for m in members {
            trie.insert(m, &[1], true);
        }
        let canon = trie.hash_cons();
        let n = canon.len();
        let mut state: Vec<Option<u32>> = vec![None; n];
        state[0] = Some(u);
        for i in 0..n {
            if canon[i] as usize != i {
                continue;
            }
            if i != 0 && trie.children[i].is_empty() {
                state[i] = Some(v);
            } else if state[i].is_none() {
                state[i] = Some(self.nfa.add_state());
            }
        }
        for i in 0..n {
            if canon[i] as usize != i {
                continue;
            }
            let s = state[i].unwrap();
            if s != v && !trie.labels[i].is_empty() {
                self.eps(s, v);
            }
            for (tok, child) in trie.children[i].clone() {
                let t = state[canon[child as usize] as usize].unwrap();
                let l = self.lemma(&tok);
                self.edge(s, l, t);
            }
        }
    }
}

/// Builds the NFA. With `share`, patterns share trie prefixes and identical suffixes.
pub fn build_nfa(patterns: &[RewrittenPattern], interner: &TokenInterner, share: bool) -> Nfa {
    let mut trie: Trie<Element> = Trie::new();
    for p in patterns {
        trie.insert(&p.ast.elements, &p.labels, share);
    }
    let canon = if share { trie.hash_cons() } else { (0..trie.children.len() as u32).collect() };
    let mut b = Builder { nfa: Nfa::default(), label_ids: FxMap::default(), interner };
    let n = canon.len();
    let mut state = vec![u32::MAX; n];
    for i in 0..n {
        if canon[i] as usize == i {
            state[i] = b.nfa.add_state();
        }
    }
    b.nfa.start = state[0];
    for i in 0..n {
        if canon[i] as usize != i {
            continue;
        }
        let s = state[i];
        let mut labels = trie.labels[i].clone();
        labels.sort_unstable();
        labels.dedup();
        b.nfa.accept[s as usize] = labels;
        let kids = core::mem::take(&mut trie.children[i]);
        for (e, child) in &kids {
            let t = state[canon[*child as usize] as usize];
            b.element(s, e, t);
        }
    }
    b.nfa
}

/// Partition of interned token ids into columns of identical label behaviour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    pub col_of: Vec<u32>,
    pub n_cols: u32,
    /// Columns whose tokens satisfy each label (indexed like `Nfa::labels`).
    pub label_cols: Vec<Vec<u32>>,
}

pub fn build_alphabet(labels: &[Label], interner: &TokenInterner, classes: &ClassTable) -> Alphabet {
    let mut lemma_label: FxMap<TokenId, u32> = FxMap::default();
    let mut literal_label: FxMap<TokenId, u32> = FxMap::default();
    let mut class_label: FxMap<u32, u32> = FxMap::default();
    let mut regex_label: Vec<Option<u32>> = vec![None; interner.regex_sources().len()];
    for (i, l) in labels.iter().enumerate() {
        let i = i as u32;
        match *l {
            Label::Lemma(t) => {
                lemma_label.insert(t, i);
            }
            Label::Literal(t) => {
                literal_label.insert(t, i);
            }
            Label::Class(c) => {
                class_label.insert(c, i);
            }
            Label::Regex(r) => regex_label[r as usize] = Some(i),
        }
    }
    // lemma id -> class labels containing it
    let mut classes_of: FxMap<TokenId, Vec<u32>> = FxMap::default();
    for (c, members) in classes.iter().enumerate() {
        if let Some(&l) = class_label.get(&(c as u32)) {
            for &m in members {
                classes_of.entry(m).or_default().push(l);
            }
        }
    }

    let mut col_ids: FxMap<Vec<u32>, u32> = FxMap::default();
    col_ids.insert(Vec::new(), 0);
    let mut col_sets: Vec<Vec<u32>> = vec![Vec::new()];
    let mut col_of = Vec::with_capacity(interner.len());
    let mut set = Vec::new();
    for id in 0..interner.len() as TokenId {
        set.clear();
        let lemma_hit = |set: &mut Vec<u32>, lemma_id: TokenId| {
            if let Some(&l) = lemma_label.get(&lemma_id) {
                set.push(l);
            }
            if let Some(ls) = classes_of.get(&lemma_id) {
                set.extend_from_slice(ls);
            }
        };
        let sig = match interner.kind(id).unwrap() {
            EntryKind::Signature => id,
            EntryKind::Lemma => {
                lemma_hit(&mut set, id);
                interner.regex_signature(&interner.resolve(id).unwrap())
            }
            EntryKind::Literal => {
                if let Some(&l) = literal_label.get(&id) {
                    set.push(l);
                }
                let lemma = interner.lemma_of(id).unwrap();
                if let Some(lid) = interner.lemma_id(&lemma) {
                    lemma_hit(&mut set, lid);
                }
                interner.regex_signature(&lemma)
            }
        };
        for (r, l) in regex_label.iter().enumerate() {
            if let Some(l) = l {
                if sig & (1 << r) != 0 {
                    set.push(*l);
                }
            }
        }
        set.sort_unstable();
        set.dedup();
        let next = col_sets.len() as u32;
        let col = match col_ids.get(&set) {
            Some(&c) => c,
            None => {
                col_ids.insert(set.clone(), next);
                col_sets.push(set.clone());
                next
            }
        };
        col_of.push(col);
    }
    let mut label_cols = vec![Vec::new(); labels.len()];
    for (c, s) in col_sets.iter().enumerate() {
        for &l in s {
            label_cols[l as usize].push(c as u32);
        }
    }
    Alphabet { col_of, n_cols: col_sets.len() as u32, label_cols }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::ast::parse_pattern;
    use crate::pattern::lemma::Lemmatizer;
    use crate::pattern::rewrite::{rewrite_batch, RewriteOptions};
    use alloc::string::String;

    fn interner(words: &[&str]) -> TokenInterner {
        let mut w: Vec<String> = words.iter().map(|s| String::from(*s)).collect();
        w.sort();
        w.dedup();
        TokenInterner::new(Lemmatizer::Rules, Vec::new(), w, Vec::new()).unwrap()
    }

    #[test]
    fn shared_prefix_uses_fewer_states() {
        let pats = [parse_pattern("a b c").unwrap(), parse_pattern("a b d").unwrap()];
        let (rw, _) = rewrite_batch(&pats, RewriteOptions::default());
        let i = interner(&["a", "b", "c", "d"]);
        let shared = build_nfa(&rw, &i, true);
        let flat = build_nfa(&rw, &i, false);
        assert_eq!(shared.state_count(), 5);
        assert_eq!(flat.state_count(), 7);
    }

    #[test]
    fn shared_suffix_merges() {
        let pats = [parse_pattern("x b c").unwrap(), parse_pattern("y b c").unwrap()];
        let (rw, _) = rewrite_batch(&pats, RewriteOptions::default());
        let i = interner(&["x", "y", "b", "c"]);
        // root, x, y, then b/c chains differ by accept label so only the tail is distinct
        let nfa = build_nfa(&rw, &i, true);
        assert!(nfa.state_count() <= 7);
    }

    #[test]
    fn alphabet_groups_identical_tokens() {
        let i = interner(&["a", "b", "c"]);
        let labels = [Label::Lemma(i.lemma_id("a").unwrap())];
        let a = build_alphabet(&labels, &i, &ClassTable::default());
        assert_eq!(a.n_cols, 2);
        assert_eq!(a.col_of[i.lemma_id("b").unwrap() as usize], 0);
        assert_eq!(a.col_of[i.lemma_id("a").unwrap() as usize], 1);
        assert_eq!(a.label_cols[0], vec![1]);
    }
}
