use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ast::{parse_pattern, Element, PatternAst, PatternSource};
use super::dfa::{determinize, minimize, Dfa, DEAD};
use super::lemma::Lemmatizer;
use super::nfa::{build_alphabet, build_nfa};
use super::normalize::{normalize, GapPolicy};
use super::rewrite::{rewrite_batch, RewriteOptions};
use super::symbols::{ClassTable, TokenId, TokenInterner};
use super::PatternError;

/// Upper bound on distinct regex tokens per batch; each one doubles the signature space.
pub const MAX_REGEXES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub gap_policy: GapPolicy,
    pub rewrite: RewriteOptions,
    /// Subset construction aborts with a capacity error past this many states.
    pub max_states: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { gap_policy: GapPolicy::default(), rewrite: RewriteOptions::default(), max_states: 4_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatcherStats {
    pub patterns: u32,
    pub unique_patterns: u32,
    pub classes: u32,
    pub nfa_states: u32,
    pub dfa_states: u32,
    pub min_states: u32,
    pub columns: u32,
}

/// One match: `pattern` indexes [`CompiledMatcher::pattern_ids`]; the span is `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchHit {
    pub start: u32,
    pub end: u32,
    pub pattern: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledMatcher {
    pub(crate) interner: TokenInterner,
    pub(crate) classes: ClassTable,
    pub(crate) col_of: Vec<u32>,
    pub(crate) dfa: Dfa,
    pub(crate) pattern_ids: Vec<String>,
    pub(crate) stats: MatcherStats,
    start_row: Vec<u32>,
}

impl CompiledMatcher {
    pub(crate) fn assemble(
        interner: TokenInterner,
        classes: ClassTable,
        col_of: Vec<u32>,
        dfa: Dfa,
        pattern_ids: Vec<String>,
        stats: MatcherStats,
    ) -> Self {
        let start_row = (0..dfa.n_cols).map(|c| dfa.next(dfa.start, c)).collect();
        CompiledMatcher { interner, classes, col_of, dfa, pattern_ids, stats, start_row }
    }

    pub fn interner(&self) -> &TokenInterner {
        &self.interner
    }

    pub fn classes(&self) -> &ClassTable {
        &self.classes
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn state_count(&self) -> usize {
        self.dfa.state_count()
    }

    pub fn stats(&self) -> MatcherStats {
        self.stats
    }

    /// Pattern ids in index order (sorted).
    pub fn pattern_ids(&self) -> &[String] {
        &self.pattern_ids
    }

    pub fn pattern_index(&self, id: &str) -> Option<u32> {
        self.pattern_ids.binary_search_by(|p| p.as_str().cmp(id)).ok().map(|i| i as u32)
    }

    pub fn intern(&self, surface: &str) -> TokenId {
        self.interner.intern(surface)
    }

    /// Tokenizes text the same way patterns are tokenized, then interns.
    pub fn intern_text(&self, text: &str) -> Vec<TokenId> {
        crate::text::token_strings(text).iter().map(|t| self.interner.intern(t)).collect()
    }

    #[inline]
    fn col(&self, t: TokenId) -> u32 {
        self.col_of.get(t as usize).copied().unwrap_or(0)
    }

    /// Calls `f` on every hit, ordered by (start, end, pattern).
    pub fn for_each_match(&self, tokens: &[TokenId], mut f: impl FnMut(MatchHit)) {
        if self.dfa.start == DEAD {
            return;
        }
        for start in 0..tokens.len() {
            let mut s = self.start_row[self.col(tokens[start]) as usize];
            let mut end = start + 1;
            loop {
                if s == DEAD {
                    break;
                }
                for &p in self.dfa.accepts(s) {
                    f(MatchHit { start: start as u32, end: end as u32, pattern: p });
                }
                if end == tokens.len() {
                    break;
                }
                s = self.dfa.next(s, self.col(tokens[end]));
                end += 1;
            }
        }
    }

    pub fn match_stream(&self, tokens: &[TokenId]) -> Vec<MatchHit> {
        let mut out = Vec::new();
        self.for_each_match(tokens, |h| out.push(h));
        out
    }

    pub fn count_matches(&self, tokens: &[TokenId]) -> u64 {
        let mut n = 0u64;
        self.for_each_match(tokens, |_| n += 1);
        n
    }
}

/// Parses and normalizes a batch sorted by pattern id; rejects duplicate ids.
pub fn prepare(
    sources: &[PatternSource],
    lemmatizer: Lemmatizer,
    gap_policy: GapPolicy,
) -> Result<(Vec<String>, Vec<PatternAst>), PatternError> {
    let mut sorted: Vec<&PatternSource> = sources.iter().collect();
    sorted.sort_by(|a, b| a.pattern_id.cmp(&b.pattern_id));
    for w in sorted.windows(2) {
        if w[0].pattern_id == w[1].pattern_id {
            return Err(PatternError::DuplicatePatternId(w[0].pattern_id.clone()));
        }
    }
    let mut ids = Vec::with_capacity(sorted.len());
    let mut asts = Vec::with_capacity(sorted.len());
    for src in sorted {
        let ast = parse_pattern(&src.text).map_err(|e| match e {
            PatternError::Syntax { offset, message } => {
                PatternError::InPattern { pattern_id: src.pattern_id.clone(), offset, message }
            }
            other => other,
        })?;
        ids.push(src.pattern_id.clone());
        asts.push(normalize(&ast, lemmatizer, gap_policy));
    }
    Ok((ids, asts))
}

/// Full pipeline: parse, normalize, rewrite, NFA, subset construction, minimization.
pub fn compile(
    sources: &[PatternSource],
    lemmatizer: Lemmatizer,
    options: &CompileOptions,
) -> Result<CompiledMatcher, PatternError> {
    let (ids, asts) = prepare(sources, lemmatizer, options.gap_policy)?;
    compile_normalized(ids, &asts, lemmatizer, options)
}

struct Front {
    interner: TokenInterner,
    classes: ClassTable,
    nfa: super::nfa::Nfa,
    alphabet: super::nfa::Alphabet,
    unique: usize,
}

fn front_end(asts: &[PatternAst], lemmatizer: Lemmatizer, options: &CompileOptions) -> Result<Front, PatternError> {
    let (rewritten, class_sets) = rewrite_batch(asts, options.rewrite);

    let mut lemmas: Vec<String> = Vec::new();
    let mut literals: Vec<String> = Vec::new();
    let mut regexes: Vec<String> = Vec::new();
    for p in &rewritten {
        for e in &p.ast.elements {
            match e {
                Element::Token(t) => lemmas.push(t.clone()),
                Element::Alternatives(ms) => lemmas.extend(ms.iter().flatten().cloned()),
                Element::Literal(ws) => literals.extend(ws.iter().cloned()),
                Element::Regex(r) => regexes.push(r.clone()),
                Element::AnyOne | Element::Gap { .. } | Element::Class(_) => {}
            }
        }
    }
    lemmas.extend(class_sets.classes.iter().flatten().cloned());
    for v in [&mut lemmas, &mut literals, &mut regexes] {
        v.sort_unstable();
        v.dedup();
    }
    if regexes.len() > MAX_REGEXES {
        return Err(PatternError::TooManyRegexes { count: regexes.len(), limit: MAX_REGEXES });
    }
    let interner = TokenInterner::new(lemmatizer, regexes, lemmas, literals)
        .map_err(|m| PatternError::Syntax { offset: 0, message: m })?;
    let classes = ClassTable::new(
        class_sets
            .classes
            .iter()
            .map(|members| members.iter().map(|m| interner.lemma_id(m).unwrap()).collect())
            .collect(),
    );
    let nfa = build_nfa(&rewritten, &interner, options.rewrite.factor);
    let alphabet = build_alphabet(&nfa.labels, &interner, &classes);
    Ok(Front { interner, classes, nfa, alphabet, unique: rewritten.len() })
}

/// Compiles already-normalized patterns; `asts[i]` belongs to `ids[i]`, ids sorted.
pub fn compile_normalized(
    ids: Vec<String>,
    asts: &[PatternAst],
    lemmatizer: Lemmatizer,
    options: &CompileOptions,
) -> Result<CompiledMatcher, PatternError> {
    let f = front_end(asts, lemmatizer, options)?;
    let dfa = determinize(&f.nfa, &f.alphabet, options.max_states)?;
    let min = minimize(&dfa);
    let stats = MatcherStats {
        patterns: ids.len() as u32,
        unique_patterns: f.unique as u32,
        classes: f.classes.len() as u32,
        nfa_states: f.nfa.state_count() as u32,
        dfa_states: dfa.state_count() as u32,
        min_states: min.state_count() as u32,
        columns: f.alphabet.n_cols,
    };
    Ok(CompiledMatcher::assemble(f.interner, f.classes, f.alphabet.col_of, min, ids, stats))
}

/// The unminimized DFA of a batch, for checking minimization against a reference.
pub fn determinized(
    sources: &[PatternSource],
    lemmatizer: Lemmatizer,
    options: &CompileOptions,
) -> Result<Dfa, PatternError> {
    let (_, asts) = prepare(sources, lemmatizer, options.gap_policy)?;
    let f = front_end(&asts, lemmatizer, options)?;
    determinize(&f.nfa, &f.alphabet, options.max_states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn src(id: &str, text: &str) -> PatternSource {
        PatternSource::new(id, text)
    }

    fn sample_matcher() -> CompiledMatcher {
        compile(
            &[src("T2", "when make decision"), src("T3", "how many apply")],
            Lemmatizer::Rules,
            &CompileOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn gaps_absorb_filler() {
        let m = sample_matcher();
        let hits = m.match_stream(&m.intern_text("when will you make your decision"));
        assert_eq!(hits, vec![MatchHit { start: 0, end: 6, pattern: 0 }]);
        let hits = m.match_stream(&m.intern_text("so how many people applied"));
        assert_eq!(hits, vec![MatchHit { start: 1, end: 5, pattern: 1 }]);
    }

    #[test]
    fn distinct_accept_states() {
        let m = sample_matcher();
        let d = m.dfa();
        let accepting: Vec<&[u32]> =
            (0..d.state_count() as u32).map(|s| d.accepts(s)).filter(|a| !a.is_empty()).collect();
        assert!(accepting.contains(&&[0u32][..]));
        assert!(accepting.contains(&&[1u32][..]));
    }

    #[test]
    fn empty_batch_rejects_everything() {
        let m = compile(&[], Lemmatizer::Rules, &CompileOptions::default()).unwrap();
        assert_eq!(m.state_count(), 1);
        assert!(m.match_stream(&[0, 0, 0]).is_empty());
    }

    #[test]
    fn empty_stream_and_unknown_tokens() {
        let m = sample_matcher();
        assert!(m.match_stream(&[]).is_empty());
        assert!(m.match_stream(&m.intern_text("zebra quux blorp")).is_empty());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let e = compile(&[src("a", "x"), src("a", "y")], Lemmatizer::Rules, &CompileOptions::default());
        assert_eq!(e.unwrap_err(), PatternError::DuplicatePatternId("a".into()));
    }

    #[test]
    fn syntax_error_names_pattern() {
        let e = compile(&[src("bad", "a [b")], Lemmatizer::Rules, &CompileOptions::default()).unwrap_err();
        assert!(matches!(e, PatternError::InPattern { ref pattern_id, offset: 2, .. } if pattern_id == "bad"));
    }

    #[test]
    fn duplicate_patterns_share_state() {
        let m = compile(&[src("p1", "hello there"), src("p2", "hello there")], Lemmatizer::Rules, &CompileOptions::default())
            .unwrap();
        let hits = m.match_stream(&m.intern_text("hello there"));
        assert_eq!(hits.iter().map(|h| h.pattern).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(m.stats().unique_patterns, 1);
    }

    #[test]
    fn class_token_matches_members() {
        let colors = "red|orange|yellow|green|blue|indigo|violet|purple|pink|brown";
        let m = compile(&[src("c", &alloc::format!("like [{colors}]"))], Lemmatizer::Rules, &CompileOptions::default())
            .unwrap();
        assert_eq!(m.classes().len(), 1);
        assert_eq!(m.match_stream(&m.intern_text("i like pink")).len(), 1);
        assert!(m.match_stream(&m.intern_text("i like grey")).is_empty());
    }

    #[test]
    fn literal_regex_anyone() {
        let m = compile(
            &[src("l", "\"we will\" _ /\\d+/ days")],
            Lemmatizer::Rules,
            &CompileOptions { gap_policy: GapPolicy::CONTIGUOUS, ..Default::default() },
        )
        .unwrap();
        assert_eq!(m.match_stream(&m.intern_text("we will wait 10 days")).len(), 1);
        assert!(m.match_stream(&m.intern_text("we shall wait 10 days")).is_empty());
        assert!(m.match_stream(&m.intern_text("we will wait ten days")).is_empty());
    }

    #[test]
    fn deterministic() {
        let a = sample_matcher();
        let b = sample_matcher();
        assert_eq!(a, b);
    }
}
