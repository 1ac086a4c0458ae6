//! Trigger patterns: DSL parsing, normalization, batch rewriting and
//! compilation into one minimized DFA over interned tokens.

pub mod ast;
pub mod blob;
pub mod dfa;
pub mod lemma;
pub mod matcher;
pub mod nfa;
pub mod normalize;
pub mod rewrite;
pub mod symbols;
pub mod synth;

use alloc::string::String;

pub use ast::{parse_pattern, Element, PatternAst, PatternSource};
pub use lemma::{lemmatize, Lemmatizer};
pub use matcher::{compile, CompileOptions, CompiledMatcher, MatchHit, MatcherStats};
pub use normalize::{normalize, GapPolicy};
pub use rewrite::{rewrite_batch, ClassSets, RewriteOptions, RewrittenPattern};
pub use symbols::{ClassTable, TokenId, TokenInterner, UNK};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("pattern {pattern_id}: syntax error at byte {offset}: {message}")]
    InPattern { pattern_id: String, offset: usize, message: String },
    #[error("duplicate pattern id {0}")]
    DuplicatePatternId(String),
    #[error("automaton has {states} states, over the limit of {limit}")]
    Capacity { states: usize, limit: usize },
    #[error("{count} distinct regex tokens, over the limit of {limit}")]
    TooManyRegexes { count: usize, limit: usize },
    #[error("malformed matcher blob: {0}")]
    Blob(String),
}
