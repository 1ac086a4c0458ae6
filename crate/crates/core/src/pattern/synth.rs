//! Synthetic pattern batches and token streams for benchmarks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ast::{Element, PatternAst, PatternSource};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub patterns: usize,
    pub vocab: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub alt_fraction: f64,
    pub gap_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            patterns: 10_000,
            vocab: 5_000,
            min_tokens: 3,
            max_tokens: 6,
            alt_fraction: 0.2,
            gap_fraction: 0.1,
            seed: 7,
        }
    }
}

/// Vocabulary word `i`; digits keep every word a fixed point of the lemmatizer.
pub fn word(i: usize) -> String {
    format!("w{i}")
}

fn rand_word(rng: &mut ChaCha8Rng, vocab: usize) -> String {
    word(rng.random_range(0..vocab))
}

/// Generates `cfg.patterns` pattern sources with ids `p000000`, `p000001`, ...
pub fn synth_patterns(cfg: &SynthConfig) -> Vec<PatternSource> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.patterns);
    for i in 0..cfg.patterns {
        let len = rng.random_range(cfg.min_tokens..=cfg.max_tokens);
        let mut parts: Vec<String> = (0..len).map(|_| rand_word(&mut rng, cfg.vocab)).collect();
        if rng.random_bool(cfg.alt_fraction) {
            let at = rng.random_range(0..len);
            // one in five alternatives is large enough to be retracted into a class
            let n = if rng.random_bool(0.2) { rng.random_range(8..=12) } else { rng.random_range(2..=4) };
            let members: Vec<String> = (0..n).map(|_| rand_word(&mut rng, cfg.vocab)).collect();
            parts[at] = format!("[{}]", members.join("|"));
        }
        if rng.random_bool(cfg.gap_fraction) {
            let at = rng.random_range(1..len);
            parts.insert(at, String::from("*"));
        }
        out.push(PatternSource::new(format!("p{i:06}"), parts.join(" ")));
    }
    out
}

/// A token sequence matched by `ast`, with gaps filled from the vocabulary.
pub fn instantiate(ast: &PatternAst, rng: &mut ChaCha8Rng, vocab: usize) -> Vec<String> {
    let mut out = Vec::new();
    for e in &ast.elements {
        match e {
            Element::Token(t) => out.push(t.clone()),
            Element::Literal(ws) => out.extend(ws.iter().cloned()),
            Element::AnyOne => out.push(rand_word(rng, vocab)),
            Element::Gap { min, max } => {
                let hi = max.unwrap_or(min + 2).min(min + 2);
                for _ in 0..rng.random_range(*min..=hi) {
                    out.push(rand_word(rng, vocab));
                }
            }
            Element::Alternatives(ms) => out.extend(ms[rng.random_range(0..ms.len())].iter().cloned()),
            Element::Regex(_) | Element::Class(_) => out.push(String::from("0")),
        }
    }
    out
}

/// Messages of roughly `message_len` tokens; about a third embed a pattern instance.
pub fn synth_messages(patterns: &[PatternAst], cfg: &SynthConfig, messages: usize, message_len: usize) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut out = Vec::with_capacity(messages);
    for _ in 0..messages {
        let mut m: Vec<String> = Vec::with_capacity(message_len + 8);
        if !patterns.is_empty() && rng.random_bool(0.33) {
            let p = &patterns[rng.random_range(0..patterns.len())];
            let inst = instantiate(p, &mut rng, cfg.vocab);
            let pre = rng.random_range(0..message_len / 2);
            for _ in 0..pre {
                m.push(rand_word(&mut rng, cfg.vocab + cfg.vocab / 10));
            }
            m.extend(inst);
        }
        while m.len() < message_len {
            m.push(rand_word(&mut rng, cfg.vocab + cfg.vocab / 10));
        }
        out.push(m);
    }
    out
}
