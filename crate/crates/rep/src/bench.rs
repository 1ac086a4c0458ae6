//! Timed compile and match runs over synthetic pattern sets.

use std::time::Instant;

use rep_core::pattern::matcher::prepare;
use rep_core::pattern::synth::{synth_messages, synth_patterns, SynthConfig};
use rep_core::pattern::{compile, CompileOptions, CompiledMatcher, GapPolicy, Lemmatizer, MatcherStats, PatternError};
use serde::Serialize;

/// Benchmarks compile authored gaps only; implicit gaps are off.
pub fn bench_options() -> CompileOptions {
    CompileOptions { gap_policy: GapPolicy::CONTIGUOUS, ..Default::default() }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompileRun {
    pub patterns: usize,
    pub seconds: f64,
    pub stats: MatcherStats,
}

pub fn bench_compile(patterns: usize, seed: u64) -> Result<CompileRun, PatternError> {
    let cfg = SynthConfig { patterns, seed, ..Default::default() };
    let sources = synth_patterns(&cfg);
    let t = Instant::now();
    let m = compile(&sources, Lemmatizer::Rules, &bench_options())?;
    Ok(CompileRun { patterns, seconds: t.elapsed().as_secs_f64(), stats: m.stats() })
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchRun {
    pub patterns: usize,
    pub tokens: u64,
    pub messages: u64,
    pub hits: u64,
    pub seconds: f64,
    pub tokens_per_second: f64,
}

/// Matches `tokens` tokens as a stream of `message_len`-token messages, cycling
/// through a pool of distinct pre-interned messages. Only matching is timed.
pub fn bench_match(
    patterns: usize,
    tokens: u64,
    message_len: usize,
    pool: usize,
    seed: u64,
) -> Result<MatchRun, PatternError> {
    let cfg = SynthConfig { patterns, seed, ..Default::default() };
    let sources = synth_patterns(&cfg);
    let m = compile(&sources, Lemmatizer::Rules, &bench_options())?;
    let (_, asts) = prepare(&sources, Lemmatizer::Rules, GapPolicy::CONTIGUOUS)?;
    let messages: Vec<Vec<u32>> =
        synth_messages(&asts, &cfg, pool, message_len).iter().map(|msg| m.interner().intern_all(msg)).collect();
    Ok(time_matching(&m, &messages, tokens, patterns))
}

fn time_matching(m: &CompiledMatcher, messages: &[Vec<u32>], tokens: u64, patterns: usize) -> MatchRun {
    let (mut done, mut hits, mut n) = (0u64, 0u64, 0u64);
    let t = Instant::now();
    while done < tokens {
        for msg in messages {
            if done >= tokens {
                break;
            }
            hits += m.count_matches(msg);
            done += msg.len() as u64;
            n += 1;
        }
    }
    let seconds = t.elapsed().as_secs_f64();
    MatchRun { patterns, tokens: done, messages: n, hits, seconds, tokens_per_second: done as f64 / seconds }
}
