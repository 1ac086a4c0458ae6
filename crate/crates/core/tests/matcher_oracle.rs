use rep_core::oracle::{naive_matches, nerode_class_count, random_case, HitSet};
use rep_core::pattern::matcher::{determinized, prepare};
use rep_core::pattern::{compile, CompileOptions, CompiledMatcher, Lemmatizer, RewriteOptions};

fn hits(m: &CompiledMatcher, stream: &[String]) -> HitSet {
    let ids = m.interner().intern_all(stream);
    m.match_stream(&ids)
        .into_iter()
        .map(|h| (h.start, h.end, m.pattern_ids()[h.pattern as usize].clone()))
        .collect()
}

#[test]
fn random_batches_agree_with_naive_matcher() {
    let mut checked_minimal = 0;
    for seed in 0..150u64 {
        let case = random_case(seed);
        let opts = CompileOptions { gap_policy: case.gap_policy, ..Default::default() };
        let m = compile(&case.patterns, Lemmatizer::Rules, &opts).unwrap();
        let plain = compile(
            &case.patterns,
            Lemmatizer::Rules,
            &CompileOptions { rewrite: RewriteOptions::NONE, ..opts },
        )
        .unwrap();
        let (ids, asts) = prepare(&case.patterns, Lemmatizer::Rules, case.gap_policy).unwrap();
        let named: Vec<_> = ids.into_iter().zip(asts).collect();
        for s in &case.streams {
            let expected = naive_matches(&named, s, Lemmatizer::Rules);
            assert_eq!(hits(&m, s), expected, "seed {seed} stream {s:?}");
            assert_eq!(hits(&plain, s), expected, "seed {seed} without rewrites");
        }
        let dfa = determinized(&case.patterns, Lemmatizer::Rules, &opts).unwrap();
        if dfa.state_count() <= 50_000 {
            assert_eq!(m.state_count(), nerode_class_count(&dfa), "seed {seed}");
            assert_eq!(plain.state_count(), m.state_count(), "seed {seed}");
            checked_minimal += 1;
        }
    }
    assert_eq!(checked_minimal, 150);
}
