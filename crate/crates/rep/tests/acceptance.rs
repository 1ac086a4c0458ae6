//! Acceptance gate. Prints one PASS/FAIL line per criterion, then fails if any did.
//!
//!     cargo test -p rep --test acceptance -- --nocapture

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use common::*;
use rep::bench::{bench_compile, bench_match};
use rep::eventlog::{Failpoint, SessionStatus, StoreError};
use rep::service::{ManualClock, ServiceError, ServiceOptions};
use rep_core::oracle::{loglik_gradient, naive_matches, nerode_class_count, random_case, HitSet};
use rep_core::pattern::matcher::{determinized, prepare};
use rep_core::pattern::{compile, CompileOptions, CompiledMatcher, Lemmatizer, RewriteOptions};
use rep_core::personality::synth::correlation;
use rep_core::personality::{
    fit_trait, infer_theta, reliability_curve, trait_index, EmOptions, FactorParams, GeneratorSpec, Matrix,
    SyntheticGenerator,
};
use rep_core::scoring::{willingness_confide, willingness_listen, ConfideOutcomes, ListenOutcomes};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// P1 ------------------------------------------------------------------------

fn p1_compile_time() -> Outcome {
    let run = bench_compile(100_000, 7).map_err(|e| e.to_string())?;
    check(
        run.seconds <= 30.0,
        format!("{} patterns in {:.2} s ({} minimized states)", run.patterns, run.seconds, run.stats.min_states),
    )
}

// P2 ------------------------------------------------------------------------

fn p2_match_throughput() -> Outcome {
    let run = bench_match(10_000, 100_000_000, 25, 40_000, 7).map_err(|e| e.to_string())?;
    check(
        run.tokens >= 100_000_000 && run.tokens_per_second >= 1e7,
        format!("{} tokens in {:.2} s, {:.2e} tok/s, {} hits", run.tokens, run.seconds, run.tokens_per_second, run.hits),
    )
}

// P3 ------------------------------------------------------------------------

fn hits(m: &CompiledMatcher, stream: &[String]) -> HitSet {
    let ids = m.interner().intern_all(stream);
    m.match_stream(&ids).into_iter().map(|h| (h.start, h.end, m.pattern_ids()[h.pattern as usize].clone())).collect()
}

fn p3_matcher_vs_oracle() -> Outcome {
    let (mut discrepancies, mut streams, mut small, mut not_minimal) = (0, 0, 0, 0);
    for seed in 0..1000u64 {
        let case = random_case(seed);
        let opts = CompileOptions { gap_policy: case.gap_policy, ..Default::default() };
        let m = compile(&case.patterns, Lemmatizer::Rules, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
        let plain = compile(&case.patterns, Lemmatizer::Rules, &CompileOptions { rewrite: RewriteOptions::NONE, ..opts })
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let (ids, asts) = prepare(&case.patterns, Lemmatizer::Rules, case.gap_policy).map_err(|e| e.to_string())?;
        let named: Vec<_> = ids.into_iter().zip(asts).collect();
        for s in &case.streams {
            let want = naive_matches(&named, s, Lemmatizer::Rules);
            discrepancies += (hits(&m, s) != want) as usize + (hits(&plain, s) != want) as usize;
            streams += 1;
        }
        if m.state_count() <= 200 {
            let dfa = determinized(&case.patterns, Lemmatizer::Rules, &opts).map_err(|e| e.to_string())?;
            small += 1;
            not_minimal += (m.state_count() != nerode_class_count(&dfa)) as usize;
        }
    }
    check(
        discrepancies == 0 && not_minimal == 0 && small > 0,
        format!("1000 cases, {streams} streams, {discrepancies} discrepancies; {small} cases <= 200 states, {not_minimal} above the Nerode count"),
    )
}

// P4 ------------------------------------------------------------------------

fn p4_factor_fit() -> Outcome {
    let t = Instant::now();
    let ti = trait_index("trust").unwrap();
    let opts = EmOptions { tol: 1e-12, max_iter: 20_000, ..Default::default() };
    let lambdas = [(0.1, 1.0), (0.3, 0.9), (0.6, 0.9), (0.2, 0.6)];
    let word_counts = [1000, 2000, 5000];
    let (mut worst_corr, mut worst_grad, mut worst_drop) = (f64::INFINITY, 0.0f64, 0.0f64);
    for c in 0..20u64 {
        let mut spec = GeneratorSpec::strong(&["trust"], 50);
        spec.lambda = lambdas[c as usize % lambdas.len()];
        let g = SyntheticGenerator::random(&spec, 100 + c).map_err(|e| e.to_string())?;
        let corpus = g.generate(500, word_counts[c as usize % word_counts.len()], 200 + c, false).corpus;
        let (params, report) = fit_trait(&corpus, &g.lexicon, "trust", &opts).map_err(|e| e.to_string())?;
        if !report.converged || params.items.len() != 50 {
            return Err(format!("config {c}: converged {} with {} items", report.converged, params.items.len()));
        }
        for w in report.trace.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
        let truth: Vec<f64> = corpus.theta.as_ref().unwrap().iter().map(|th| th[ti]).collect();
        let est: Vec<f64> = corpus.users.iter().map(|u| infer_theta(&params, u).theta).collect();
        worst_corr = worst_corr.min(correlation(&truth, &est));
        let y = Matrix::from_rows(&corpus.users.iter().map(|u| u.logits()).collect::<Vec<_>>());
        let p = FactorParams {
            mu: params.items.iter().map(|p| p.mu).collect(),
            lambda: params.items.iter().map(|p| p.lambda).collect(),
            sigma2: params.items.iter().map(|p| p.sigma2).collect(),
        };
        worst_grad = loglik_gradient(&y, &p, 1e-5).iter().fold(worst_grad, |a, g| a.max(g.abs()));
    }
    let secs = t.elapsed().as_secs_f64();
    check(
        worst_drop <= 1e-9 && worst_corr >= 0.9 && worst_grad < 1e-4 && secs <= 60.0,
        format!("20 configs of 500x50: max LL drop {worst_drop:.1e}, min corr {worst_corr:.4}, max |grad| {worst_grad:.1e}, {secs:.1} s"),
    )
}

// P5 ------------------------------------------------------------------------

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    correlation(&ranks(a), &ranks(b))
}

fn p5_reliability_curve() -> Outcome {
    let g = SyntheticGenerator::random(&GeneratorSpec::strong(&["trust"], 6), 21).map_err(|e| e.to_string())?;
    let m = compile(&g.lexicon.cue_patterns(), Lemmatizer::Rules, &CompileOptions::default()).map_err(|e| e.to_string())?;
    let words = [50, 100, 200, 500, 1000, 2000, 5000];
    let curve = reliability_curve(&g.model, "trust", &g.lexicon, &m, &g, 400, &words, 3).map_err(|e| e.to_string())?;
    let pts: Vec<(f64, f64)> = curve.iter().filter_map(|p| p.alpha.map(|a| (p.words as f64, a))).collect();
    let (w, a): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let rho = spearman(&w, &a);
    let best = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shown: Vec<String> = pts.iter().map(|(w, a)| format!("{w}:{a:.3}")).collect();
    check(pts.len() >= 6 && rho > 0.9 && best >= 0.8, format!("rho {rho:.3}, max alpha {best:.3} [{}]", shown.join(" ")))
}

// P6 ------------------------------------------------------------------------

/// Label-level scoring rules, written independently of the scorer.
fn brute_confide(rating: u8, action: u8, opinions: [(u8, u8); 2]) -> u32 {
    // agree / not sure / disagree weighted by how many people the weakness goes to
    let shared_with = match action {
        0 => 0,
        1 => 1,
        _ => 2,
    };
    let mut total = rating as u32 * shared_with;
    for (confidence, share) in opinions {
        if share == 1 {
            total += confidence as u32;
        }
    }
    total
}

fn brute_listen(clicks: [u8; 2], shares: [(u8, u8); 5]) -> u32 {
    let mut total = clicks.iter().map(|&c| c as u32).sum::<u32>();
    for (rating, act) in shares {
        if act == 1 {
            total += rating as u32;
        }
    }
    total
}

fn p6_scoring() -> Outcome {
    let (mut mismatches, mut wc, mut wl) = (0, (u32::MAX, 0), (u32::MAX, 0));
    let mut cases = 0;
    for r in 1..=3u8 {
        for a in 0..=2u8 {
            for o in 0..36u32 {
                let op = |k: u32| (((k % 3) + 1) as u8, ((k / 3) % 2) as u8);
                let opinions = [op(o % 6), op(o / 6)];
                let got = willingness_confide(&ConfideOutcomes { weakness: (r, a), opinions });
                mismatches += (got != brute_confide(r, a, opinions)) as usize;
                wc = (wc.0.min(got), wc.1.max(got));
                cases += 1;
            }
        }
    }
    for code in 0..(4 * 6u32.pow(5)) {
        let clicks = [(code & 1) as u8, ((code >> 1) & 1) as u8];
        let mut k = code >> 2;
        let mut shares = [(0, 0); 5];
        for s in shares.iter_mut() {
            *s = (((k % 3) + 1) as u8, ((k / 3) % 2) as u8);
            k /= 6;
        }
        let got = willingness_listen(&ListenOutcomes { clicks, shares });
        mismatches += (got != brute_listen(clicks, shares)) as usize;
        wl = (wl.0.min(got), wl.1.max(got));
        cases += 1;
    }
    check(
        mismatches == 0 && wc == (0, 12) && wl == (0, 17),
        format!("{cases} combinations, {mismatches} mismatches, WC [{}, {}], WL [{}, {}]", wc.0, wc.1, wl.0, wl.1),
    )
}

// P7 ------------------------------------------------------------------------

fn p7_demo() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (svc, sim) = simulate_demo(dir.path(), "kaya");
    let rec = svc.session(&sim.session_id).unwrap();
    let miscounts = agenda_miscounts(&svc, &sim.session_id);
    let report = serde_json::to_string_pretty(&sim.report).unwrap() + "\n";
    let transcript_ok = check_golden("demo_kaya.transcript.txt", &sim.transcript);
    let report_ok = check_golden("demo_kaya.report.json", &report);
    let r = &sim.report.report;
    let full = r.im.is_some() && r.wc.is_some() && r.wl.is_some() && r.traits.len() == 35;
    check(
        rec.status == SessionStatus::Completed && miscounts.is_empty() && transcript_ok && report_ok && full,
        format!(
            "{} turns, agenda miscounts {miscounts:?}, golden transcript {transcript_ok}, golden report {report_ok}, IM {:?} WC {:?} WL {:?}",
            sim.turns, r.im, r.wc, r.wl
        ),
    )
}

// P8 ------------------------------------------------------------------------

fn p8_replay() -> Outcome {
    let plan = demo_plan();
    let reference = tempfile::tempdir().unwrap();
    let svc = open(reference.path(), Arc::new(ManualClock::new(0, 5)), 3, ServiceOptions::default());
    let id = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
    drive(&svc, &id, &plan, |e| panic!("{e}"));
    let want = (svc.session(&id).unwrap(), svc.events(&id).unwrap(), svc.get_report(&id).unwrap());
    let n = want.1.len() as u64;

    let mut runs = Vec::new();
    for (point, at) in [(Failpoint::AfterInput, n / 3), (Failpoint::BeforeSnapshot, n / 2), (Failpoint::AfterInput, n - 6)] {
        let dir = tempfile::tempdir().unwrap();
        let clock = Arc::new(ManualClock::new(0, 5));
        let opts = ServiceOptions { session_ttl_ms: None, snapshot_every: 3 };
        let svc = open(dir.path(), clock.clone(), 3, opts);
        let id = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
        svc.store().inject(point, at);
        let mut failures = 0;
        drive(&svc, &id, &plan, |e| {
            assert!(matches!(e, ServiceError::Storage(StoreError::Injected(_))), "{e}");
            failures += 1;
        });
        drop(svc);
        let svc = open(dir.path(), clock, 3, opts);
        let got = (svc.session(&id).unwrap(), svc.events(&id).unwrap(), svc.get_report(&id).unwrap());
        let same = failures == 1 && got == want && svc.verify(&id).unwrap();
        runs.push((format!("{point:?}@{at}"), same));
    }
    let shown: Vec<String> = runs.iter().map(|(p, ok)| format!("{p}:{}", if *ok { "same" } else { "DIFF" })).collect();
    check(runs.iter().all(|r| r.1), format!("{n} events; {}", shown.join(" ")))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("P1", p1_compile_time),
        ("P2", p2_match_throughput),
        ("P3", p3_matcher_vs_oracle),
        ("P4", p4_factor_fit),
        ("P5", p5_reliability_curve),
        ("P6", p6_scoring),
        ("P7", p7_demo),
        ("P8", p8_replay),
    ];
    let mut failed = Vec::new();
    // the harness prints `test acceptance ... ` without a newline
    println!();
    for (id, f) in criteria {
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match out {
            Ok(msg) => println!("{id} PASS  {msg}"),
            Err(msg) => {
                println!("{id} FAIL  {msg}");
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
