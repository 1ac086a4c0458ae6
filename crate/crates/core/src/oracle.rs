//! Reference implementations used only to check the fast paths: a backtracking
//! per-pattern matcher, a Moore partition-refinement state counter, and the
//! random case generator both are exercised on, a finite-difference
//! gradient of the factor model likelihood, and an exhaustive re-ranking of
//! dialogue candidates with a random script generator.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex_automata::meta::Regex;

use crate::dialogue::{
    Action, AgendaEntry, ConfigDoc, Initiator, Predicate, Question, QuestionKind, ScriptDocument, SessionState, TopicDoc,
    Trigger, UnitDoc, FALLBACK_TOPIC,
};
use crate::pattern::dfa::Dfa;
use crate::pattern::matcher::prepare;
use crate::personality::{mean_loglik, FactorParams, Matrix};
use crate::pattern::{Element, GapPolicy, Lemmatizer, PatternAst, PatternSource};

/// `(start, end, pattern_id)` triples, the naive matcher's output order.
pub type HitSet = BTreeSet<(u32, u32, String)>;

struct Ctx<'a> {
    surface: &'a [String],
    lemma: Vec<String>,
}

fn ends_from(ctx: &Ctx, elems: &[Element], pos: usize, regexes: &[(String, Regex)], out: &mut BTreeSet<usize>) {
    let Some((e, rest)) = elems.split_first() else {
        out.insert(pos);
        return;
    };
    let n = ctx.surface.len();
    match e {
        Element::Token(l) => {
            if pos < n && &ctx.lemma[pos] == l {
                ends_from(ctx, rest, pos + 1, regexes, out);
            }
        }
        Element::Literal(ws) => {
            if pos + ws.len() <= n && ctx.surface[pos..pos + ws.len()] == ws[..] {
                ends_from(ctx, rest, pos + ws.len(), regexes, out);
            }
        }
        Element::AnyOne => {
            if pos < n {
                ends_from(ctx, rest, pos + 1, regexes, out);
            }
        }
        Element::Gap { min, max } => {
            let hi = max.map_or(n - pos, |m| (m as usize).min(n - pos));
            for k in *min as usize..=hi {
                ends_from(ctx, rest, pos + k, regexes, out);
            }
        }
        Element::Alternatives(members) => {
            for m in members {
                if pos + m.len() <= n && ctx.lemma[pos..pos + m.len()] == m[..] {
                    ends_from(ctx, rest, pos + m.len(), regexes, out);
                }
            }
        }
        Element::Regex(src) => {
            let re = &regexes.iter().find(|(s, _)| s == src).unwrap().1;
            if pos < n && re.is_match(&ctx.lemma[pos]) {
                ends_from(ctx, rest, pos + 1, regexes, out);
            }
        }
        Element::Class(_) => panic!("the naive matcher works on unrewritten patterns"),
    }
}

/// Tries every normalized pattern at every start position.
pub fn naive_matches(patterns: &[(String, PatternAst)], surface: &[String], lemmatizer: Lemmatizer) -> HitSet {
    let ctx = Ctx { surface, lemma: surface.iter().map(|t| lemmatizer.lemma(t)).collect() };
    let mut regexes: Vec<(String, Regex)> = Vec::new();
    for (_, p) in patterns {
        for e in &p.elements {
            if let Element::Regex(src) = e {
                if !regexes.iter().any(|(s, _)| s == src) {
                    regexes.push((src.clone(), Regex::new(&format!("^(?:{src})$")).unwrap()));
                }
            }
        }
    }
    let mut hits = HitSet::new();
    let mut ends = BTreeSet::new();
    for (id, p) in patterns {
        for start in 0..surface.len() {
            ends.clear();
            ends_from(&ctx, &p.elements, start, &regexes, &mut ends);
            for &end in &ends {
                if end > start {
                    hits.insert((start as u32, end as u32, id.clone()));
                }
            }
        }
    }
    hits
}

/// Number of Myhill-Nerode classes of `dfa`'s states, by Moore refinement
/// starting from the accept-set partition and probing every column.
pub fn nerode_class_count(dfa: &Dfa) -> usize {
    let n = dfa.state_count();
    let mut class: Vec<u32> = dfa.accept.clone();
    let mut count = distinct(&class);
    loop {
        let mut sigs: Vec<(Vec<u32>, usize)> = (0..n)
            .map(|s| {
                let mut sig = vec![class[s]];
                sig.extend((0..dfa.n_cols).map(|c| class[dfa.next(s as u32, c) as usize]));
                (sig, s)
            })
            .collect();
        sigs.sort();
        let mut next = vec![0u32; n];
        let mut id = 0u32;
        for i in 0..n {
            if i > 0 && sigs[i].0 != sigs[i - 1].0 {
                id += 1;
            }
            next[sigs[i].1] = id;
        }
        let c = distinct(&next);
        class = next;
        if c == count {
            return c;
        }
        count = c;
    }
}

fn distinct(v: &[u32]) -> usize {
    v.iter().collect::<BTreeSet<_>>().len()
}

/// Surface symbols of random cases: plain words, inflected forms and numbers.
pub const SYMBOLS: [&str; 30] = [
    "make", "making", "decision", "decisions", "when", "how", "many", "apply", "applies", "job", "we", "will",
    "run", "runs", "ran", "share", "view", "views", "opinion", "like", "red", "blue", "green", "pink", "cat",
    "dog", "sky", "7", "2016", "zzz",
];

const REGEXES: [&str; 3] = ["\\d+", "s.*", "[a-d]+"];

#[derive(Debug, Clone)]
pub struct RandomCase {
    pub patterns: Vec<PatternSource>,
    pub streams: Vec<Vec<String>>,
    pub gap_policy: GapPolicy,
}

fn sym(rng: &mut ChaCha8Rng) -> String {
    SYMBOLS[rng.random_range(0..SYMBOLS.len())].to_string()
}

fn random_element(rng: &mut ChaCha8Rng) -> String {
    let r = rng.random_range(0..100);
    match r {
        0..=54 => sym(rng),
        55..=66 => {
            let n = if rng.random_bool(0.4) { rng.random_range(8..=12) } else { rng.random_range(2..=4) };
            let members: Vec<String> = (0..n)
                .map(|_| if rng.random_bool(0.15) { format!("{} {}", sym(rng), sym(rng)) } else { sym(rng) })
                .collect();
            format!("[{}]", members.join("|"))
        }
        67..=74 => format!("\"{} {}\"", sym(rng), sym(rng)),
        75..=81 => "_".to_string(),
        82..=93 => match rng.random_range(0..3) {
            0 => "*".to_string(),
            1 => format!("*{{0,{}}}", rng.random_range(1..=3)),
            _ => format!("*{{1,{}}}", rng.random_range(1..=3)),
        },
        _ => format!("/{}/", REGEXES[rng.random_range(0..REGEXES.len())]),
    }
}

/// Up to 50 patterns over [`SYMBOLS`] and up to 8 streams of at most 40 tokens.
pub fn random_case(seed: u64) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // wide implicit gaps over a 30-symbol alphabet blow up the subset construction,
    // so those batches stay smaller
    let gap_policy = match rng.random_range(0..5) {
        0 | 1 => GapPolicy::CONTIGUOUS,
        2 | 3 => GapPolicy::bounded(1),
        _ => GapPolicy::bounded(3),
    };
    let cap = if gap_policy.max_gap == Some(3) { 12 } else { 50 };
    let n_patterns = rng.random_range(0..=cap);
    let mut patterns = Vec::with_capacity(n_patterns);
    for i in 0..n_patterns {
        let len = rng.random_range(1..=5);
        let mut parts: Vec<String> = (0..len).map(|_| random_element(&mut rng)).collect();
        if parts.iter().all(|p| p.starts_with('*')) {
            parts.push(sym(&mut rng));
        }
        // occasional exact duplicate to exercise deduplication
        let text = if i > 0 && rng.random_bool(0.05) { patterns.last().map(|p: &PatternSource| p.text.clone()).unwrap() } else { parts.join(" ") };
        patterns.push(PatternSource::new(format!("q{i:02}"), text));
    }
    let streams = (0..8)
        .map(|_| {
            let len = rng.random_range(0..=40);
            (0..len).map(|_| sym(&mut rng)).collect()
        })
        .collect();
    RandomCase { patterns, streams, gap_policy }
}

/// Central-difference gradient of the per-user mean log-likelihood with respect to
/// every mu, lambda and log sigma2, in that order.
pub fn loglik_gradient(y: &Matrix, p: &FactorParams, h: f64) -> Vec<f64> {
    let j = p.mu.len();
    let mut g = Vec::with_capacity(3 * j);
    let eval = |q: &FactorParams| mean_loglik(y, q);
    for which in 0..3 {
        for k in 0..j {
            let bump = |d: f64| {
                let mut q = p.clone();
                match which {
                    0 => q.mu[k] += d,
                    1 => q.lambda[k] += d,
                    _ => q.sigma2[k] *= libm::exp(d),
                }
                eval(&q)
            };
            g.push((bump(h) - bump(-h)) / (2.0 * h));
        }
    }
    g
}


/// What the dialogue oracle ranks against; messages are surface tokens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleStimulus<'a> {
    Begin,
    Message(&'a [String]),
    Answered,
    Chain,
}

fn doc_agenda_topics(doc: &ScriptDocument) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    for (g, e) in doc.config.agenda.iter().enumerate() {
        match e {
            AgendaEntry::Topic(t) => out.push((g, t.as_str())),
            AgendaEntry::Unordered(ts) => out.extend(ts.iter().map(|t| (g, t.as_str()))),
        }
    }
    out
}

fn doc_complete(doc: &ScriptDocument, state: &SessionState) -> bool {
    doc_agenda_topics(doc).iter().all(|(_, name)| {
        let t = doc.topics.iter().find(|t| t.name == *name).unwrap();
        t.units.iter().all(|u| state.activated.contains(&u.id))
    })
}

/// The unit `step` should activate first, re-derived from the authored document
/// by scoring every unit and taking the least rank key.
pub fn dialogue_choice(doc: &ScriptDocument, state: &SessionState, stimulus: OracleStimulus) -> Option<String> {
    let hits: BTreeSet<String> = match stimulus {
        OracleStimulus::Message(words) => {
            let sources: Vec<PatternSource> = doc.patterns.iter().map(|(id, t)| PatternSource::new(id.clone(), t.clone())).collect();
            let (ids, asts) = prepare(&sources, Lemmatizer::Rules, GapPolicy::default()).unwrap();
            let pats: Vec<(String, PatternAst)> = ids.into_iter().zip(asts).collect();
            let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
            naive_matches(&pats, &lower, Lemmatizer::Rules).into_iter().map(|(_, _, id)| id).collect()
        }
        _ => BTreeSet::new(),
    };
    let agenda = doc_agenda_topics(doc);
    let is_sub = |name: &str| doc.topics.iter().flat_map(|t| &t.units).any(|u| u.subtopic.as_deref() == Some(name));
    let mut best: Option<((u8, usize, usize, usize), String)> = None;
    let mut consider = |key: (u8, usize, usize, usize), id: &str| {
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, String::from(id)));
        }
    };
    for (ti, t) in doc.topics.iter().enumerate() {
        let (class, group) = if state.stack.last() == Some(&t.name) {
            let mut root = t.name.as_str();
            while let Some(p) = doc.topics.iter().find(|p| p.units.iter().any(|u| u.subtopic.as_deref() == Some(root))) {
                root = &p.name;
            }
            (0, agenda.iter().find(|(_, n)| *n == root).map_or(0, |(g, _)| *g))
        } else if is_sub(&t.name) {
            continue;
        } else if let Some((g, _)) = agenda.iter().find(|(_, n)| *n == t.name) {
            (1, *g)
        } else if doc.config.sidetalk.contains(&t.name) {
            (2, 0)
        } else {
            (3, 0)
        };
        let admitted = match stimulus {
            OracleStimulus::Message(_) => true,
            OracleStimulus::Begin | OracleStimulus::Answered => class != 3,
            OracleStimulus::Chain => class <= 1,
        };
        if !admitted {
            continue;
        }
        let reusable_topic = doc.config.error_handling.contains(&t.name);
        for (pos, u) in t.units.iter().enumerate() {
            if !(u.reusable || reusable_topic) && state.activated.contains(&u.id) {
                continue;
            }
            let fires = match &u.trigger {
                Trigger::ChatBegin => stimulus == OracleStimulus::Begin,
                Trigger::Pattern(p) => matches!(stimulus, OracleStimulus::Message(_)) && hits.contains(p),
                Trigger::Predicate(Predicate::Answered(q)) => state.answers.contains_key(q),
                Trigger::Predicate(Predicate::Activated(x)) => state.activated.contains(x),
                Trigger::Predicate(Predicate::AgendaComplete) => doc_complete(doc, state),
                Trigger::Always => true,
            };
            if fires {
                consider((class, group, ti, pos), &u.id);
            }
        }
    }
    let fallback = doc.config.error_handling.is_empty() && doc.config.default_fallback;
    if best.is_none() && fallback && matches!(stimulus, OracleStimulus::Message(_)) {
        return Some(String::from(FALLBACK_TOPIC));
    }
    best.map(|(_, id)| id)
}

/// Words `w0`..`w5`; pattern `p{i}` matches word `i`.
pub const SCRIPT_WORDS: usize = 6;

/// A random small script. The first agenda topic opens on chat-begin.
/// Triggers of agenda topics and their subtopics refer only to patterns and to
/// earlier agenda units and questions. Only top-level sidetalk and error
/// handling units are reusable, all pattern-triggered, and error handling asks
/// nothing. So each agenda unit can fire given the right messages.
pub fn random_script(seed: u64) -> ScriptDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let patterns = (0..SCRIPT_WORDS).map(|i| (format!("p{i}"), format!("w{i}"))).collect();
    let mut templates: BTreeMap<String, Vec<String>> = BTreeMap::new();
    templates.insert("ok".into(), vec![String::from("Okay."), String::from("Fine!")]);
    let mut questions = BTreeMap::new();
    let mut topics: Vec<TopicDoc> = Vec::new();
    let mut agenda_units: Vec<String> = Vec::new();
    let mut agenda_questions: Vec<String> = Vec::new();
    let roots = rng.random_range(2..=5);
    // 0 agenda, 1 sidetalk, 2 error handling
    let roles: Vec<u8> = (0..roots).map(|i| if i == 0 { 0 } else { [0, 0, 0, 1, 2][rng.random_range(0..5)] }).collect();
    let mut queue: Vec<(String, u8, usize)> = (0..roots).map(|i| (format!("t{i}"), roles[i], 0)).collect();
    let mut qi = 0;
    while qi < queue.len() {
        let (name, role, depth) = queue[qi].clone();
        qi += 1;
        let n_units = rng.random_range(1..=3);
        let mut units = Vec::new();
        for k in 0..n_units {
            let id = format!("{name}u{k}");
            let trigger = if name == "t0" && k == 0 {
                Trigger::ChatBegin
            } else {
                match rng.random_range(0..4) {
                    0 => Trigger::Always,
                    1 if !agenda_units.is_empty() => {
                        Trigger::Predicate(Predicate::Activated(agenda_units[rng.random_range(0..agenda_units.len())].clone()))
                    }
                    2 if !agenda_questions.is_empty() => Trigger::Predicate(Predicate::Answered(
                        agenda_questions[rng.random_range(0..agenda_questions.len())].clone(),
                    )),
                    _ => Trigger::Pattern(format!("p{}", rng.random_range(0..SCRIPT_WORDS))),
                }
            };
            let mut actions = vec![Action::Say("ok".into())];
            if role != 2 && rng.random_bool(0.4) {
                let q = format!("q{}", questions.len());
                templates.insert(format!("h{q}"), vec![format!("Question {q}?")]);
                questions.insert(
                    q.clone(),
                    Question { kind: QuestionKind::OpenEnded, heading: format!("h{q}"), outcome: None },
                );
                actions.push(Action::Ask(q.clone()));
                if role == 0 {
                    agenda_questions.push(q);
                }
            }
            let subtopic = if depth < 2 && rng.random_bool(0.25) {
                let s = format!("{name}s{k}");
                queue.push((s.clone(), role, depth + 1));
                Some(s)
            } else {
                None
            };
            let reusable = role != 0 && depth == 0 && matches!(trigger, Trigger::Pattern(_)) && rng.random_bool(0.2);
            if role == 0 {
                agenda_units.push(id.clone());
            }
            units.push(UnitDoc { id, trigger, actions, reusable, subtopic });
        }
        topics.push(TopicDoc { name, initiator: Initiator::Mixed, units, exit: None });
    }
    let mut agenda = Vec::new();
    let mut sidetalk = Vec::new();
    let mut error_handling = Vec::new();
    for (i, role) in roles.iter().enumerate() {
        let name = format!("t{i}");
        match role {
            1 => sidetalk.push(name),
            2 => error_handling.push(name),
            _ if i > 0 && rng.random_bool(0.3) => match agenda.last_mut() {
                Some(AgendaEntry::Unordered(g)) => g.push(name),
                _ => agenda.push(AgendaEntry::Unordered(vec![name])),
            },
            _ => agenda.push(AgendaEntry::Topic(name)),
        }
    }
    ScriptDocument {
        patterns,
        topics,
        questions,
        templates,
        functions: BTreeMap::new(),
        config: ConfigDoc { agenda, sidetalk, error_handling, default_fallback: rng.random_bool(0.8) },
    }
}
