#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rep::eventlog::SessionStatus;
use rep::service::{AssetPaths, Assets, IdSource, ManualClock, Service, ServiceError, ServiceOptions};
use rep::simulate::{PlanAnswer, UserPlan};
use rep_core::dialogue::{QuestionKind, UserEvent};

pub fn asset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets").join(name)
}

pub fn demo_paths() -> AssetPaths {
    AssetPaths {
        scripts: vec![asset("demo_script.toml")],
        personas: vec![asset("albert.toml"), asset("kaya.toml")],
        lexicon: Some(asset("lexicon.tsv")),
        model: Some(asset("model.txt")),
    }
}

pub fn demo_assets() -> Assets {
    Assets::load(&demo_paths()).unwrap()
}

pub fn demo_plan() -> UserPlan {
    toml::from_str(&std::fs::read_to_string(asset("demo_user.toml")).unwrap()).unwrap()
}

pub fn open(dir: &Path, clock: Arc<ManualClock>, seed: u64, opts: ServiceOptions) -> Service {
    Service::open(dir, demo_assets(), clock, IdSource::seeded(seed), opts).unwrap()
}

pub fn service(dir: &Path) -> Service {
    open(dir, Arc::new(ManualClock::new(1_000, 10)), 1, ServiceOptions::default())
}

/// The next input the plan gives for the session's current state, if any.
pub fn next_input(svc: &Service, id: &str, plan: &UserPlan, interjected: &mut Vec<String>) -> Option<UserEvent> {
    let rec = svc.session(id).unwrap();
    if rec.status != SessionStatus::Active {
        return None;
    }
    let q = rec.state.pending.clone().expect("a question is pending");
    if let Some(x) = plan.interject.iter().find(|x| x.before == q && !interjected.contains(&x.before)) {
        interjected.push(x.before.clone());
        return Some(UserEvent::Text { text: x.text.clone() });
    }
    let assets = svc.assets();
    let kind = &assets.scripts[&rec.script].questions[&q].kind;
    Some(match (kind, &plan.answers[&q]) {
        (QuestionKind::OpenEnded, PlanAnswer::Text(t)) => UserEvent::Text { text: t.clone() },
        (QuestionKind::Likert { .. }, PlanAnswer::Number(v)) => UserEvent::Likert { question: q, value: *v },
        (QuestionKind::SingleChoice { .. }, PlanAnswer::Number(i)) => UserEvent::Choice { question: q, index: *i },
        other => panic!("plan answer does not fit {other:?}"),
    })
}

/// Answers pending questions from the plan until the session completes, clicking
/// the plan's links once the post-survey starts. `on_error` sees every failed call.
pub fn drive(svc: &Service, id: &str, plan: &UserPlan, mut on_error: impl FnMut(&ServiceError)) {
    let mut interjected = Vec::new();
    let mut clicked = false;
    for _ in 0..500 {
        let rec = svc.session(id).unwrap();
        if !clicked && rec.state.activated.contains("K1") {
            for link in &plan.clicks {
                if let Err(e) = svc.track_click(id, link) {
                    on_error(&e);
                }
            }
            clicked = true;
        }
        let Some(ev) = next_input(svc, id, plan, &mut interjected) else { return };
        if let Err(e) = svc.post_message(id, ev) {
            on_error(&e);
        }
    }
    panic!("the session did not complete");
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// The demo interview as the `simulate` command runs it for `persona`.
pub fn simulate_demo(dir: &Path, persona: &str) -> (Service, rep::simulate::Simulation) {
    let svc = Service::open(
        dir,
        demo_assets(),
        Arc::new(ManualClock::new(0, 1000)),
        IdSource::seeded(1),
        ServiceOptions::default(),
    )
    .unwrap();
    let sim = rep::simulate::simulate(&svc, "demo_script", persona, &demo_plan()).unwrap();
    (svc, sim)
}

/// Compares `got` with the golden file `name`; `REP_BLESS=1` rewrites it instead.
pub fn check_golden(name: &str, got: &str) -> bool {
    let path = golden_dir().join(name);
    if std::env::var("REP_BLESS").is_ok_and(|v| v == "1") {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, got).unwrap();
        return true;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    want == got
}

/// Agenda units whose activation count is not exactly one.
pub fn agenda_miscounts(svc: &Service, id: &str) -> Vec<(String, usize)> {
    let rec = svc.session(id).unwrap();
    let assets = svc.assets();
    let script = &assets.scripts[&rec.script];
    script
        .agenda_units()
        .into_iter()
        .map(|u| (u.to_string(), rec.state.log.iter().filter(|l| l.as_str() == u).count()))
        .filter(|(_, n)| *n != 1)
        .collect()
}
