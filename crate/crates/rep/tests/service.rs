mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::thread;

use common::*;
use rep::eventlog::{Event, EventKind, SessionStatus, SystemEvent};
use rep::service::{ManualClock, ServiceError, ServiceOptions, SortOrder};
use rep_core::dialogue::{UserEvent, Widget};
use rep_core::personality::TRAITS;

fn text(t: &str) -> UserEvent {
    UserEvent::Text { text: t.into() }
}

#[test]
fn first_reply_is_the_intro_question() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    let r = svc.create_session("demo_script", Some("kaya")).unwrap();
    assert_eq!(r.status, SessionStatus::Active);
    assert_eq!(r.session_id.len(), 36);
    let last = r.replies.last().unwrap();
    assert_eq!(last.unit, "I1");
    assert_eq!(last.widget, Some(Widget::OpenText { question: "name-q".into() }));
    let events = svc.events(&r.session_id).unwrap();
    assert_eq!(events.iter().map(|e| e.seq).collect::<Vec<_>>(), (1..=events.len() as u64).collect::<Vec<_>>());
    assert!(matches!(events[0].event, Event::System(SystemEvent::Created { .. })));
    assert_eq!(events[1].event.kind(), EventKind::System);
    assert!(events[2..].iter().all(|e| e.event.kind() == EventKind::RepMsg));
}

#[test]
fn session_ids_are_distinct_uuids() {
    let dir = tempfile::tempdir().unwrap();
    let svc = rep::service::Service::open(
        dir.path(),
        demo_assets(),
        Arc::new(rep::service::SystemClock),
        rep::service::IdSource::Os,
        ServiceOptions::default(),
    )
    .unwrap();
    let ids: BTreeSet<String> =
        (0..20).map(|_| svc.create_session("demo_script", Some("albert")).unwrap().session_id).collect();
    assert_eq!(ids.len(), 20);
    for id in &ids {
        let u = uuid::Uuid::parse_str(id).unwrap();
        assert_eq!(u.get_version_num(), 4);
    }
}

#[test]
fn unknown_script_and_persona() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    assert!(matches!(svc.create_session("nope", Some("kaya")), Err(ServiceError::UnknownScript(_))));
    assert!(matches!(svc.create_session("demo_script", Some("nope")), Err(ServiceError::UnknownPersona(_))));
    assert!(svc.store().session_ids().unwrap().is_empty());
}

#[test]
fn personas_alternate_when_not_given() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    let names: Vec<String> = (0..4)
        .map(|_| {
            let id = svc.create_session("demo_script", None).unwrap().session_id;
            svc.session(&id).unwrap().persona
        })
        .collect();
    assert_eq!(names, ["albert", "kaya", "albert", "kaya"]);
}

#[test]
fn unknown_session() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    assert!(matches!(svc.post_message("missing", text("hi")), Err(ServiceError::SessionNotFound(_))));
    assert!(matches!(svc.get_report("missing"), Err(ServiceError::SessionNotFound(_))));
    assert!(matches!(svc.post_message("../etc", text("hi")), Err(ServiceError::SessionNotFound(_))));
}

#[test]
fn out_of_range_likert_is_rejected_and_reasked() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    let id = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
    for t in ["Ada", "I am an analyst.", "I like puzzles."] {
        svc.post_message(&id, text(t)).unwrap();
    }
    let before = svc.events(&id).unwrap();
    let state = svc.session(&id).unwrap();
    assert_eq!(state.state.pending.as_deref(), Some("im-1"));
    for bad in [0, 8] {
        match svc.post_message(&id, UserEvent::Likert { question: "im-1".into(), value: bad }) {
            Err(ServiceError::InvalidAnswer { reask: Some(r), .. }) => {
                assert_eq!(r.widget, Some(Widget::Likert { question: "im-1".into(), points: 7 }));
            }
            other => panic!("{other:?}"),
        }
    }
    assert!(matches!(
        svc.post_message(&id, UserEvent::Likert { question: "im-2".into(), value: 3 }),
        Err(ServiceError::InvalidAnswer { .. })
    ));
    assert!(matches!(
        svc.post_message(&id, UserEvent::Choice { question: "im-1".into(), index: 0 }),
        Err(ServiceError::InvalidAnswer { .. })
    ));
    assert!(matches!(svc.post_message(&id, UserEvent::ChatBegin), Err(ServiceError::InvalidEvent(_))));
    assert_eq!(svc.events(&id).unwrap(), before);
    assert_eq!(svc.session(&id).unwrap(), state);
    let ok = svc.post_message(&id, UserEvent::Likert { question: "im-1".into(), value: 7 }).unwrap();
    assert_eq!(ok.replies.last().unwrap().unit, "IM2");
}

#[test]
fn text_at_a_widget_gets_error_handling_and_a_reask() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    let id = svc.create_session("demo_script", Some("albert")).unwrap().session_id;
    for t in ["Ada", "I am an analyst.", "I like puzzles."] {
        svc.post_message(&id, text(t)).unwrap();
    }
    let r = svc.post_message(&id, text("asdf qwerty")).unwrap();
    assert_eq!(r.replies.iter().map(|r| r.unit.as_str()).collect::<Vec<_>>(), ["E1", "IM1"]);
    assert_eq!(svc.session(&id).unwrap().state.pending.as_deref(), Some("im-1"));
}

#[test]
fn completed_sessions_refuse_messages_with_a_reply() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    let id = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
    assert!(matches!(svc.get_report(&id), Err(ServiceError::SessionNotComplete)));
    drive(&svc, &id, &demo_plan(), |e| panic!("{e}"));
    assert_eq!(svc.session(&id).unwrap().status, SessionStatus::Completed);
    match svc.post_message(&id, text("hello again")) {
        Err(ServiceError::SessionCompleted { reply }) => assert!(!reply.text.is_empty()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn clicks_are_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    let id = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
    let other = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
    let url = svc.track_click(&id, "article-2").unwrap();
    assert_eq!(url, "https://example.org/articles/staying-focused");
    let n = svc.events(&id).unwrap().len();
    assert_eq!(svc.track_click(&id, "article-2").unwrap(), url);
    assert_eq!(svc.events(&id).unwrap().len(), n);
    let rec = svc.session(&id).unwrap();
    assert_eq!(rec.state.outcomes.get(&"click.2".parse().unwrap()), Some(&1));
    assert!(svc.session(&other).unwrap().state.outcomes.is_empty());
    assert!(matches!(svc.track_click(&id, "im-1"), Err(ServiceError::UnknownLink(_))));
    assert!(matches!(svc.track_click(&id, "nope"), Err(ServiceError::UnknownLink(_))));
    assert!(matches!(svc.track_click("no-session", "article-1"), Err(ServiceError::UnknownLink(_))));
}

#[test]
fn report_has_every_trait_and_is_cached() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    let id = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
    drive(&svc, &id, &demo_plan(), |e| panic!("{e}"));
    let r = svc.get_report(&id).unwrap();
    assert_eq!(r.report.traits.len(), 35);
    assert_eq!(r.report.traits.iter().map(|(t, _)| t.as_str()).collect::<Vec<_>>(), TRAITS.map(|t| t.id));
    assert!(r.report.im.is_some() && r.report.wc.is_some() && r.report.wl.is_some());
    assert!(svc.store().session_dir(&id).join("report.json").exists());
    assert_eq!(svc.get_report(&id).unwrap(), r);
    drop(svc);
    let again = service(dir.path());
    assert_eq!(again.get_report(&id).unwrap(), r);
}

#[test]
fn traits_see_free_text_turns_only() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    let plan = demo_plan();
    let mut other = plan.clone();
    for (q, a) in other.answers.iter_mut() {
        if let rep::simulate::PlanAnswer::Number(n) = a {
            *n = if q.starts_with("im-") || q.starts_with("post-") { 1 } else { 0 };
        }
    }
    other.clicks.clear();
    let a = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
    let b = svc.create_session("demo_script", Some("albert")).unwrap().session_id;
    drive(&svc, &a, &plan, |e| panic!("{e}"));
    drive(&svc, &b, &other, |e| panic!("{e}"));
    let (ra, rb) = (svc.get_report(&a).unwrap(), svc.get_report(&b).unwrap());
    assert_ne!((ra.report.im, ra.report.wc, ra.report.wl), (rb.report.im, rb.report.wc, rb.report.wl));
    assert_eq!(ra.report.traits, rb.report.traits);

    let input = svc.trait_input(&a).unwrap();
    let texts: Vec<String> = svc
        .events(&a)
        .unwrap()
        .into_iter()
        .filter_map(|e| match e.event {
            Event::UserMsg { text } => Some(text),
            _ => None,
        })
        .collect();
    assert_eq!(input, texts.join("\n"));
    assert!(input.contains("data analyst") && !input.contains("Share REP"));
    assert_eq!(ra.word_count as usize, rep_core::text::word_count(&input));
    assert_eq!(ra.report.traits, svc.assets().traits.score(&input));
}

#[test]
fn results_sort_and_break_ties_by_id() {
    let dir = tempfile::tempdir().unwrap();
    let svc = service(dir.path());
    assert!(svc.list_results("im", SortOrder::Desc).unwrap().is_empty());
    assert!(matches!(svc.list_results("height", SortOrder::Desc), Err(ServiceError::UnknownSortKey(_))));
    let plan = demo_plan();
    let mut ids = Vec::new();
    for k in 0..5u32 {
        let mut p = plan.clone();
        for j in 1..=20 {
            p.answers.insert(format!("im-{j}"), rep::simulate::PlanAnswer::Number(1 + (j * (k + 1)) % 7));
        }
        p.answers.insert("weakness-action".into(), rep::simulate::PlanAnswer::Number(k % 3));
        let id = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
        drive(&svc, &id, &p, |e| panic!("{e}"));
        ids.push(id);
    }
    // an unfinished session is left out
    svc.create_session("demo_script", Some("kaya")).unwrap();
    for key in ["im", "wc", "wl", "warmth", "openness"] {
        for order in [SortOrder::Asc, SortOrder::Desc] {
            let rows = svc.list_results(key, order).unwrap();
            assert_eq!(rows.len(), 5);
            let value = |r: &rep::service::CandidateReport| match key {
                "im" => r.report.im.unwrap() as f64,
                "wc" => r.report.wc.unwrap() as f64,
                "wl" => r.report.wl.unwrap() as f64,
                t => r.trait_score(t).unwrap().theta,
            };
            for w in rows.windows(2) {
                let (a, b) = (value(&w[0]), value(&w[1]));
                let ordered = match order {
                    SortOrder::Asc => a < b,
                    SortOrder::Desc => a > b,
                };
                assert!(ordered || (a == b && w[0].session_id < w[1].session_id), "{key} {order:?}");
            }
        }
    }
}

#[test]
fn idle_sessions_are_abandoned() {
    let dir = tempfile::tempdir().unwrap();
    let clock = Arc::new(ManualClock::new(0, 1));
    let svc = open(dir.path(), clock.clone(), 3, ServiceOptions { session_ttl_ms: Some(60_000), snapshot_every: 1 });
    let a = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
    let b = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
    clock.advance(30_000);
    svc.post_message(&b, text("Bo")).unwrap();
    clock.advance(40_000);
    assert_eq!(svc.sweep().unwrap(), 1);
    assert_eq!(svc.session(&a).unwrap().status, SessionStatus::Abandoned);
    assert!(matches!(svc.post_message(&a, text("hello")), Err(ServiceError::SessionAbandoned)));
    svc.post_message(&b, text("I am Bo.")).unwrap();
    let last = svc.events(&a).unwrap().pop().unwrap();
    assert_eq!(last.event, Event::System(SystemEvent::Abandoned));
    assert!(svc.verify(&a).unwrap());
}

#[test]
fn concurrent_writers_are_serialized() {
    let dir = tempfile::tempdir().unwrap();
    let svc = Arc::new(service(dir.path()));
    let id = svc.create_session("demo_script", Some("kaya")).unwrap().session_id;
    svc.post_message(&id, text("Ada")).unwrap();
    // the open question takes the first text; the rest go to the follow-ups and
    // then to error handling at the likert items
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let (svc, id) = (svc.clone(), id.clone());
            thread::spawn(move || {
                for k in 0..5 {
                    svc.post_message(&id, text(&format!("writer {i} message {k}"))).unwrap();
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let events = svc.events(&id).unwrap();
    assert!(events.iter().enumerate().all(|(i, e)| e.seq == i as u64 + 1));
    assert_eq!(events.iter().filter(|e| e.event.kind() == EventKind::UserMsg).count(), 41);
    assert!(svc.verify(&id).unwrap());
    let rec = svc.session(&id).unwrap();
    assert_eq!(rec.last_seq, events.len() as u64);
    assert_eq!(rec.state.user_texts.len(), 41);
}
