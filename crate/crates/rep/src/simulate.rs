//! Scripted users driving the service end to end, with a plain-text transcript.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rep_core::dialogue::{Reply, UserEvent, Widget};
use serde::Deserialize;

use crate::eventlog::SessionStatus;
use crate::service::{CandidateReport, Service, ServiceError, TurnResponse};

/// What the simulated user says: an answer per question id, messages to send
/// while a given question is pending, and the tracked links to click.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserPlan {
    #[serde(default)]
    pub answers: BTreeMap<String, PlanAnswer>,
    #[serde(default)]
    pub interject: Vec<Interjection>,
    #[serde(default)]
    pub clicks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PlanAnswer {
    /// Likert point, or 0-based option of a single choice.
    Number(u32),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interjection {
    pub before: String,
    pub text: String,
}

#[derive(Debug, thiserror::Error)]
pub enum SimulateError {
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("the plan has no answer for `{0}`")]
    MissingAnswer(String),
    #[error("`{0}` needs a {1} answer")]
    WrongAnswer(String, &'static str),
    #[error("no question is pending and the interview is not complete")]
    Stuck,
    #[error("gave up after {0} turns")]
    TooLong(usize),
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub session_id: String,
    pub transcript: String,
    pub report: CandidateReport,
    pub turns: usize,
}

const MAX_TURNS: usize = 1000;

fn widget_line(w: &Widget) -> String {
    match w {
        Widget::OpenText { question } => format!("[open {question}]"),
        Widget::Likert { question, points } => format!("[likert {question} 1..{points}]"),
        Widget::Choice { question, options } => format!("[choice {question}: {}]", options.join(" | ")),
        Widget::Link { link, url, .. } => format!("[link {link} {url}]"),
    }
}

fn log_replies(out: &mut String, replies: &[Reply]) {
    for r in replies {
        let _ = write!(out, "rep[{}]: {}", r.unit, r.text);
        if let Some(w) = &r.widget {
            let _ = write!(out, "  {}", widget_line(w));
        }
        out.push('\n');
    }
}

/// The question the last reply left waiting for an answer.
fn pending(replies: &[Reply]) -> Option<&Widget> {
    replies.iter().rev().filter_map(|r| r.widget.as_ref()).find(|w| !matches!(w, Widget::Link { .. }))
}

/// Runs one interview to completion and returns its transcript and report.
pub fn simulate(svc: &Service, script: &str, persona: &str, plan: &UserPlan) -> Result<Simulation, SimulateError> {
    let mut out = String::new();
    let first = svc.create_session(script, Some(persona))?;
    let id = first.session_id.clone();
    let _ = writeln!(out, "session {id} script {script} persona {persona}");
    let mut interjections: Vec<&Interjection> = plan.interject.iter().collect();
    let mut clicked = BTreeSet::new();
    let mut last: TurnResponse = first;
    let mut turns = 0;
    loop {
        log_replies(&mut out, &last.replies);
        for r in &last.replies {
            if let Some(Widget::Link { link, .. }) = &r.widget {
                if plan.clicks.contains(link) && clicked.insert(link.clone()) {
                    let url = svc.track_click(&id, link)?;
                    let _ = writeln!(out, "click {link} -> {url}");
                }
            }
        }
        if last.status == SessionStatus::Completed {
            break;
        }
        turns += 1;
        if turns > MAX_TURNS {
            return Err(SimulateError::TooLong(MAX_TURNS));
        }
        let widget = pending(&last.replies).ok_or(SimulateError::Stuck)?.clone();
        let question = match &widget {
            Widget::OpenText { question } | Widget::Likert { question, .. } | Widget::Choice { question, .. } => {
                question.clone()
            }
            Widget::Link { .. } => unreachable!(),
        };
        if let Some(i) = interjections.iter().position(|x| x.before == question) {
            let text = interjections.remove(i).text.clone();
            let _ = writeln!(out, "user: {text}");
            last = svc.post_message(&id, UserEvent::Text { text })?;
            continue;
        }
        let answer = plan.answers.get(&question).ok_or_else(|| SimulateError::MissingAnswer(question.clone()))?;
        let event = match (&widget, answer) {
            (Widget::OpenText { .. }, PlanAnswer::Text(text)) => {
                let _ = writeln!(out, "user: {text}");
                UserEvent::Text { text: text.clone() }
            }
            (Widget::Likert { .. }, &PlanAnswer::Number(value)) => {
                let _ = writeln!(out, "user[{question}]: {value}");
                UserEvent::Likert { question: question.clone(), value }
            }
            (Widget::Choice { options, .. }, &PlanAnswer::Number(index)) => {
                let label = options.get(index as usize).map_or("?", |s| s.as_str());
                let _ = writeln!(out, "user[{question}]: {label}");
                UserEvent::Choice { question: question.clone(), index }
            }
            (Widget::OpenText { .. }, _) => return Err(SimulateError::WrongAnswer(question, "text")),
            _ => return Err(SimulateError::WrongAnswer(question, "numeric")),
        };
        last = svc.post_message(&id, event)?;
    }
    let report = svc.get_report(&id)?;
    Ok(Simulation { session_id: id, transcript: out, report, turns })
}
