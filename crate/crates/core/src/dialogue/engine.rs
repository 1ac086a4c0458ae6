//! The activation-ranking conversation engine: a pure transition function
//! from (state, event) to (state', replies).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::script::{Action, CompiledTrigger, Importance, InterviewScript, Predicate, QuestionKind};
use super::DialogueError;
use crate::persona::{render, Persona};
use crate::personality::{TraitScore, TRAITS};
use crate::scoring::OutcomeSlot;

/// Reactive and proactive units chained after the first one in a turn.
pub const MAX_CHAIN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UserEvent {
    ChatBegin,
    Text { text: String },
    /// 0-based option of a single-choice question.
    Choice { question: String, index: u32 },
    /// 1-based point of a likert question.
    Likert { question: String, value: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnswerValue {
    Text { text: String },
    Choice { index: u32, label: String, value: u8 },
    Likert { value: u8 },
}

impl AnswerValue {
    fn display(&self) -> String {
        match self {
            AnswerValue::Text { text } => text.clone(),
            AnswerValue::Choice { label, .. } => label.clone(),
            AnswerValue::Likert { value } => value.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Widget {
    OpenText { question: String },
    Likert { question: String, points: u8 },
    Choice { question: String, options: Vec<String> },
    Link { link: String, url: String, tracked: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reply {
    pub unit: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widget: Option<Widget>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SessionState {
    pub seed: u64,
    pub turn: u32,
    /// Every unit activated at least once.
    pub activated: BTreeSet<String>,
    /// Activations in order, reusable units included.
    pub log: Vec<String>,
    /// Entered subtopics, innermost last.
    pub stack: Vec<String>,
    /// First agenda group with unactivated proactive units.
    pub next_agenda: usize,
    pub pending: Option<String>,
    pub answers: BTreeMap<String, AnswerValue>,
    pub outcomes: BTreeMap<OutcomeSlot, u8>,
    pub vars: BTreeMap<String, String>,
    /// The user's free-text messages, in order.
    pub user_texts: Vec<String>,
    /// Tracked links clicked at least once.
    pub clicks: BTreeSet<String>,
}

impl SessionState {
    pub fn new(seed: u64) -> Self {
        SessionState { seed, ..Default::default() }
    }
}

/// What a unit's trigger is tested against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stimulus<'a> {
    Begin,
    /// A user message not consumed as an answer, as interned tokens.
    Message(&'a [u32]),
    Answered,
    /// Proactive continuation within the same turn.
    Chain,
}

/// Lower sorts first: class (0 stack-top subtopic, 1 agenda, 2 sidetalk,
/// 3 error handling), agenda group, topic declaration, unit declaration.
pub type RankKey = (u8, usize, usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub unit: usize,
    pub key: RankKey,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub state: SessionState,
    pub replies: Vec<Reply>,
    /// Units activated this turn, in order.
    pub activated: Vec<String>,
    /// Whether a text message was stored as the pending question's answer.
    pub answered: Option<String>,
}

/// Supplies trait scores for the `analyze-traits` built-in.
pub trait Analyzer {
    fn scores(&self, text: &str) -> Vec<(String, TraitScore)>;
}

/// Scores every trait at the prior.
pub struct PriorAnalyzer;

impl Analyzer for PriorAnalyzer {
    fn scores(&self, _text: &str) -> Vec<(String, TraitScore)> {
        TRAITS.iter().map(|t| (String::from(t.id), TraitScore { theta: 0.0, sd: 1.0, evidence_used: 0 })).collect()
    }
}

pub struct Engine<'a> {
    pub script: &'a InterviewScript,
    pub persona: &'a Persona,
    pub analyzer: &'a dyn Analyzer,
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    // splitmix64 finalizer over the combined words
    let mut z = seed ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ b.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn is_complete(script: &InterviewScript, state: &SessionState) -> bool {
    script.agenda_units().iter().all(|u| state.activated.contains(*u))
}

fn eval_predicate(script: &InterviewScript, state: &SessionState, p: &Predicate) -> bool {
    match p {
        Predicate::Answered(q) => state.answers.contains_key(q),
        Predicate::Activated(u) => state.activated.contains(u),
        Predicate::AgendaComplete => is_complete(script, state),
    }
}

fn subtopic_done(script: &InterviewScript, state: &SessionState, topic: usize) -> bool {
    let t = &script.topics[topic];
    let all = t.units.iter().filter(|&&u| !script.units[u].reusable).all(|&u| state.activated.contains(&script.units[u].id));
    all || t.exit.as_ref().is_some_and(|p| eval_predicate(script, state, p))
}

impl<'a> Engine<'a> {
    pub fn new(script: &'a InterviewScript, persona: &'a Persona, analyzer: &'a dyn Analyzer) -> Self {
        Engine { script, persona, analyzer }
    }

    fn triggered(&self, state: &SessionState, unit: usize, stimulus: Stimulus, hits: &BTreeSet<u32>) -> bool {
        match &self.script.units[unit].trigger {
            CompiledTrigger::ChatBegin => stimulus == Stimulus::Begin,
            CompiledTrigger::Pattern(p) => matches!(stimulus, Stimulus::Message(_)) && hits.contains(p),
            CompiledTrigger::Predicate(p) => eval_predicate(self.script, state, p),
            CompiledTrigger::Always => true,
        }
    }

    /// Ranked candidates for `stimulus`, best first.
    pub fn candidate_units(&self, state: &SessionState, stimulus: Stimulus) -> Vec<Candidate> {
        let hits: BTreeSet<u32> = match stimulus {
            Stimulus::Message(tokens) => {
                let mut h = BTreeSet::new();
                self.script.matcher.for_each_match(tokens, |m| {
                    h.insert(m.pattern);
                });
                h
            }
            _ => BTreeSet::new(),
        };
        let top = state.stack.last().and_then(|n| self.script.topic(n));
        let mut out = Vec::new();
        for (ti, t) in self.script.topics.iter().enumerate() {
            let class = if Some(ti) == top {
                0
            } else if t.parent.is_some() {
                // subtopics are only reachable from the top of the stack
                continue;
            } else {
                match t.importance {
                    Importance::Agenda => 1,
                    Importance::Sidetalk => 2,
                    Importance::ErrorHandling => 3,
                }
            };
            let allowed = match stimulus {
                Stimulus::Message(_) => true,
                Stimulus::Begin | Stimulus::Answered => class < 3,
                Stimulus::Chain => class < 2,
            };
            if !allowed {
                continue;
            }
            for (pos, &u) in t.units.iter().enumerate() {
                let unit = &self.script.units[u];
                if !unit.reusable && state.activated.contains(&unit.id) {
                    continue;
                }
                if self.triggered(state, u, stimulus, &hits) {
                    out.push(Candidate { unit: u, key: (class, t.order, ti, pos) });
                }
            }
        }
        out.sort_by_key(|c| c.key);
        out
    }

    fn slots(&self, state: &SessionState) -> BTreeMap<String, String> {
        let mut m: BTreeMap<String, String> = state.answers.iter().map(|(k, v)| (k.clone(), v.display())).collect();
        m.extend(state.vars.iter().map(|(k, v)| (k.clone(), v.clone())));
        m
    }

    fn render_template(&self, state: &SessionState, id: &str, salt: u64) -> Result<String, DialogueError> {
        let t = &self.script.templates[id];
        let seed = mix(state.seed, state.turn as u64, salt);
        render(t, self.persona, &self.slots(state), seed).map_err(|e| DialogueError::Render(e.to_string()))
    }

    fn question_reply(&self, state: &SessionState, unit: &str, qid: &str, salt: u64) -> Result<Reply, DialogueError> {
        let q = &self.script.questions[qid];
        let text = self.render_template(state, &q.heading, salt)?;
        let question = String::from(qid);
        let widget = match &q.kind {
            QuestionKind::OpenEnded => Widget::OpenText { question },
            QuestionKind::Likert { points } => Widget::Likert { question, points: *points },
            QuestionKind::SingleChoice { options } => {
                Widget::Choice { question, options: options.iter().map(|o| o.label.clone()).collect() }
            }
            QuestionKind::Link { url, tracked } => Widget::Link { link: question, url: url.clone(), tracked: *tracked },
        };
        Ok(Reply { unit: String::from(unit), text, widget: Some(widget) })
    }

    fn call(&self, state: &mut SessionState, name: &str) -> Option<String> {
        if name == "analyze-traits" {
            let text = state.user_texts.join("\n");
            let scores = self.analyzer.scores(&text);
            let pick = |facets: bool, best_high: bool| {
                let mut best: Option<(f64, &str)> = None;
                for (id, s) in &scores {
                    let Some(info) = TRAITS.iter().find(|t| t.id == id) else { continue };
                    if info.domain.is_some() != facets {
                        continue;
                    }
                    let v = if best_high { s.theta } else { -s.theta };
                    if best.is_none_or(|(b, _)| v > b) {
                        best = Some((v, info.name));
                    }
                }
                best.map_or_else(String::new, |(_, n)| n.to_lowercase())
            };
            state.vars.insert("top_strength".into(), pick(true, true));
            state.vars.insert("top_weakness".into(), pick(true, false));
            state.vars.insert("top_trait".into(), pick(false, true));
            return None;
        }
        self.script.functions.get(name).cloned()
    }

    fn activate(&self, state: &mut SessionState, unit: usize, replies: &mut Vec<Reply>) -> Result<(), DialogueError> {
        let u = &self.script.units[unit];
        state.activated.insert(u.id.clone());
        state.log.push(u.id.clone());
        for a in &u.actions {
            let salt = replies.len() as u64;
            match a {
                Action::Say(t) => {
                    let text = self.render_template(state, t, salt)?;
                    replies.push(Reply { unit: u.id.clone(), text, widget: None });
                }
                Action::Ask(q) | Action::Show(q) => {
                    replies.push(self.question_reply(state, &u.id, q, salt)?);
                    let is_link = matches!(self.script.questions[q].kind, QuestionKind::Link { .. });
                    if matches!(a, Action::Ask(_)) && !is_link {
                        state.pending = Some(q.clone());
                    }
                }
                Action::Call(f) => {
                    if let Some(text) = self.call(state, f) {
                        replies.push(Reply { unit: u.id.clone(), text, widget: None });
                    }
                }
            }
        }
        if let Some(s) = u.subtopic {
            state.stack.push(self.script.topics[s].name.clone());
        }
        while let Some(top) = state.stack.last().and_then(|n| self.script.topic(n)) {
            if !subtopic_done(self.script, state, top) {
                break;
            }
            state.stack.pop();
        }
        while state.next_agenda < self.script.agenda.len() && self.group_done(state, state.next_agenda) {
            state.next_agenda += 1;
        }
        Ok(())
    }

    /// Whether every proactive unit of an agenda group has been activated.
    fn group_done(&self, state: &SessionState, group: usize) -> bool {
        self.script.agenda[group].iter().all(|&t| {
            self.script.topics[t].units.iter().all(|&x| {
                let u = &self.script.units[x];
                matches!(u.trigger, CompiledTrigger::Pattern(_)) || state.activated.contains(&u.id)
            })
        })
    }

    /// Activates the best candidate, then keeps the agenda moving while no question is pending.
    fn run(
        &self,
        state: &mut SessionState,
        stimulus: Stimulus,
        replies: &mut Vec<Reply>,
        activated: &mut Vec<String>,
    ) -> Result<bool, DialogueError> {
        let Some(first) = self.candidate_units(state, stimulus).first().copied() else {
            return Ok(false);
        };
        self.activate(state, first.unit, replies)?;
        activated.push(self.script.units[first.unit].id.clone());
        for _ in 0..MAX_CHAIN {
            if state.pending.is_some() || is_complete(self.script, state) {
                break;
            }
            let Some(next) = self.candidate_units(state, Stimulus::Chain).first().copied() else { break };
            self.activate(state, next.unit, replies)?;
            activated.push(self.script.units[next.unit].id.clone());
        }
        Ok(true)
    }

    fn store_answer(&self, state: &mut SessionState, qid: &str, value: AnswerValue) {
        if let Some(slot) = self.script.questions[qid].outcome {
            let v = match &value {
                AnswerValue::Choice { value, .. } => Some(*value),
                AnswerValue::Likert { value } => Some(*value),
                AnswerValue::Text { .. } => None,
            };
            if let Some(v) = v {
                state.outcomes.insert(slot.key(), v);
            }
        }
        state.answers.insert(String::from(qid), value);
        state.pending = None;
    }

    pub fn step(&self, state: &SessionState, event: &UserEvent) -> Result<StepOutput, DialogueError> {
        let mut st = state.clone();
        let mut replies = Vec::new();
        let mut activated = Vec::new();
        let mut answered = None;
        match event {
            UserEvent::ChatBegin => {
                if state.turn != 0 {
                    return Err(DialogueError::InvalidEvent(String::from("the chat has already begun")));
                }
                if !self.run(&mut st, Stimulus::Begin, &mut replies, &mut activated)? {
                    return Err(DialogueError::NoCandidate);
                }
            }
            UserEvent::Text { text } => {
                st.user_texts.push(text.clone());
                let tokens = self.script.matcher.intern_text(text);
                match st.pending.clone() {
                    None => {
                        if !self.run(&mut st, Stimulus::Message(&tokens), &mut replies, &mut activated)? {
                            return Err(DialogueError::NoCandidate);
                        }
                    }
                    Some(q) => {
                        // a pattern-triggered agenda or subtopic unit that asks nothing back
                        // answers a question from the user; it is handled first and the
                        // pending question asked again
                        let intercept = self.candidate_units(&st, Stimulus::Message(&tokens)).into_iter().find(|c| {
                            let u = &self.script.units[c.unit];
                            c.key.0 <= 1
                                && matches!(u.trigger, CompiledTrigger::Pattern(_))
                                && !u.actions.iter().any(|a| matches!(a, Action::Ask(_)))
                        });
                        let open = matches!(self.script.questions[&q].kind, QuestionKind::OpenEnded);
                        if let Some(c) = intercept {
                            self.activate(&mut st, c.unit, &mut replies)?;
                            activated.push(self.script.units[c.unit].id.clone());
                            self.reask(&mut st, &q, &mut replies)?;
                        } else if open {
                            self.store_answer(&mut st, &q, AnswerValue::Text { text: text.clone() });
                            answered = Some(q);
                            self.run(&mut st, Stimulus::Answered, &mut replies, &mut activated)?;
                        } else {
                            // text where a widget answer is expected: error handling only
                            let err = self
                                .candidate_units(&st, Stimulus::Message(&tokens))
                                .into_iter()
                                .find(|c| c.key.0 == 3)
                                .ok_or(DialogueError::NoCandidate)?;
                            self.activate(&mut st, err.unit, &mut replies)?;
                            activated.push(self.script.units[err.unit].id.clone());
                            self.reask(&mut st, &q, &mut replies)?;
                        }
                    }
                }
            }
            UserEvent::Choice { question, index } => {
                let q = self.expect_pending(&st, question)?;
                let QuestionKind::SingleChoice { options } = &q.kind else {
                    return Err(DialogueError::InvalidAnswer(format!("`{question}` is not a single choice")));
                };
                let o = options
                    .get(*index as usize)
                    .ok_or_else(|| DialogueError::InvalidAnswer(format!("`{question}` has no option {index}")))?;
                let v = AnswerValue::Choice { index: *index, label: o.label.clone(), value: o.value };
                self.store_answer(&mut st, question, v);
                answered = Some(question.clone());
                self.run(&mut st, Stimulus::Answered, &mut replies, &mut activated)?;
            }
            UserEvent::Likert { question, value } => {
                let q = self.expect_pending(&st, question)?;
                let QuestionKind::Likert { points } = q.kind else {
                    return Err(DialogueError::InvalidAnswer(format!("`{question}` is not a likert item")));
                };
                if !(1..=points as u32).contains(value) {
                    return Err(DialogueError::InvalidAnswer(format!("`{question}` takes 1 to {points}, got {value}")));
                }
                self.store_answer(&mut st, question, AnswerValue::Likert { value: *value as u8 });
                answered = Some(question.clone());
                self.run(&mut st, Stimulus::Answered, &mut replies, &mut activated)?;
            }
        }
        st.turn += 1;
        Ok(StepOutput { state: st, replies, activated, answered })
    }

    fn expect_pending(&self, st: &SessionState, question: &str) -> Result<&super::script::Question, DialogueError> {
        if st.pending.as_deref() != Some(question) {
            return Err(DialogueError::InvalidAnswer(format!("`{question}` is not the pending question")));
        }
        Ok(&self.script.questions[question])
    }

    fn reask(&self, st: &mut SessionState, q: &str, replies: &mut Vec<Reply>) -> Result<(), DialogueError> {
        let unit = st.log.iter().rev().find(|u| {
            self.script.unit(u).is_some_and(|x| x.actions.iter().any(|a| matches!(a, Action::Ask(x) if x == q)))
        });
        let unit = unit.cloned().unwrap_or_default();
        let r = self.question_reply(st, &unit, q, replies.len() as u64)?;
        replies.push(r);
        Ok(())
    }

    /// The question a rejected widget answer should present again.
    pub fn pending_reply(&self, st: &SessionState) -> Result<Option<Reply>, DialogueError> {
        match &st.pending {
            None => Ok(None),
            Some(q) => {
                let mut out = Vec::new();
                self.reask(&mut st.clone(), q, &mut out)?;
                Ok(out.pop())
            }
        }
    }

    /// Records a tracked-link click. Returns whether it was the first one.
    pub fn record_click(&self, state: &SessionState, link: &str) -> Result<(SessionState, bool), DialogueError> {
        let q = self.script.link(link).ok_or_else(|| DialogueError::UnknownLink(String::from(link)))?;
        let mut st = state.clone();
        let first = st.clicks.insert(String::from(link));
        if first {
            if let Some(slot) = q.outcome {
                st.outcomes.insert(slot.key(), 1);
            }
        }
        Ok((st, first))
    }
}
