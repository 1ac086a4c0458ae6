//! Interview scripts: the document shape and its validated, compiled form.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DialogueError;
use crate::pattern::{compile, CompileOptions, CompiledMatcher, Lemmatizer, PatternSource};
use crate::persona::ResponseTemplate;
use crate::scoring::{OutcomeSlot, IM_ITEMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initiator {
    #[default]
    Proactive,
    Reactive,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Importance {
    Agenda,
    Sidetalk,
    ErrorHandling,
}

/// Named checks over the session state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Predicate {
    Answered(String),
    Activated(String),
    AgendaComplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Trigger {
    ChatBegin,
    Pattern(String),
    Predicate(Predicate),
    Always,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Action {
    Say(String),
    Ask(String),
    Call(String),
    /// Presents a question's widget without waiting for an answer.
    Show(String),
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Answered(q) => write!(f, "answered:{q}"),
            Predicate::Activated(u) => write!(f, "activated:{u}"),
            Predicate::AgendaComplete => f.write_str("agenda-complete"),
        }
    }
}

impl FromStr for Predicate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            Some(("answered", q)) if !q.is_empty() => Ok(Predicate::Answered(q.into())),
            Some(("activated", u)) if !u.is_empty() => Ok(Predicate::Activated(u.into())),
            None if s == "agenda-complete" => Ok(Predicate::AgendaComplete),
            _ => Err(format!("unknown predicate `{s}`")),
        }
    }
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trigger::ChatBegin => f.write_str("chat-begin"),
            Trigger::Pattern(p) => write!(f, "pattern:{p}"),
            Trigger::Predicate(p) => write!(f, "{p}"),
            Trigger::Always => f.write_str("always"),
        }
    }
}

impl FromStr for Trigger {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "chat-begin" => Ok(Trigger::ChatBegin),
            "always" => Ok(Trigger::Always),
            _ => match s.split_once(':') {
                Some(("pattern", p)) if !p.is_empty() => Ok(Trigger::Pattern(p.into())),
                _ => s.parse().map(Trigger::Predicate).map_err(|_| format!("unknown trigger `{s}`")),
            },
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Say(t) => write!(f, "say:{t}"),
            Action::Ask(q) => write!(f, "ask:{q}"),
            Action::Call(c) => write!(f, "call:{c}"),
            Action::Show(q) => write!(f, "show:{q}"),
        }
    }
}

impl FromStr for Action {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, arg) = s.split_once(':').ok_or_else(|| format!("unknown action `{s}`"))?;
        if arg.is_empty() {
            return Err(format!("action `{s}` needs an argument"));
        }
        match kind {
            "say" => Ok(Action::Say(arg.into())),
            "ask" => Ok(Action::Ask(arg.into())),
            "call" => Ok(Action::Call(arg.into())),
            "show" => Ok(Action::Show(arg.into())),
            _ => Err(format!("unknown action `{s}`")),
        }
    }
}

macro_rules! string_serde {
    ($($t:ty),*) => {$(
        impl TryFrom<String> for $t {
            type Error = String;
            fn try_from(s: String) -> Result<Self, String> {
                s.parse()
            }
        }
        impl From<$t> for String {
            fn from(v: $t) -> String {
                v.to_string()
            }
        }
    )*};
}
string_serde!(Predicate, Trigger, Action);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceOption {
    pub label: String,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum QuestionKind {
    OpenEnded,
    Likert { points: u8 },
    SingleChoice { options: Vec<ChoiceOption> },
    Link { url: String, #[serde(default = "yes")] tracked: bool },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    #[serde(flatten)]
    pub kind: QuestionKind,
    /// Template id of the question text.
    pub heading: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<OutcomeSlot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitDoc {
    pub id: String,
    pub trigger: Trigger,
    pub actions: Vec<Action>,
    #[serde(default)]
    pub reusable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtopic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicDoc {
    pub name: String,
    #[serde(default)]
    pub initiator: Initiator,
    pub units: Vec<UnitDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit: Option<Predicate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AgendaEntry {
    Topic(String),
    Unordered(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub agenda: Vec<AgendaEntry>,
    #[serde(default)]
    pub sidetalk: Vec<String>,
    #[serde(default)]
    pub error_handling: Vec<String>,
    #[serde(default = "yes")]
    pub default_fallback: bool,
}

/// A script as authored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptDocument {
    #[serde(default)]
    pub patterns: BTreeMap<String, String>,
    pub topics: Vec<TopicDoc>,
    #[serde(default)]
    pub questions: BTreeMap<String, Question>,
    #[serde(default)]
    pub templates: BTreeMap<String, Vec<String>>,
    /// Canned replies of `call:` actions, by function name.
    #[serde(default)]
    pub functions: BTreeMap<String, String>,
    pub config: ConfigDoc,
}

/// Functions the engine implements itself.
pub const BUILTIN_FUNCTIONS: &[&str] = &["analyze-traits"];

pub const FALLBACK_TOPIC: &str = "default-fallback";
const FALLBACK_ALTERNATIVES: &[&str] = &[
    "Sorry, I did not catch that. Could you say it another way?",
    "Sorry, I did not get that :) Could you rephrase it for me?",
    "That is unclear. Please rephrase.",
];

#[derive(Debug, Clone, PartialEq)]
pub enum CompiledTrigger {
    ChatBegin,
    /// Index into the script matcher's patterns.
    Pattern(u32),
    Predicate(Predicate),
    Always,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub id: String,
    pub topic: usize,
    pub trigger: CompiledTrigger,
    pub actions: Vec<Action>,
    pub reusable: bool,
    pub subtopic: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topic {
    pub name: String,
    pub initiator: Initiator,
    pub importance: Importance,
    /// Unit indices in declaration order.
    pub units: Vec<usize>,
    /// The unit that enters this topic, for subtopics.
    pub parent: Option<usize>,
    pub exit: Option<Predicate>,
    /// Agenda group position; zero outside the agenda.
    pub order: usize,
}

/// A validated script with its trigger patterns compiled into one matcher.
#[derive(Debug, Clone, PartialEq)]
pub struct InterviewScript {
    pub topics: Vec<Topic>,
    pub units: Vec<Unit>,
    pub questions: BTreeMap<String, Question>,
    pub templates: BTreeMap<String, ResponseTemplate>,
    pub functions: BTreeMap<String, String>,
    /// Topic indices per agenda group, in temporal order.
    pub agenda: Vec<Vec<usize>>,
    pub matcher: CompiledMatcher,
    pub im_reverse: [bool; IM_ITEMS],
    unit_index: BTreeMap<String, usize>,
    topic_index: BTreeMap<String, usize>,
}

fn dangling(what: &str, name: &str) -> DialogueError {
    DialogueError::DanglingRef(format!("{what} `{name}`"))
}

fn schema(msg: String) -> DialogueError {
    DialogueError::Schema(msg)
}

impl InterviewScript {
    pub fn load(doc: &ScriptDocument, lemmatizer: Lemmatizer) -> Result<Self, DialogueError> {
        let mut doc = doc.clone();
        if doc.config.error_handling.is_empty() && doc.config.default_fallback {
            add_fallback(&mut doc)?;
        }

        let mut templates = BTreeMap::new();
        for (id, alts) in &doc.templates {
            let t = ResponseTemplate::new(id.clone(), alts.clone()).map_err(|e| schema(e.to_string()))?;
            templates.insert(id.clone(), t);
        }

        let sources: Vec<PatternSource> = doc.patterns.iter().map(|(id, text)| PatternSource::new(id.clone(), text.clone())).collect();
        let matcher = compile(&sources, lemmatizer, &CompileOptions::default()).map_err(|e| DialogueError::Pattern(e.to_string()))?;

        let mut topic_index = BTreeMap::new();
        for (i, t) in doc.topics.iter().enumerate() {
            if t.units.is_empty() {
                return Err(schema(format!("topic `{}` has no units", t.name)));
            }
            if topic_index.insert(t.name.clone(), i).is_some() {
                return Err(schema(format!("duplicate topic `{}`", t.name)));
            }
        }
        let mut unit_index = BTreeMap::new();
        for t in &doc.topics {
            for u in &t.units {
                if unit_index.insert(u.id.clone(), unit_index.len()).is_some() {
                    return Err(schema(format!("duplicate unit `{}`", u.id)));
                }
                if u.actions.is_empty() {
                    return Err(schema(format!("unit `{}` has no actions", u.id)));
                }
            }
        }

        for (qid, q) in &doc.questions {
            if !templates.contains_key(&q.heading) {
                return Err(dangling("template", &q.heading));
            }
            check_question(qid, q)?;
        }
        let mut im_reverse = [false; IM_ITEMS];
        let mut seen_slots = BTreeSet::new();
        for q in doc.questions.values() {
            if let Some(slot) = q.outcome {
                if !seen_slots.insert(slot.key()) {
                    return Err(schema(format!("outcome `{slot}` collected twice")));
                }
                if let OutcomeSlot::Im { item, reverse } = slot {
                    im_reverse[item as usize - 1] = reverse;
                }
            }
        }

        // importance classes from the config
        let mut importance: Vec<Option<(Importance, usize)>> = vec![None; doc.topics.len()];
        let mut agenda = Vec::new();
        let mut classify = |name: &str, class: Importance, order: usize| -> Result<usize, DialogueError> {
            let &i = topic_index.get(name).ok_or_else(|| dangling("topic", name))?;
            if importance[i].is_some() {
                return Err(schema(format!("topic `{name}` is configured twice")));
            }
            importance[i] = Some((class, order));
            Ok(i)
        };
        for (g, entry) in doc.config.agenda.iter().enumerate() {
            let names: Vec<&String> = match entry {
                AgendaEntry::Topic(n) => vec![n],
                AgendaEntry::Unordered(ns) => ns.iter().collect(),
            };
            let mut group = Vec::new();
            for n in names {
                group.push(classify(n, Importance::Agenda, g)?);
            }
            agenda.push(group);
        }
        for n in &doc.config.sidetalk {
            classify(n, Importance::Sidetalk, 0)?;
        }
        for n in &doc.config.error_handling {
            classify(n, Importance::ErrorHandling, 0)?;
        }

        // subtopic edges, checked for cycles before anything else about them
        let unit_topic: Vec<usize> =
            doc.topics.iter().enumerate().flat_map(|(ti, t)| core::iter::repeat_n(ti, t.units.len())).collect();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); doc.topics.len()];
        for t in &doc.topics {
            for u in &t.units {
                if let Some(s) = &u.subtopic {
                    let &si = topic_index.get(s).ok_or_else(|| dangling("topic", s))?;
                    children[topic_index[&t.name]].push(si);
                }
            }
        }
        check_cycles(&doc, &children)?;
        let mut parent: Vec<Option<usize>> = vec![None; doc.topics.len()];
        for (ui, u) in doc.topics.iter().flat_map(|t| t.units.iter()).enumerate() {
            if let Some(s) = &u.subtopic {
                let si = topic_index[s];
                if importance[si].is_some() {
                    return Err(schema(format!("subtopic `{s}` is also configured at top level")));
                }
                if parent[si].is_some() {
                    return Err(schema(format!("subtopic `{s}` has two parent units")));
                }
                parent[si] = Some(ui);
            }
        }
        for (i, t) in doc.topics.iter().enumerate() {
            if importance[i].is_none() && parent[i].is_none() {
                return Err(schema(format!("topic `{}` is neither configured nor a subtopic", t.name)));
            }
        }
        // subtopics inherit their root's class
        let root_class = |mut i: usize| loop {
            match parent[i] {
                Some(u) => i = unit_topic[u],
                None => return importance[i].unwrap(),
            }
        };

        let mut topics = Vec::with_capacity(doc.topics.len());
        let mut units = Vec::new();
        for (ti, t) in doc.topics.iter().enumerate() {
            let (class, order) = match importance[ti] {
                Some(c) => c,
                None => (root_class(ti).0, 0),
            };
            let mut ids = Vec::new();
            for u in &t.units {
                let trigger = match &u.trigger {
                    Trigger::ChatBegin => CompiledTrigger::ChatBegin,
                    Trigger::Always => CompiledTrigger::Always,
                    Trigger::Pattern(p) => CompiledTrigger::Pattern(matcher.pattern_index(p).ok_or_else(|| dangling("pattern", p))?),
                    Trigger::Predicate(p) => CompiledTrigger::Predicate(p.clone()),
                };
                if let Trigger::Predicate(p) = &u.trigger {
                    check_predicate(p, &doc, &unit_index)?;
                }
                for a in &u.actions {
                    match a {
                        Action::Say(tid) if !templates.contains_key(tid) => return Err(dangling("template", tid)),
                        Action::Ask(q) | Action::Show(q) if !doc.questions.contains_key(q) => return Err(dangling("question", q)),
                        Action::Call(f) if !doc.functions.contains_key(f) && !BUILTIN_FUNCTIONS.contains(&f.as_str()) => {
                            return Err(dangling("function", f))
                        }
                        _ => {}
                    }
                }
                ids.push(units.len());
                units.push(Unit {
                    id: u.id.clone(),
                    topic: ti,
                    trigger,
                    actions: u.actions.clone(),
                    reusable: u.reusable || class == Importance::ErrorHandling,
                    subtopic: u.subtopic.as_ref().map(|s| topic_index[s]),
                });
            }
            if let Some(p) = &t.exit {
                check_predicate(p, &doc, &unit_index)?;
            }
            topics.push(Topic {
                name: t.name.clone(),
                initiator: t.initiator,
                importance: class,
                units: ids,
                parent: parent[ti],
                exit: t.exit.clone(),
                order,
            });
        }

        Ok(InterviewScript {
            topics,
            units,
            questions: doc.questions.clone(),
            templates,
            functions: doc.functions.clone(),
            agenda,
            matcher,
            im_reverse,
            unit_index,
            topic_index,
        })
    }

    pub fn unit(&self, id: &str) -> Option<&Unit> {
        self.unit_index.get(id).map(|&i| &self.units[i])
    }

    pub fn topic(&self, name: &str) -> Option<usize> {
        self.topic_index.get(name).copied()
    }

    /// Names of agenda topics in temporal order.
    pub fn agenda_names(&self) -> Vec<&str> {
        self.agenda.iter().flatten().map(|&i| self.topics[i].name.as_str()).collect()
    }

    /// Unit ids of every agenda topic.
    pub fn agenda_units(&self) -> Vec<&str> {
        self.agenda.iter().flatten().flat_map(|&t| self.topics[t].units.iter().map(|&u| self.units[u].id.as_str())).collect()
    }

    /// The link question with the given id, if it is one.
    pub fn link(&self, id: &str) -> Option<&Question> {
        self.questions.get(id).filter(|q| matches!(q.kind, QuestionKind::Link { .. }))
    }
}

fn add_fallback(doc: &mut ScriptDocument) -> Result<(), DialogueError> {
    if doc.topics.iter().any(|t| t.name == FALLBACK_TOPIC) {
        return Err(schema(format!("topic name `{FALLBACK_TOPIC}` is reserved")));
    }
    doc.templates
        .entry(String::from(FALLBACK_TOPIC))
        .or_insert_with(|| FALLBACK_ALTERNATIVES.iter().map(|s| String::from(*s)).collect());
    doc.topics.push(TopicDoc {
        name: String::from(FALLBACK_TOPIC),
        initiator: Initiator::Reactive,
        units: vec![UnitDoc {
            id: String::from(FALLBACK_TOPIC),
            trigger: Trigger::Always,
            actions: vec![Action::Say(String::from(FALLBACK_TOPIC))],
            reusable: true,
            subtopic: None,
        }],
        exit: None,
    });
    doc.config.error_handling.push(String::from(FALLBACK_TOPIC));
    Ok(())
}

fn check_question(qid: &str, q: &Question) -> Result<(), DialogueError> {
    let bad = |m: &str| Err(schema(format!("question `{qid}`: {m}")));
    let values: Vec<u8> = match &q.kind {
        QuestionKind::OpenEnded => Vec::new(),
        QuestionKind::Likert { points } => {
            if !matches!(points, 5 | 7) {
                return bad("likert points must be 5 or 7");
            }
            (1..=*points).collect()
        }
        QuestionKind::SingleChoice { options } => {
            if options.len() < 2 {
                return bad("a single choice needs at least two options");
            }
            options.iter().map(|o| o.value).collect()
        }
        QuestionKind::Link { .. } => Vec::new(),
    };
    if let Some(slot) = q.outcome {
        let ok = match (&q.kind, slot) {
            (QuestionKind::Link { .. }, OutcomeSlot::Click(_)) => true,
            (QuestionKind::Link { .. }, _) | (_, OutcomeSlot::Click(_)) | (QuestionKind::OpenEnded, _) => false,
            _ => values.iter().all(|v| slot.range().contains(v)),
        };
        if !ok {
            return bad("answers do not fit its outcome slot");
        }
    }
    Ok(())
}

fn check_predicate(p: &Predicate, doc: &ScriptDocument, units: &BTreeMap<String, usize>) -> Result<(), DialogueError> {
    match p {
        Predicate::Answered(q) if !doc.questions.contains_key(q) => Err(dangling("question", q)),
        Predicate::Activated(u) if !units.contains_key(u) => Err(dangling("unit", u)),
        _ => Ok(()),
    }
}

fn check_cycles(doc: &ScriptDocument, children: &[Vec<usize>]) -> Result<(), DialogueError> {
    // depth-first search; 1 marks topics on the current path, 2 finished ones
    fn visit(t: usize, children: &[Vec<usize>], mark: &mut [u8]) -> Option<usize> {
        mark[t] = 1;
        for &c in &children[t] {
            match mark[c] {
                1 => return Some(c),
                0 => {
                    if let Some(x) = visit(c, children, mark) {
                        return Some(x);
                    }
                }
                _ => {}
            }
        }
        mark[t] = 2;
        None
    }
    let mut mark = vec![0u8; children.len()];
    for t in 0..children.len() {
        if mark[t] == 0 {
            if let Some(c) = visit(t, children, &mut mark) {
                return Err(DialogueError::Cycle(doc.topics[c].name.clone()));
            }
        }
    }
    Ok(())
}
