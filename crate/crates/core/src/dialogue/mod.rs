//! Topics, semantic units and the mixed-initiative flow over them.

pub mod engine;
pub mod script;

use alloc::string::String;

pub use engine::{
    is_complete, Analyzer, AnswerValue, Candidate, Engine, PriorAnalyzer, RankKey, Reply, SessionState, Stimulus,
    StepOutput, UserEvent, Widget, MAX_CHAIN,
};
pub use script::{
    Action, AgendaEntry, ChoiceOption, ConfigDoc, Importance, Initiator, InterviewScript, Predicate, Question,
    QuestionKind, ScriptDocument, TopicDoc, Trigger, UnitDoc, FALLBACK_TOPIC,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DialogueError {
    #[error("script schema: {0}")]
    Schema(String),
    #[error("unknown {0}")]
    DanglingRef(String),
    #[error("subtopic cycle through `{0}`")]
    Cycle(String),
    #[error("trigger pattern: {0}")]
    Pattern(String),
    #[error("no unit can respond")]
    NoCandidate,
    #[error("{0}")]
    InvalidEvent(String),
    #[error("invalid answer: {0}")]
    InvalidAnswer(String),
    #[error("unknown link `{0}`")]
    UnknownLink(String),
    #[error("rendering: {0}")]
    Render(String),
}
