//! Interview sessions over the dialogue engine, persisted as event logs.
//!
//! The log is the source of truth. Every mutation appends the input event and
//! the replies it produced, then (periodically) a snapshot. A session whose
//! write failed is dropped from memory and rebuilt from its log on next use.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rep_core::dialogue::{is_complete, DialogueError, Engine, InterviewScript, Reply, UserEvent};
use rep_core::pattern::Lemmatizer;
use rep_core::persona::Persona;
use rep_core::personality::{trait_index, TraitScore};
use rep_core::scoring::ScoreReport;
use rep_core::text::word_count;
use serde::{Deserialize, Serialize};

use crate::eventlog::{
    Event, EventRecord, Failpoint, SessionRecord, SessionStatus, Store, StoreError, SystemEvent,
};
use crate::formats::{self, FormatError};
use crate::traits::TraitEngine;

pub const API_VERSION: u32 = 1;

/// Scripts, personas and the trait engine, shared immutably by sessions.
pub struct Assets {
    pub scripts: BTreeMap<String, Arc<InterviewScript>>,
    pub personas: BTreeMap<String, Arc<Persona>>,
    pub traits: Arc<TraitEngine>,
}

/// Files to load [`Assets`] from; ids are file stems unless given as `id=path`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AssetPaths {
    pub scripts: Vec<PathBuf>,
    pub personas: Vec<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

fn asset_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

impl Assets {
    pub fn load(paths: &AssetPaths) -> Result<Self, ServiceError> {
        let asset = |e: FormatError| ServiceError::Asset(e.to_string());
        let mut scripts = BTreeMap::new();
        for p in &paths.scripts {
            let doc = formats::parse_script(&formats::read_text(p).map_err(asset)?).map_err(asset)?;
            let script = InterviewScript::load(&doc, Lemmatizer::Rules)
                .map_err(|e| ServiceError::Asset(format!("{}: {e}", p.display())))?;
            scripts.insert(asset_id(p), Arc::new(script));
        }
        let mut personas = BTreeMap::new();
        for p in &paths.personas {
            let persona = formats::parse_persona(&formats::read_text(p).map_err(asset)?).map_err(asset)?;
            personas.insert(asset_id(p), Arc::new(persona));
        }
        let traits = match (&paths.lexicon, &paths.model) {
            (Some(l), Some(m)) => TraitEngine::load(l, m).map_err(asset)?,
            (None, None) => TraitEngine::prior(),
            _ => return Err(ServiceError::Asset("the lexicon and the model are given together".into())),
        };
        Ok(Assets { scripts, personas, traits: Arc::new(traits) })
    }
}

pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
    }
}

/// A clock that only moves when told to; each reading advances it by `step`.
pub struct ManualClock {
    now: AtomicU64,
    step: u64,
}

impl ManualClock {
    pub fn new(start: u64, step: u64) -> Self {
        ManualClock { now: AtomicU64::new(start), step }
    }

    pub fn advance(&self, ms: u64) {
        self.now.fetch_add(ms, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.now.fetch_add(self.step, Ordering::SeqCst)
    }
}

/// Session ids (UUIDs from 16 random bytes) and dialogue seeds.
pub enum IdSource {
    Os,
    Seeded(ChaCha8Rng),
}

impl IdSource {
    pub fn seeded(seed: u64) -> Self {
        IdSource::Seeded(ChaCha8Rng::seed_from_u64(seed))
    }

    fn next(&mut self) -> (String, u64) {
        let mut bytes = [0u8; 16];
        let seed = match self {
            IdSource::Os => {
                let mut r = rand::rng();
                r.fill_bytes(&mut bytes);
                r.random()
            }
            IdSource::Seeded(r) => {
                r.fill_bytes(&mut bytes);
                r.random()
            }
        };
        (uuid::Builder::from_random_bytes(bytes).into_uuid().to_string(), seed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ServiceOptions {
    /// Sessions idle longer than this are marked abandoned.
    pub session_ttl_ms: Option<u64>,
    /// Write a snapshot after this many events (1 = after every turn).
    pub snapshot_every: u64,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions { session_ttl_ms: None, snapshot_every: 1 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown script `{0}`")]
    UnknownScript(String),
    #[error("unknown persona `{0}`")]
    UnknownPersona(String),
    #[error("no session `{0}`")]
    SessionNotFound(String),
    #[error("the interview is already complete")]
    SessionCompleted { reply: Reply },
    #[error("the session was abandoned")]
    SessionAbandoned,
    #[error("{message}")]
    InvalidAnswer { message: String, reask: Option<Reply> },
    #[error("{0}")]
    InvalidEvent(String),
    #[error("unknown link `{0}`")]
    UnknownLink(String),
    #[error("the interview is not complete yet")]
    SessionNotComplete,
    #[error("unknown sort key `{0}`")]
    UnknownSortKey(String),
    #[error("no reply is possible for this input")]
    NoCandidate,
    #[error("asset: {0}")]
    Asset(String),
    #[error("storage: {0}")]
    Storage(#[from] StoreError),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownScript(_) => "unknown_script",
            ServiceError::UnknownPersona(_) => "unknown_persona",
            ServiceError::SessionNotFound(_) => "session_not_found",
            ServiceError::SessionCompleted { .. } => "session_completed",
            ServiceError::SessionAbandoned => "session_abandoned",
            ServiceError::InvalidAnswer { .. } => "invalid_answer",
            ServiceError::InvalidEvent(_) => "invalid_event",
            ServiceError::UnknownLink(_) => "unknown_link",
            ServiceError::SessionNotComplete => "session_not_complete",
            ServiceError::UnknownSortKey(_) => "unknown_sort_key",
            ServiceError::NoCandidate => "no_candidate",
            ServiceError::Asset(_) => "asset",
            ServiceError::Storage(_) => "storage",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnResponse {
    pub api_version: u32,
    pub session_id: String,
    pub status: SessionStatus,
    pub replies: Vec<Reply>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub api_version: u32,
    pub session_id: String,
    pub persona: String,
    pub report: ScoreReport,
    /// Words in the user's free-text turns, the only input to trait inference.
    pub word_count: u32,
}

impl CandidateReport {
    pub fn trait_score(&self, trait_id: &str) -> Option<TraitScore> {
        self.report.traits.iter().find(|(id, _)| id == trait_id).map(|(_, s)| *s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    Asc,
    #[default]
    Desc,
}

struct Live {
    record: SessionRecord,
    assets: Arc<Assets>,
    script: Arc<InterviewScript>,
    persona: Arc<Persona>,
    since_snapshot: u64,
    report: Option<CandidateReport>,
}

impl Live {
    fn engine(&self) -> Engine<'_> {
        Engine::new(&self.script, &self.persona, self.assets.traits.as_ref())
    }
}

/// Folds one input event into a record. Reply events are not inputs.
fn apply(live: &Live, record: &SessionRecord, event: &Event) -> Result<(SessionRecord, Vec<Reply>), ServiceError> {
    let engine = live.engine();
    let mut next = record.clone();
    let step = |ev: &UserEvent| engine.step(&record.state, ev).map_err(|e| dialogue_error(&engine, record, e));
    let replies = match event {
        Event::System(SystemEvent::Created { .. }) => {
            return Err(ServiceError::InvalidEvent("a session is created once".into()));
        }
        Event::System(SystemEvent::ChatBegin) => {
            let out = step(&UserEvent::ChatBegin)?;
            next.state = out.state;
            out.replies
        }
        Event::System(SystemEvent::Abandoned) => {
            next.status = SessionStatus::Abandoned;
            Vec::new()
        }
        Event::UserMsg { text } => {
            let out = step(&UserEvent::Text { text: text.clone() })?;
            next.state = out.state;
            out.replies
        }
        Event::WidgetAnswer(ev) => {
            if matches!(ev, UserEvent::Text { .. } | UserEvent::ChatBegin) {
                return Err(ServiceError::InvalidEvent("a widget answer is a choice or a likert value".into()));
            }
            let out = step(ev)?;
            next.state = out.state;
            out.replies
        }
        Event::LinkClick { link } => {
            let (state, _) = engine.record_click(&record.state, link).map_err(|e| dialogue_error(&engine, record, e))?;
            next.state = state;
            Vec::new()
        }
        Event::RepMsg(_) => return Err(ServiceError::InvalidEvent("replies are not inputs".into())),
    };
    if next.status == SessionStatus::Active && is_complete(&live.script, &next.state) {
        next.status = SessionStatus::Completed;
    }
    Ok((next, replies))
}

fn dialogue_error(engine: &Engine, record: &SessionRecord, e: DialogueError) -> ServiceError {
    match e {
        DialogueError::InvalidAnswer(message) => {
            ServiceError::InvalidAnswer { message, reask: engine.pending_reply(&record.state).ok().flatten() }
        }
        DialogueError::InvalidEvent(m) => ServiceError::InvalidEvent(m),
        DialogueError::UnknownLink(l) => ServiceError::UnknownLink(l),
        DialogueError::NoCandidate => ServiceError::NoCandidate,
        other => ServiceError::InvalidEvent(other.to_string()),
    }
}

pub struct Service {
    assets: RwLock<Arc<Assets>>,
    store: Store,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Live>>>>,
    clock: Arc<dyn Clock>,
    ids: Mutex<IdSource>,
    opts: ServiceOptions,
    next_persona: AtomicUsize,
}

impl Service {
    /// Opens the data directory and rebuilds every stored session from its log.
    pub fn open(
        data_dir: &Path,
        assets: Assets,
        clock: Arc<dyn Clock>,
        ids: IdSource,
        opts: ServiceOptions,
    ) -> Result<Self, ServiceError> {
        let store = Store::open(data_dir)?;
        let svc = Service {
            assets: RwLock::new(Arc::new(assets)),
            store,
            sessions: RwLock::new(BTreeMap::new()),
            clock,
            ids: Mutex::new(ids),
            opts,
            next_persona: AtomicUsize::new(0),
        };
        for id in svc.store.session_ids()? {
            let live = svc.recover(&id)?;
            svc.sessions.write().insert(id, Arc::new(Mutex::new(live)));
        }
        Ok(svc)
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn assets(&self) -> Arc<Assets> {
        self.assets.read().clone()
    }

    /// Swaps in new assets for sessions created from now on.
    pub fn reload(&self, assets: Assets) {
        *self.assets.write() = Arc::new(assets);
    }

    fn resolve(assets: &Arc<Assets>, script: &str, persona: &str) -> Result<(Arc<InterviewScript>, Arc<Persona>), ServiceError> {
        let s = assets.scripts.get(script).ok_or_else(|| ServiceError::UnknownScript(script.into()))?;
        let p = assets.personas.get(persona).ok_or_else(|| ServiceError::UnknownPersona(persona.into()))?;
        Ok((s.clone(), p.clone()))
    }

    /// Rebuilds a session from its log, starting at the snapshot when it is usable.
    /// Replies missing after the last input (a write cut short) are re-derived and appended.
    fn recover(&self, id: &str) -> Result<Live, ServiceError> {
        self.rebuild(id, true, None)
    }

    /// With `persist` unset the fold starts from scratch, stops after `upto`
    /// events and touches no files.
    fn rebuild(&self, id: &str, persist: bool, upto: Option<u64>) -> Result<Live, ServiceError> {
        let mut events = if persist { self.store.repair(id)? } else { self.store.read_events(id)? };
        if let Some(n) = upto {
            events.truncate(n as usize);
        }
        let corrupt = |line: usize, message: &str| {
            ServiceError::Storage(StoreError::Corrupt {
                path: self.store.session_dir(id),
                line,
                message: message.into(),
            })
        };
        let Some(EventRecord { ts, event: Event::System(SystemEvent::Created { script, persona, seed }), .. }) =
            events.first()
        else {
            return Err(corrupt(1, "the log does not start with session creation"));
        };
        let assets = self.assets();
        let (s, p) = Self::resolve(&assets, script, persona)?;
        let mut live = Live {
            record: SessionRecord {
                session_id: id.into(),
                script: script.clone(),
                persona: persona.clone(),
                status: SessionStatus::Active,
                created: *ts,
                updated: *ts,
                last_seq: 1,
                state: rep_core::dialogue::SessionState::new(*seed),
            },
            assets,
            script: s,
            persona: p,
            since_snapshot: 0,
            report: None,
        };
        if let Some(snap) = if persist { self.store.read_snapshot(id)? } else { None } {
            if snap.last_seq as usize <= events.len() && snap.session_id == id {
                live.record = snap;
            }
        }
        let mut i = live.record.last_seq as usize;
        while i < events.len() {
            let r = &events[i];
            let (mut next, replies) = apply(&live, &live.record, &r.event)?;
            next.last_seq = r.seq;
            next.updated = r.ts;
            let mut missing = Vec::new();
            for (k, reply) in replies.into_iter().enumerate() {
                match events.get(i + 1 + k) {
                    Some(EventRecord { event: Event::RepMsg(logged), seq, ts }) => {
                        if *logged != reply {
                            return Err(corrupt(i + 2 + k, "logged reply differs from the replayed one"));
                        }
                        next.last_seq = *seq;
                        next.updated = *ts;
                    }
                    Some(_) => return Err(corrupt(i + 2 + k, "expected a reply")),
                    None => missing.push(reply),
                }
            }
            let consumed = 1 + (next.last_seq - r.seq) as usize;
            if persist && !missing.is_empty() {
                let ts = r.ts;
                let recs: Vec<EventRecord> = missing
                    .into_iter()
                    .map(|reply| {
                        next.last_seq += 1;
                        EventRecord { seq: next.last_seq, ts, event: Event::RepMsg(reply) }
                    })
                    .collect();
                self.store.append(id, &recs)?;
            }
            live.record = next;
            i += consumed;
            if matches!(events.get(i), Some(EventRecord { event: Event::RepMsg(_), .. })) {
                return Err(corrupt(i + 1, "unexpected reply"));
            }
        }
        if persist {
            self.store.write_snapshot(&live.record)?;
        }
        live.report = self.store.read_json(id, "report.json")?;
        Ok(live)
    }

    /// Whether the stored snapshot equals the fold of the log up to its sequence number.
    pub fn verify(&self, id: &str) -> Result<bool, ServiceError> {
        let snap = self.store.read_snapshot(id)?;
        let Some(snap) = snap else { return Ok(true) };
        let scratch = self.rebuild(id, false, Some(snap.last_seq))?.record;
        Ok(snap == scratch)
    }

    fn live(&self, id: &str) -> Result<Arc<Mutex<Live>>, ServiceError> {
        if let Some(l) = self.sessions.read().get(id) {
            return Ok(l.clone());
        }
        if !self.store.session_dir(id).join("events.jsonl").exists() {
            return Err(ServiceError::SessionNotFound(id.into()));
        }
        let live = Arc::new(Mutex::new(self.recover(id)?));
        Ok(self.sessions.write().entry(id.into()).or_insert(live).clone())
    }

    /// Appends `input` and its replies, then snapshots. On a failed write the
    /// session is evicted from memory so its log is replayed on next use.
    fn commit(&self, live: &mut Live, input: Event) -> Result<Vec<Reply>, ServiceError> {
        let (mut next, replies) = apply(live, &live.record, &input)?;
        let id = live.record.session_id.clone();
        let ts = self.clock.now_ms();
        let result = (|| -> Result<(), StoreError> {
            let seq = live.record.last_seq + 1;
            self.store.append(&id, &[EventRecord { seq, ts, event: input }])?;
            self.store.check(Failpoint::AfterInput, seq)?;
            let recs: Vec<EventRecord> = replies
                .iter()
                .enumerate()
                .map(|(k, r)| EventRecord { seq: seq + 1 + k as u64, ts, event: Event::RepMsg(r.clone()) })
                .collect();
            self.store.append(&id, &recs)?;
            next.last_seq = seq + recs.len() as u64;
            next.updated = ts;
            self.store.check(Failpoint::BeforeSnapshot, next.last_seq)?;
            live.since_snapshot += 1 + recs.len() as u64;
            if live.since_snapshot >= self.opts.snapshot_every || next.status != SessionStatus::Active {
                self.store.write_snapshot(&next)?;
                live.since_snapshot = 0;
            }
            Ok(())
        })();
        match result {
            Ok(()) => {
                live.record = next;
                Ok(replies)
            }
            Err(e) => {
                self.sessions.write().remove(&id);
                Err(e.into())
            }
        }
    }

    fn expire(&self, live: &mut Live) -> Result<(), ServiceError> {
        let Some(ttl) = self.opts.session_ttl_ms else { return Ok(()) };
        let now = self.clock.now_ms();
        if live.record.status == SessionStatus::Active && now.saturating_sub(live.record.updated) > ttl {
            self.commit(live, Event::System(SystemEvent::Abandoned))?;
        }
        Ok(())
    }

    /// Marks idle sessions abandoned; returns how many were.
    pub fn sweep(&self) -> Result<usize, ServiceError> {
        let all: Vec<_> = self.sessions.read().values().cloned().collect();
        let mut n = 0;
        for l in all {
            let mut live = l.lock();
            let before = live.record.status;
            self.expire(&mut live)?;
            n += (before != live.record.status) as usize;
        }
        Ok(n)
    }

    /// Creates a session and runs its chat-begin turn. Without a persona,
    /// personas are assigned in alternation.
    pub fn create_session(&self, script: &str, persona: Option<&str>) -> Result<TurnResponse, ServiceError> {
        let assets = self.assets();
        let persona = match persona {
            Some(p) => p.to_string(),
            None => {
                let names: Vec<&String> = assets.personas.keys().collect();
                if names.is_empty() {
                    return Err(ServiceError::UnknownPersona(String::new()));
                }
                names[self.next_persona.fetch_add(1, Ordering::SeqCst) % names.len()].clone()
            }
        };
        let (s, p) = Self::resolve(&assets, script, &persona)?;
        let (id, seed) = self.ids.lock().next();
        let ts = self.clock.now_ms();
        self.store.create(&id)?;
        let created = Event::System(SystemEvent::Created { script: script.into(), persona: persona.clone(), seed });
        self.store.append(&id, &[EventRecord { seq: 1, ts, event: created }])?;
        let mut live = Live {
            record: SessionRecord {
                session_id: id.clone(),
                script: script.into(),
                persona,
                status: SessionStatus::Active,
                created: ts,
                updated: ts,
                last_seq: 1,
                state: rep_core::dialogue::SessionState::new(seed),
            },
            assets,
            script: s,
            persona: p,
            since_snapshot: 1,
            report: None,
        };
        let replies = self.commit(&mut live, Event::System(SystemEvent::ChatBegin))?;
        let status = live.record.status;
        self.sessions.write().insert(id.clone(), Arc::new(Mutex::new(live)));
        Ok(TurnResponse { api_version: API_VERSION, session_id: id, status, replies })
    }

    pub fn post_message(&self, id: &str, event: UserEvent) -> Result<TurnResponse, ServiceError> {
        let l = self.live(id)?;
        let mut live = l.lock();
        self.expire(&mut live)?;
        match live.record.status {
            SessionStatus::Completed => {
                let reply = Reply {
                    unit: String::new(),
                    text: "This interview is already complete. Thank you for your time!".into(),
                    widget: None,
                };
                return Err(ServiceError::SessionCompleted { reply });
            }
            SessionStatus::Abandoned => return Err(ServiceError::SessionAbandoned),
            SessionStatus::Active => {}
        }
        let input = match event {
            UserEvent::Text { text } => Event::UserMsg { text },
            UserEvent::ChatBegin => return Err(ServiceError::InvalidEvent("the chat has already begun".into())),
            other => Event::WidgetAnswer(other),
        };
        let replies = self.commit(&mut live, input)?;
        Ok(TurnResponse { api_version: API_VERSION, session_id: id.into(), status: live.record.status, replies })
    }

    /// Records a tracked-link click (idempotent) and returns the destination.
    pub fn track_click(&self, id: &str, link: &str) -> Result<String, ServiceError> {
        let l = self.live(id).map_err(|e| match e {
            ServiceError::SessionNotFound(_) => ServiceError::UnknownLink(link.into()),
            other => other,
        })?;
        let mut live = l.lock();
        let q = live.script.link(link).ok_or_else(|| ServiceError::UnknownLink(link.into()))?;
        let rep_core::dialogue::QuestionKind::Link { url, .. } = &q.kind else { unreachable!() };
        let url = url.clone();
        if !live.record.state.clicks.contains(link) {
            self.commit(&mut live, Event::LinkClick { link: link.into() })?;
            live.report = None;
        }
        Ok(url)
    }

    pub fn session(&self, id: &str) -> Result<SessionRecord, ServiceError> {
        Ok(self.live(id)?.lock().record.clone())
    }

    pub fn events(&self, id: &str) -> Result<Vec<EventRecord>, ServiceError> {
        self.live(id)?;
        Ok(self.store.read_events(id)?)
    }

    /// The text trait inference sees: the user's free-text turns from the log.
    pub fn trait_input(&self, id: &str) -> Result<String, ServiceError> {
        let texts: Vec<String> = self
            .events(id)?
            .into_iter()
            .filter_map(|r| match r.event {
                Event::UserMsg { text } => Some(text),
                _ => None,
            })
            .collect();
        Ok(texts.join("\n"))
    }

    pub fn get_report(&self, id: &str) -> Result<CandidateReport, ServiceError> {
        let l = self.live(id)?;
        let live = l.lock();
        if live.record.status != SessionStatus::Completed {
            return Err(ServiceError::SessionNotComplete);
        }
        if let Some(r) = &live.report {
            return Ok(r.clone());
        }
        drop(live);
        let text = self.trait_input(id)?;
        let mut live = l.lock();
        let traits = live.assets.traits.score(&text);
        let report = ScoreReport::new(id, &live.record.state.outcomes, &live.script.im_reverse, traits);
        let r = CandidateReport {
            api_version: API_VERSION,
            session_id: id.into(),
            persona: live.record.persona.clone(),
            report,
            word_count: word_count(&text) as u32,
        };
        self.store.write_json(id, "report.json", &r)?;
        live.report = Some(r.clone());
        Ok(r)
    }

    /// Reports of completed sessions ranked by `sort_by` (`im`, `wc`, `wl` or a
    /// trait id); missing values last, ties by session id.
    pub fn list_results(&self, sort_by: &str, order: SortOrder) -> Result<Vec<CandidateReport>, ServiceError> {
        let key: Box<dyn Fn(&CandidateReport) -> Option<f64>> = match sort_by {
            "im" => Box::new(|r| r.report.im.map(f64::from)),
            "wc" => Box::new(|r| r.report.wc.map(f64::from)),
            "wl" => Box::new(|r| r.report.wl.map(f64::from)),
            t if trait_index(t).is_some() => {
                let t = t.to_string();
                Box::new(move |r| r.trait_score(&t).map(|s| s.theta))
            }
            other => return Err(ServiceError::UnknownSortKey(other.into())),
        };
        self.sweep()?;
        let ids: Vec<String> = self.sessions.read().keys().cloned().collect();
        let mut rows = Vec::new();
        for id in ids {
            match self.get_report(&id) {
                Ok(r) => rows.push(r),
                Err(ServiceError::SessionNotComplete) => {}
                Err(e) => return Err(e),
            }
        }
        rows.sort_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            let by_key = match (ka, kb) {
                (Some(x), Some(y)) => match order {
                    SortOrder::Asc => x.total_cmp(&y),
                    SortOrder::Desc => y.total_cmp(&x),
                },
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            };
            by_key.then_with(|| a.session_id.cmp(&b.session_id))
        });
        Ok(rows)
    }
}
