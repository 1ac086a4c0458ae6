//! Append-only per-session event logs with snapshots, file-backed.
//!
//! Layout under the data directory:
//! `sessions/<id>/events.jsonl`, `sessions/<id>/snapshot.json`, `sessions/<id>/report.json`.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use rep_core::dialogue::{Reply, SessionState, UserEvent};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    UserMsg,
    RepMsg,
    WidgetAnswer,
    LinkClick,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SystemEvent {
    Created { script: String, persona: String, seed: u64 },
    ChatBegin,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Event {
    System(SystemEvent),
    UserMsg { text: String },
    /// A choice or likert answer.
    WidgetAnswer(UserEvent),
    LinkClick { link: String },
    RepMsg(Reply),
}

impl Event {
    pub fn kind(&self) -> EventKind {
        match self {
            Event::System(_) => EventKind::System,
            Event::UserMsg { .. } => EventKind::UserMsg,
            Event::WidgetAnswer(_) => EventKind::WidgetAnswer,
            Event::LinkClick { .. } => EventKind::LinkClick,
            Event::RepMsg(_) => EventKind::RepMsg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    /// Milliseconds since the Unix epoch, from the service clock.
    pub ts: u64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Completed,
    Abandoned,
}

/// Everything known about a session; the snapshot document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub script: String,
    pub persona: String,
    pub status: SessionStatus,
    pub created: u64,
    pub updated: u64,
    /// Sequence number of the last event folded into this record.
    pub last_seq: u64,
    pub state: SessionState,
}

/// Where an injected failure interrupts a write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failpoint {
    /// After the input event is appended, before the replies are.
    AfterInput,
    /// After all events are appended, before the snapshot is written.
    BeforeSnapshot,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path} line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("injected failure at {0:?}")]
    Injected(Failpoint),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.into(), source }
}

pub struct Store {
    root: PathBuf,
    failpoint: Mutex<Option<(Failpoint, u64)>>,
}

impl Store {
    pub fn open(data_dir: &Path) -> Result<Self, StoreError> {
        let root = data_dir.join("sessions");
        fs::create_dir_all(&root).map_err(io(&root))?;
        Ok(Store { root, failpoint: Mutex::new(None) })
    }

    pub fn session_dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    fn events_path(&self, id: &str) -> PathBuf {
        self.session_dir(id).join("events.jsonl")
    }

    /// Fails the write that would append event `at_seq` or later, once.
    pub fn inject(&self, point: Failpoint, at_seq: u64) {
        *self.failpoint.lock() = Some((point, at_seq));
    }

    /// Returns an error if the armed failpoint matches; disarms it.
    pub fn check(&self, point: Failpoint, seq: u64) -> Result<(), StoreError> {
        let mut fp = self.failpoint.lock();
        if matches!(*fp, Some((p, at)) if p == point && seq >= at) {
            *fp = None;
            return Err(StoreError::Injected(point));
        }
        Ok(())
    }

    pub fn session_ids(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root).map_err(io(&self.root))? {
            let entry = entry.map_err(io(&self.root))?;
            if entry.path().join("events.jsonl").exists() {
                ids.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn create(&self, id: &str) -> Result<(), StoreError> {
        let dir = self.session_dir(id);
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        let path = self.events_path(id);
        OpenOptions::new().create_new(true).write(true).open(&path).map_err(io(&path))?;
        Ok(())
    }

    /// Appends records whose sequence numbers continue the log; flushed to disk before returning.
    pub fn append(&self, id: &str, records: &[EventRecord]) -> Result<(), StoreError> {
        let path = self.events_path(id);
        let mut f = OpenOptions::new().append(true).open(&path).map_err(io(&path))?;
        let mut buf = Vec::new();
        for r in records {
            serde_json::to_writer(&mut buf, r).expect("event records serialize");
            buf.push(b'\n');
        }
        f.write_all(&buf).map_err(io(&path))?;
        f.sync_data().map_err(io(&path))?;
        Ok(())
    }

    /// All records, checking that sequence numbers run 1, 2, 3, ... without gaps.
    /// A torn final line (no newline) is ignored.
    pub fn read_events(&self, id: &str) -> Result<Vec<EventRecord>, StoreError> {
        Ok(self.scan(id)?.0)
    }

    /// Reads the log and cuts off a torn final line so later appends stay well formed.
    pub fn repair(&self, id: &str) -> Result<Vec<EventRecord>, StoreError> {
        let (events, good) = self.scan(id)?;
        let path = self.events_path(id);
        let f = OpenOptions::new().write(true).open(&path).map_err(io(&path))?;
        if f.metadata().map_err(io(&path))?.len() > good {
            f.set_len(good).map_err(io(&path))?;
            f.sync_data().map_err(io(&path))?;
        }
        Ok(events)
    }

    /// Complete records and the byte length they occupy.
    fn scan(&self, id: &str) -> Result<(Vec<EventRecord>, u64), StoreError> {
        let path = self.events_path(id);
        let f = File::open(&path).map_err(io(&path))?;
        let mut out: Vec<EventRecord> = Vec::new();
        let mut reader = BufReader::new(f);
        let mut line = String::new();
        let mut n = 0;
        let mut good = 0u64;
        loop {
            line.clear();
            let read = reader.read_line(&mut line).map_err(io(&path))?;
            if read == 0 || !line.ends_with('\n') {
                break;
            }
            n += 1;
            let corrupt = |message: String| StoreError::Corrupt { path: path.clone(), line: n, message };
            let r: EventRecord = serde_json::from_str(line.trim_end()).map_err(|e| corrupt(e.to_string()))?;
            if r.seq != out.len() as u64 + 1 {
                return Err(corrupt(format!("sequence {} where {} was expected", r.seq, out.len() + 1)));
            }
            out.push(r);
            good += read as u64;
        }
        Ok((out, good))
    }

    pub fn write_snapshot(&self, record: &SessionRecord) -> Result<(), StoreError> {
        self.write_json(&record.session_id, "snapshot.json", record)
    }

    pub fn read_snapshot(&self, id: &str) -> Result<Option<SessionRecord>, StoreError> {
        self.read_json(id, "snapshot.json")
    }

    pub fn write_json<T: Serialize>(&self, id: &str, name: &str, value: &T) -> Result<(), StoreError> {
        let dir = self.session_dir(id);
        let tmp = dir.join(format!("{name}.tmp"));
        let path = dir.join(name);
        let bytes = serde_json::to_vec_pretty(value).expect("documents serialize");
        let mut f = File::create(&tmp).map_err(io(&tmp))?;
        f.write_all(&bytes).map_err(io(&tmp))?;
        f.sync_data().map_err(io(&tmp))?;
        fs::rename(&tmp, &path).map_err(io(&path))?;
        Ok(())
    }

    pub fn read_json<T: for<'de> Deserialize<'de>>(&self, id: &str, name: &str) -> Result<Option<T>, StoreError> {
        let path = self.session_dir(id).join(name);
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| StoreError::Corrupt { path, line: 0, message: e.to_string() }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(StoreError::Io { path, source: e }),
        }
    }
}
