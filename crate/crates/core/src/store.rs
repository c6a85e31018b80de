//! Append-only NDJSON record store.
//!
//! One file per record kind. Every line is a complete JSON record and lines
//! are never rewritten; a correction is a new record whose `supersedes`
//! points at the old one. The in-memory index is rebuilt by replaying the
//! files on open. Appends hold a per-kind lock and are fsynced before the
//! new id is returned.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: corrupt record: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("serialization: {0}")]
    Serialize(#[from] serde_json::Error),
    #[error("{kind} {id} not found")]
    NotFound { kind: Kind, id: String },
    #[error("{kind} {id} is superseded by {by}")]
    AlreadySuperseded { kind: Kind, id: String, by: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    #[serde(rename = "io_table")]
    Table,
    Plan,
    Evaluation,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Table, Kind::Plan, Kind::Evaluation];

    fn prefix(self) -> &'static str {
        match self {
            Kind::Table => "table",
            Kind::Plan => "plan",
            Kind::Evaluation => "eval",
        }
    }

    fn file_name(self) -> &'static str {
        match self {
            Kind::Table => "tables.ndjson",
            Kind::Plan => "plans.ndjson",
            Kind::Evaluation => "evaluations.ndjson",
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Table => "table",
            Kind::Plan => "plan",
            Kind::Evaluation => "evaluation",
        })
    }
}

pub const RECORD_SCHEMA_VERSION: u32 = 1;

fn default_schema() -> u32 {
    RECORD_SCHEMA_VERSION
}

/// One stored line.
#[derive(Debug, Serialize, Deserialize)]
pub struct Record {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub id: String,
    pub kind: Kind,
    pub recorded_at: DateTime<Utc>,
    /// Groups records about the same thing, e.g. the plan an evaluation is for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supersedes: Option<String>,
    pub payload: Box<RawValue>,
}

impl Record {
    pub fn decode<T: DeserializeOwned>(&self) -> Result<T, serde_json::Error> {
        serde_json::from_str(self.payload.get())
    }
}

struct Log {
    path: PathBuf,
    file: File,
    next_seq: u64,
}

#[derive(Default)]
struct Index {
    records: HashMap<String, Arc<Record>>,
    superseded_by: HashMap<String, String>,
    /// Newest record per `(kind, subject)`.
    latest: HashMap<(Kind, String), String>,
}

impl Index {
    fn insert(&mut self, rec: Record) {
        if let Some(old) = &rec.supersedes {
            self.superseded_by.insert(old.clone(), rec.id.clone());
        }
        if let Some(subject) = &rec.subject {
            self.latest.insert((rec.kind, subject.clone()), rec.id.clone());
        }
        self.records.insert(rec.id.clone(), Arc::new(rec));
    }
}

pub struct Store {
    dir: PathBuf,
    logs: HashMap<Kind, Mutex<Log>>,
    index: RwLock<Index>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn seq_of(id: &str, kind: Kind) -> Option<u64> {
    id.strip_prefix(kind.prefix())?.strip_prefix('-')?.parse().ok()
}

impl Store {
    /// Opens (creating if needed) the store in `dir` and replays every log.
    ///
    /// A final line without a newline is the remains of an interrupted append;
    /// it was never acknowledged, so it is cut off. Any other unparsable line
    /// is an error.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut index = Index::default();
        let mut logs = HashMap::new();
        for kind in Kind::ALL {
            let path = dir.join(kind.file_name());
            let mut file = OpenOptions::new()
                .read(true)
                .append(true)
                .create(true)
                .open(&path)
                .map_err(io_err(&path))?;
            let mut next_seq = 1;
            let mut good_len = 0u64;
            let mut reader = BufReader::new(&mut file);
            let mut line = String::new();
            let mut line_no = 0;
            loop {
                line.clear();
                let read = reader.read_line(&mut line).map_err(io_err(&path))?;
                if read == 0 {
                    break;
                }
                line_no += 1;
                if !line.ends_with('\n') {
                    tracing::warn!(path = %path.display(), line = line_no, "dropping torn trailing record");
                    break;
                }
                good_len += read as u64;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: Record = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                    path: path.clone(),
                    line: line_no,
                    message: e.to_string(),
                })?;
                if rec.kind != kind {
                    return Err(StoreError::Corrupt {
                        path: path.clone(),
                        line: line_no,
                        message: format!("{} record in the {kind} log", rec.kind),
                    });
                }
                if let Some(seq) = seq_of(&rec.id, kind) {
                    next_seq = next_seq.max(seq + 1);
                }
                index.insert(rec);
            }
            drop(reader);
            if file.metadata().map_err(io_err(&path))?.len() != good_len {
                file.set_len(good_len).map_err(io_err(&path))?;
                file.seek(SeekFrom::End(0)).map_err(io_err(&path))?;
            }
            logs.insert(kind, Mutex::new(Log { path, file, next_seq }));
        }
        Ok(Self {
            dir,
            logs,
            index: RwLock::new(index),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Appends a record. `build` receives the new id so the payload can embed it.
    pub fn append_with<T, F>(
        &self,
        kind: Kind,
        subject: Option<&str>,
        supersedes: Option<&str>,
        build: F,
    ) -> Result<(String, T), StoreError>
    where
        T: Serialize,
        F: FnOnce(&str) -> T,
    {
        let mut log = self.logs[&kind].lock().expect("store log lock poisoned");
        if let Some(old) = supersedes {
            let index = self.index.read().expect("store index lock poisoned");
            if !index.records.get(old).is_some_and(|r| r.kind == kind) {
                return Err(StoreError::NotFound {
                    kind,
                    id: old.to_string(),
                });
            }
            if let Some(by) = index.superseded_by.get(old) {
                return Err(StoreError::AlreadySuperseded {
                    kind,
                    id: old.to_string(),
                    by: by.clone(),
                });
            }
        }
        let id = format!("{}-{:06}", kind.prefix(), log.next_seq);
        let payload = build(&id);
        let rec = Record {
            schema_version: RECORD_SCHEMA_VERSION,
            id: id.clone(),
            kind,
            recorded_at: Utc::now(),
            subject: subject.map(str::to_string),
            supersedes: supersedes.map(str::to_string),
            payload: serde_json::value::to_raw_value(&payload)?,
        };
        let mut line = serde_json::to_vec(&rec)?;
        line.push(b'\n');
        let path = log.path.clone();
        log.file.write_all(&line).map_err(io_err(&path))?;
        log.file.sync_data().map_err(io_err(&path))?;
        log.next_seq += 1;
        self.index.write().expect("store index lock poisoned").insert(rec);
        Ok((id, payload))
    }

    pub fn append<T: Serialize>(&self, kind: Kind, payload: &T) -> Result<String, StoreError> {
        self.append_with(kind, None, None, |_| payload).map(|(id, _)| id)
    }

    pub fn get(&self, kind: Kind, id: &str) -> Option<Arc<Record>> {
        let index = self.index.read().expect("store index lock poisoned");
        index.records.get(id).filter(|r| r.kind == kind).cloned()
    }

    pub fn get_as<T: DeserializeOwned>(&self, kind: Kind, id: &str) -> Result<T, StoreError> {
        let rec = self.get(kind, id).ok_or_else(|| StoreError::NotFound {
            kind,
            id: id.to_string(),
        })?;
        Ok(rec.decode()?)
    }

    /// Id of the record that replaced `id`, if any.
    pub fn superseded_by(&self, id: &str) -> Option<String> {
        let index = self.index.read().expect("store index lock poisoned");
        index.superseded_by.get(id).cloned()
    }

    /// Newest record of `kind` filed under `subject`.
    pub fn latest_for(&self, kind: Kind, subject: &str) -> Option<String> {
        let index = self.index.read().expect("store index lock poisoned");
        index.latest.get(&(kind, subject.to_string())).cloned()
    }

    /// All records of `kind` in append order, optionally only those filed under `subject`.
    pub fn list(&self, kind: Kind, subject: Option<&str>) -> Vec<Arc<Record>> {
        let index = self.index.read().expect("store index lock poisoned");
        let mut out: Vec<_> = index
            .records
            .values()
            .filter(|r| r.kind == kind && subject.is_none_or(|s| r.subject.as_deref() == Some(s)))
            .cloned()
            .collect();
        out.sort_by_key(|r| seq_of(&r.id, kind));
        out
    }

    pub fn count(&self, kind: Kind) -> usize {
        let index = self.index.read().expect("store index lock poisoned");
        index.records.values().filter(|r| r.kind == kind).count()
    }
}
