//! Session registry with optional on-disk persistence.
//!
//! Layout under the data directory: `sessions/<id>/config.json` written once
//! at creation and `sessions/<id>/history.jsonl` with one accepted answer per
//! line. Models are never stored; loading replays the history.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, TryLockError};

use crate::error::ServiceError;
use crate::session::{Choice, HistoryEntry, Session, SessionConfig};

pub type SessionHandle = Arc<Mutex<Session>>;

#[derive(Debug, Default)]
pub struct SessionStore {
    dir: Option<PathBuf>,
    sessions: Mutex<HashMap<String, SessionHandle>>,
}

fn lock_recovering<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

impl SessionStore {
    /// Sessions live only in memory.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Persist under `dir`, loading every session already stored there.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let dir = dir.into();
        let root = dir.join("sessions");
        fs::create_dir_all(&root)?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&root)? {
            let path = entry?.path();
            if !path.join("config.json").is_file() {
                continue;
            }
            let session = load_session(&path)?;
            log::info!("restored session {} with {} answers", session.id(), session.asked());
            sessions.insert(session.id().to_string(), Arc::new(Mutex::new(session)));
        }
        Ok(Self { dir: Some(dir), sessions: Mutex::new(sessions) })
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn len(&self) -> usize {
        lock_recovering(&self.sessions).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn session_dir(&self, id: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join("sessions").join(id))
    }

    pub fn create(&self, config: SessionConfig) -> Result<SessionHandle, ServiceError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::create(id.clone(), config)?;
        if let Some(dir) = self.session_dir(&id) {
            fs::create_dir_all(&dir)?;
            let tmp = dir.join("config.json.tmp");
            fs::write(&tmp, serde_json::to_vec_pretty(session.config())?)?;
            fs::rename(&tmp, dir.join("config.json"))?;
            File::create(dir.join("history.jsonl"))?.sync_all()?;
        }
        let handle = Arc::new(Mutex::new(session));
        lock_recovering(&self.sessions).insert(id, handle.clone());
        Ok(handle)
    }

    pub fn get(&self, id: &str) -> Result<SessionHandle, ServiceError> {
        lock_recovering(&self.sessions)
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    /// Lock a session, waiting for other requests on it to finish.
    pub fn lock<'a>(&self, handle: &'a SessionHandle) -> MutexGuard<'a, Session> {
        lock_recovering(handle)
    }

    /// Lock a session or fail with a conflict if another request holds it.
    pub fn try_lock<'a>(&self, handle: &'a SessionHandle) -> Result<MutexGuard<'a, Session>, ServiceError> {
        match handle.try_lock() {
            Ok(g) => Ok(g),
            Err(TryLockError::Poisoned(p)) => Ok(p.into_inner()),
            Err(TryLockError::WouldBlock) => Err(ServiceError::Busy),
        }
    }

    /// Answer the pending query: refit, append to the log, then commit in memory.
    pub fn answer(&self, session: &mut Session, choice: Choice, timestamp_ms: u64) -> Result<(), ServiceError> {
        let (entry, model) = session.prepare_answer(choice, timestamp_ms)?;
        if let Some(dir) = self.session_dir(session.id()) {
            let mut log = OpenOptions::new().append(true).open(dir.join("history.jsonl"))?;
            let mut line = serde_json::to_vec(&entry)?;
            line.push(b'\n');
            log.write_all(&line)?;
            log.sync_data()?;
        }
        session.commit_answer(entry, model);
        Ok(())
    }
}

fn load_session(dir: &Path) -> Result<Session, ServiceError> {
    let id = dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| ServiceError::Corrupt(format!("bad session directory {}", dir.display())))?
        .to_string();
    let config: SessionConfig = serde_json::from_slice(&fs::read(dir.join("config.json"))?)?;
    let mut history = Vec::new();
    let log = dir.join("history.jsonl");
    let mut torn = false;
    if log.exists() {
        for line in BufReader::new(File::open(&log)?).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<HistoryEntry>(&line) {
                Ok(e) => history.push(e),
                // A crash mid-append; that answer was never acknowledged.
                Err(e) if e.is_eof() => {
                    log::warn!("session {id}: dropping truncated last history line");
                    torn = true;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    if torn {
        let mut text = Vec::new();
        for e in &history {
            text.extend(serde_json::to_vec(e)?);
            text.push(b'\n');
        }
        let tmp = dir.join("history.jsonl.tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &log)?;
    }
    Session::replay(id, config, history)
}
