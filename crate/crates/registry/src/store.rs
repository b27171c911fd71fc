//! File-backed entry store.
//!
//! Each PID lives in its own JSON file under a two-level fan-out
//! `instruments/ab/cd/<suffix>.json`, where `abcd` are the first hex digits
//! of the SHA-256 of the suffix. Files are replaced by write-to-temp and
//! rename, so a reader sees either the old or the new version. A mint first
//! records an intent file under `intents/`; on open, leftover intents are
//! rolled forward before entries are loaded.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use pidinst::canonical::{record_from_value, record_to_value};
use pidinst::{InstrumentRecord, Pid};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntryState {
    Active,
    Tombstoned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryItem {
    pub version: u64,
    pub timestamp: DateTime<Utc>,
    pub record: InstrumentRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistryEntry {
    pub pid: Pid,
    pub current: InstrumentRecord,
    pub version: u64,
    pub history: Vec<HistoryItem>,
    pub state: EntryState,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl RegistryEntry {
    pub fn new(pid: Pid, record: InstrumentRecord, at: DateTime<Utc>) -> Self {
        RegistryEntry {
            pid,
            current: record.clone(),
            version: 1,
            history: vec![HistoryItem {
                version: 1,
                timestamp: at,
                record,
            }],
            state: EntryState::Active,
            created_at: at,
            updated_at: at,
        }
    }

    pub fn suffix(&self) -> &str {
        self.pid.split_handle().map(|(_, s)| s).unwrap_or_default()
    }

    pub fn at_version(&self, version: u64) -> Option<&InstrumentRecord> {
        let i = usize::try_from(version).ok()?.checked_sub(1)?;
        self.history.get(i).map(|h| &h.record)
    }

    fn consistent(&self) -> Result<(), String> {
        if self.version != self.history.len() as u64 {
            return Err(format!("version {} but {} history items", self.version, self.history.len()));
        }
        for (i, h) in self.history.iter().enumerate() {
            if h.version != i as u64 + 1 {
                return Err(format!("history item {i} has version {}", h.version));
            }
        }
        if self.history.windows(2).any(|w| w[0].timestamp >= w[1].timestamp) {
            return Err("history timestamps are not strictly increasing".into());
        }
        if self.history.last().map(|h| &h.record) != Some(&self.current) {
            return Err("current record differs from the last history item".into());
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct StoredItem {
    version: u64,
    timestamp: DateTime<Utc>,
    record: Value,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct StoredEntry {
    pid: String,
    state: EntryState,
    version: u64,
    created_at: DateTime<Utc>,
    updated_at: DateTime<Utc>,
    history: Vec<StoredItem>,
}

impl From<&RegistryEntry> for StoredEntry {
    fn from(e: &RegistryEntry) -> Self {
        StoredEntry {
            pid: e.pid.value().to_string(),
            state: e.state,
            version: e.version,
            created_at: e.created_at,
            updated_at: e.updated_at,
            history: e
                .history
                .iter()
                .map(|h| StoredItem {
                    version: h.version,
                    timestamp: h.timestamp,
                    record: record_to_value(&h.record),
                })
                .collect(),
        }
    }
}

impl TryFrom<StoredEntry> for RegistryEntry {
    type Error = String;

    fn try_from(s: StoredEntry) -> Result<Self, String> {
        let history = s
            .history
            .into_iter()
            .map(|h| {
                Ok(HistoryItem {
                    version: h.version,
                    timestamp: h.timestamp,
                    record: record_from_value(&h.record).map_err(|e| e.to_string())?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let current = history.last().ok_or("empty history")?.record.clone();
        let e = RegistryEntry {
            pid: Pid::parse(&s.pid),
            current,
            version: s.version,
            history,
            state: s.state,
            created_at: s.created_at,
            updated_at: s.updated_at,
        };
        e.consistent()?;
        Ok(e)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: corrupt entry: {message}")]
    Corrupt { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    /// Opens (creating if needed) the store at `root`, completes interrupted
    /// mints and returns every stored entry.
    pub fn open(root: &Path) -> Result<(Store, Vec<RegistryEntry>), StoreError> {
        let store = Store {
            root: root.to_path_buf(),
        };
        for dir in [store.entries_dir(), store.intents_dir()] {
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        store.recover()?;
        let entries = store.load_all()?;
        Ok((store, entries))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entries_dir(&self) -> PathBuf {
        self.root.join("instruments")
    }

    fn intents_dir(&self) -> PathBuf {
        self.root.join("intents")
    }

    pub fn entry_path(&self, suffix: &str) -> PathBuf {
        let digest = Sha256::digest(suffix.as_bytes());
        let hex = format!("{:02x}{:02x}", digest[0], digest[1]);
        self.entries_dir()
            .join(&hex[..2])
            .join(&hex[2..])
            .join(format!("{suffix}.json"))
    }

    fn intent_path(&self, suffix: &str) -> PathBuf {
        self.intents_dir().join(format!("{suffix}.json"))
    }

    /// Durably stores a freshly minted entry: intent first, then the entry
    /// file, then the intent is cleared.
    pub fn create(&self, entry: &RegistryEntry) -> Result<(), StoreError> {
        let intent = self.intent_path(entry.suffix());
        write_atomic(&intent, &encode(entry))?;
        self.write(entry)?;
        fs::remove_file(&intent).map_err(io_err(&intent))
    }

    pub fn write(&self, entry: &RegistryEntry) -> Result<(), StoreError> {
        write_atomic(&self.entry_path(entry.suffix()), &encode(entry))
    }

    fn recover(&self) -> Result<(), StoreError> {
        let dir = self.intents_dir();
        for item in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let path = item.map_err(io_err(&dir))?.path();
            if path.extension().is_some_and(|e| e == "tmp") {
                fs::remove_file(&path).map_err(io_err(&path))?;
                continue;
            }
            let entry = read_entry(&path)?;
            let target = self.entry_path(entry.suffix());
            if !target.exists() {
                tracing::info!(pid = %entry.pid, "completing interrupted mint");
                self.write(&entry)?;
            }
            fs::remove_file(&path).map_err(io_err(&path))?;
        }
        Ok(())
    }

    fn load_all(&self) -> Result<Vec<RegistryEntry>, StoreError> {
        let mut out = Vec::new();
        let mut stack = vec![self.entries_dir()];
        while let Some(dir) = stack.pop() {
            for item in fs::read_dir(&dir).map_err(io_err(&dir))? {
                let path = item.map_err(io_err(&dir))?.path();
                if path.is_dir() {
                    stack.push(path);
                } else if path.extension().is_some_and(|e| e == "json") {
                    out.push(read_entry(&path)?);
                }
            }
        }
        Ok(out)
    }
}

fn encode(entry: &RegistryEntry) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&StoredEntry::from(entry)).expect("entry serializes");
    bytes.push(b'\n');
    bytes
}

fn read_entry(path: &Path) -> Result<RegistryEntry, StoreError> {
    let corrupt = |message: String| StoreError::Corrupt {
        path: path.to_path_buf(),
        message,
    };
    let bytes = fs::read(path).map_err(io_err(path))?;
    let stored: StoredEntry = serde_json::from_slice(&bytes).map_err(|e| corrupt(e.to_string()))?;
    RegistryEntry::try_from(stored).map_err(corrupt)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().expect("store paths have a parent");
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))?;
    // Persist the rename itself; not every platform can open directories.
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
    Ok(())
}
