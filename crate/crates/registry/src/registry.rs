//! Minting, versioned updates, tombstones and resolution.
//!
//! Reads take shared locks only. Mutations of one PID are serialized by that
//! entry's write lock, which is held until the new version is durable, so
//! readers observe either the old or the new version. Minting holds the
//! allocation lock only while choosing a suffix.

use std::collections::{BTreeMap, HashSet};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, TimeDelta, Utc};
use pidinst::crosswalk::{to_handle_record_with, HandleOptions, HandleRecord, TypeHandleMap};
use pidinst::model::DEFAULT_IDENTIFIER_TYPE;
use pidinst::{validate, InstrumentRecord, Pid, ValidationReport, VocabularySet};
use rand::Rng;
use serde::Serialize;

use crate::config::{RegistryConfig, SuffixPolicy};
use crate::store::{EntryState, RegistryEntry, Store, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("no such PID `{0}`")]
    NotFound(String),
    #[error("`{}` has been tombstoned", .0.pid)]
    Gone(Box<Tombstone>),
    #[error("expected version {expected}, current version is {current}")]
    VersionConflict { expected: u64, current: u64 },
    #[error("record is not valid:\n{0}")]
    ValidationFailed(ValidationReport),
    #[error("record identifier `{found}` does not match `{expected}`")]
    IdentifierMismatch { expected: String, found: String },
    #[error("`{0}` is already tombstoned")]
    AlreadyTombstoned(String),
    #[error("store unavailable: {0}")]
    StoreUnavailable(#[from] StoreError),
    #[error("{0}")]
    Config(#[from] crate::config::ConfigError),
}

/// Last-known state of a tombstoned PID.
#[derive(Debug, Clone, PartialEq)]
pub struct Tombstone {
    pub pid: Pid,
    pub version: u64,
    pub record: InstrumentRecord,
    pub handle_record: HandleRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolveMode {
    Redirect,
    NoRedirect,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Resolution {
    Redirect(String),
    Record(HandleRecord),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ListItem {
    pub pid: String,
    pub version: u64,
    pub state: EntryState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Page {
    pub items: Vec<ListItem>,
    #[serde(rename = "nextCursor", skip_serializing_if = "Option::is_none")]
    pub next_cursor: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub pid: Pid,
    pub version: u64,
    pub record: InstrumentRecord,
}

struct Allocator {
    next: u64,
    reserved: HashSet<String>,
}

type Slot = Arc<RwLock<RegistryEntry>>;

pub struct Registry {
    config: RegistryConfig,
    store: Store,
    vocab: VocabularySet,
    types: TypeHandleMap,
    index: RwLock<BTreeMap<String, Slot>>,
    alloc: Mutex<Allocator>,
}

const SEQUENTIAL_DIGITS: usize = 12;

fn grouped(hex: &str) -> String {
    hex.as_bytes()
        .chunks(4)
        .map(|c| std::str::from_utf8(c).expect("hex is ASCII"))
        .collect::<Vec<_>>()
        .join("-")
}

/// Counter value of a sequential suffix such as `0000-0000-002A`.
fn sequence_number(suffix: &str) -> Option<u64> {
    let digits: String = suffix.split('-').collect();
    let shape_ok = suffix.len() == SEQUENTIAL_DIGITS + 2
        && suffix.split('-').all(|g| g.len() == 4)
        && digits.chars().all(|c| c.is_ascii_digit() || ('A'..='F').contains(&c));
    shape_ok.then(|| u64::from_str_radix(&digits, 16).ok()).flatten()
}

pub fn sequential_suffix(n: u64) -> String {
    grouped(&format!("{n:0width$X}", width = SEQUENTIAL_DIGITS))
}

pub fn random_suffix(rng: &mut impl Rng) -> String {
    grouped(&format!("{:016X}", rng.random::<u64>()))
}

fn lock_poisoned<T>(_: T) -> RegistryError {
    RegistryError::StoreUnavailable(StoreError::Io {
        path: Default::default(),
        source: std::io::Error::other("registry lock poisoned"),
    })
}

/// Strictly after `last`, as close to now as possible.
fn next_timestamp(last: DateTime<Utc>) -> DateTime<Utc> {
    let now = Utc::now();
    if now > last {
        now
    } else {
        last + TimeDelta::microseconds(1)
    }
}

impl Registry {
    pub fn open(config: RegistryConfig) -> Result<Self, RegistryError> {
        Self::open_with(config, VocabularySet::builtin())
    }

    pub fn open_with(config: RegistryConfig, vocab: VocabularySet) -> Result<Self, RegistryError> {
        config.check()?;
        let (store, entries) = Store::open(&config.store_path)?;
        let mut index = BTreeMap::new();
        let mut next = 1;
        for e in entries {
            let suffix = e.suffix().to_string();
            if let Some(n) = sequence_number(&suffix) {
                next = next.max(n + 1);
            }
            index.insert(suffix, Arc::new(RwLock::new(e)));
        }
        tracing::info!(entries = index.len(), store = %config.store_path.display(), "registry opened");
        Ok(Registry {
            config,
            store,
            vocab,
            types: TypeHandleMap::default(),
            index: RwLock::new(index),
            alloc: Mutex::new(Allocator {
                next,
                reserved: HashSet::new(),
            }),
        })
    }

    pub fn config(&self) -> &RegistryConfig {
        &self.config
    }

    pub fn handle_options(&self) -> HandleOptions {
        HandleOptions {
            resolver: self.config.base_resolver_url.clone(),
            info_types: false,
        }
    }

    pub fn handle_record(&self, record: &InstrumentRecord) -> HandleRecord {
        to_handle_record_with(record, &self.types, &self.handle_options())
            .expect("stored records are valid and convert")
    }

    fn slot(&self, pid: &Pid) -> Result<Slot, RegistryError> {
        let not_found = || RegistryError::NotFound(pid.value().to_string());
        let (prefix, suffix) = pid.split_handle().ok_or_else(not_found)?;
        if prefix != self.config.prefix {
            return Err(not_found());
        }
        let index = self.index.read().map_err(lock_poisoned)?;
        index.get(suffix).cloned().ok_or_else(not_found)
    }

    fn tombstone_of(&self, e: &RegistryEntry) -> RegistryError {
        RegistryError::Gone(Box::new(Tombstone {
            pid: e.pid.clone(),
            version: e.version,
            record: e.current.clone(),
            handle_record: self.handle_record(&e.current),
        }))
    }

    fn allocate(&self) -> Result<String, RegistryError> {
        let mut a = self.alloc.lock().map_err(lock_poisoned)?;
        let suffix = match self.config.suffix_policy {
            SuffixPolicy::Sequential => {
                let s = sequential_suffix(a.next);
                a.next += 1;
                s
            }
            SuffixPolicy::RandomHex => {
                let index = self.index.read().map_err(lock_poisoned)?;
                let mut rng = rand::rng();
                loop {
                    let s = random_suffix(&mut rng);
                    if !index.contains_key(&s) && !a.reserved.contains(&s) {
                        break s;
                    }
                }
            }
        };
        a.reserved.insert(suffix.clone());
        Ok(suffix)
    }

    fn release(&self, suffix: &str) {
        if let Ok(mut a) = self.alloc.lock() {
            a.reserved.remove(suffix);
        }
    }

    /// Assigns a new PID to `record` (replacing any identifier it carries)
    /// and stores it as version 1.
    pub fn mint(&self, mut record: InstrumentRecord) -> Result<Pid, RegistryError> {
        record.identifier = Some(Pid::handle(&self.config.prefix, &sequential_suffix(0)));
        if record.identifier_type.as_deref().is_none_or(|t| t.trim().is_empty()) {
            record.identifier_type = Some(DEFAULT_IDENTIFIER_TYPE.to_string());
        }
        let report = validate(&record, &self.vocab);
        if !report.is_valid() {
            return Err(RegistryError::ValidationFailed(report));
        }

        let suffix = self.allocate()?;
        let pid = Pid::handle(&self.config.prefix, &suffix);
        record.identifier = Some(pid.clone());
        let entry = RegistryEntry::new(pid.clone(), record, Utc::now());
        let stored = self.store.create(&entry);
        if stored.is_ok() {
            let mut index = self.index.write().map_err(lock_poisoned)?;
            index.insert(suffix.clone(), Arc::new(RwLock::new(entry)));
        }
        self.release(&suffix);
        stored?;
        tracing::info!(%pid, "minted");
        Ok(pid)
    }

    pub fn resolve(&self, pid: &Pid, mode: ResolveMode) -> Result<Resolution, RegistryError> {
        let slot = self.slot(pid)?;
        let e = slot.read().map_err(lock_poisoned)?;
        if e.state == EntryState::Tombstoned {
            return Err(self.tombstone_of(&e));
        }
        Ok(match mode {
            ResolveMode::Redirect => Resolution::Redirect(
                e.current.landing_page.clone().expect("stored records have a landing page"),
            ),
            ResolveMode::NoRedirect => Resolution::Record(self.handle_record(&e.current)),
        })
    }

    /// The current record, or an earlier one when `version` is given.
    pub fn get(&self, pid: &Pid, version: Option<u64>) -> Result<Snapshot, RegistryError> {
        let slot = self.slot(pid)?;
        let e = slot.read().map_err(lock_poisoned)?;
        if e.state == EntryState::Tombstoned {
            return Err(self.tombstone_of(&e));
        }
        let v = version.unwrap_or(e.version);
        let record = e
            .at_version(v)
            .ok_or_else(|| RegistryError::NotFound(format!("{} version {v}", e.pid)))?;
        Ok(Snapshot {
            pid: e.pid.clone(),
            version: v,
            record: record.clone(),
        })
    }

    pub fn entry(&self, pid: &Pid) -> Result<RegistryEntry, RegistryError> {
        let slot = self.slot(pid)?;
        let e = slot.read().map_err(lock_poisoned)?;
        Ok(e.clone())
    }

    pub fn update(&self, pid: &Pid, record: InstrumentRecord, expected_version: u64) -> Result<u64, RegistryError> {
        let slot = self.slot(pid)?;
        let mut e = slot.write().map_err(lock_poisoned)?;
        if e.state == EntryState::Tombstoned {
            return Err(self.tombstone_of(&e));
        }
        if expected_version != e.version {
            return Err(RegistryError::VersionConflict {
                expected: expected_version,
                current: e.version,
            });
        }
        let found = record.identifier.as_ref().map(|p| p.value().to_string());
        if found.as_deref() != Some(e.pid.value()) {
            return Err(RegistryError::IdentifierMismatch {
                expected: e.pid.value().to_string(),
                found: found.unwrap_or_default(),
            });
        }
        let report = validate(&record, &self.vocab);
        if !report.is_valid() {
            return Err(RegistryError::ValidationFailed(report));
        }
        let mut next = e.clone();
        let at = next_timestamp(next.updated_at);
        next.version += 1;
        next.history.push(crate::store::HistoryItem {
            version: next.version,
            timestamp: at,
            record: record.clone(),
        });
        next.current = record;
        next.updated_at = at;
        self.store.write(&next)?;
        *e = next;
        Ok(e.version)
    }

    pub fn tombstone(&self, pid: &Pid) -> Result<(), RegistryError> {
        let slot = self.slot(pid)?;
        let mut e = slot.write().map_err(lock_poisoned)?;
        if e.state == EntryState::Tombstoned {
            return Err(RegistryError::AlreadyTombstoned(e.pid.value().to_string()));
        }
        let mut next = e.clone();
        next.state = EntryState::Tombstoned;
        next.updated_at = next_timestamp(next.updated_at);
        self.store.write(&next)?;
        *e = next;
        tracing::info!(pid = %e.pid, "tombstoned");
        Ok(())
    }

    /// Entries ordered by suffix, starting after `cursor`.
    pub fn list(&self, cursor: Option<&str>, limit: usize) -> Result<Page, RegistryError> {
        use std::ops::Bound;
        let limit = limit.clamp(1, self.config.page_size);
        let index = self.index.read().map_err(lock_poisoned)?;
        let start = match cursor {
            Some(c) => Bound::Excluded(c.to_string()),
            None => Bound::Unbounded,
        };
        let mut items = Vec::new();
        let mut range = index.range((start, Bound::Unbounded));
        for (_, slot) in range.by_ref().take(limit) {
            let e = slot.read().map_err(lock_poisoned)?;
            items.push(ListItem {
                pid: e.pid.value().to_string(),
                version: e.version,
                state: e.state,
            });
        }
        let next_cursor = match range.next() {
            Some(_) => items.last().and_then(|i| i.pid.split_once('/')).map(|(_, s)| s.to_string()),
            None => None,
        };
        Ok(Page { items, next_cursor })
    }

    pub fn len(&self) -> usize {
        self.index.read().map(|i| i.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
