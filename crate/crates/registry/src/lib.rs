//! A handle-style PID registry for instrument records: mints PIDs under a
//! configured prefix, keeps every version of each record on disk and
//! resolves PIDs over HTTP.

pub mod config;
pub mod registry;
pub mod service;
pub mod store;

pub use config::{ConfigError, RegistryConfig, SuffixPolicy};
pub use registry::{Page, Registry, RegistryError, Resolution, ResolveMode, Snapshot, Tombstone};
pub use service::{router, serve, serve_listener, ServeError};
pub use store::{EntryState, RegistryEntry, Store, StoreError};
