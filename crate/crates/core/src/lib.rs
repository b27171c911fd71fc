//! Instrument persistent identifiers.
//!
//! A data model for instrument metadata records with a canonical JSON
//! interchange form, a validator, crosswalks to typed handle records,
//! DataCite metadata and SensorML, and a relation graph over a corpus of
//! records.

pub mod canonical;
pub mod crosswalk;
pub mod graph;
mod json;
pub mod model;
pub mod pid;
pub mod validate;
pub mod vocab;

pub use canonical::{canonicalize, parse_record, ParseError};
pub use graph::{build_graph, Direction, Edge, GraphError, NodeKind, PidGraph};
pub use model::*;
pub use pid::{normalize_identifier, Pid, PidScheme};
pub use validate::{validate, Severity, ValidationReport, Violation, ViolationCode};
pub use vocab::{check_vocabulary, VocabMatch, VocabularySet, VocabularySnapshot};
