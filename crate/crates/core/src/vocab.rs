//! Offline snapshots of controlled vocabularies.
//!
//! Each snapshot is a flat term list (no broader/narrower hierarchy) stored
//! as one JSON file:
//!
//! ```json
//! {
//!   "scheme": "dateType",
//!   "property": "dateType",
//!   "source": "where the terms came from",
//!   "terms": [ { "token": "Commissioned", "conceptUrl": null, "definition": "..." } ]
//! }
//! ```
//!
//! `property` binds the snapshot to the schema property whose values it
//! governs; snapshots without a binding are only available for lookups.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Term {
    pub token: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concept_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularySnapshot {
    #[serde(rename = "scheme")]
    pub scheme_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property: Option<String>,
    pub source: String,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VocabMatch {
    Exact,
    CaseVariant(String),
    Unknown,
}

#[derive(Debug, thiserror::Error)]
pub enum VocabError {
    #[error("cannot read vocabulary {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed vocabulary {path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("scheme `{scheme}` has no terms")]
    Empty { scheme: String },
    #[error("scheme `{scheme}` lists `{token}` more than once (case-insensitively)")]
    DuplicateToken { scheme: String, token: String },
}

impl VocabularySnapshot {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, VocabError> {
        let snap: VocabularySnapshot =
            serde_json::from_str(text).map_err(|e| VocabError::Malformed {
                path: origin.to_path_buf(),
                message: e.to_string(),
            })?;
        snap.check()?;
        Ok(snap)
    }

    fn check(&self) -> Result<(), VocabError> {
        if self.terms.is_empty() {
            return Err(VocabError::Empty {
                scheme: self.scheme_id.clone(),
            });
        }
        let mut seen = HashSet::new();
        for t in &self.terms {
            if !seen.insert(t.token.to_lowercase()) {
                return Err(VocabError::DuplicateToken {
                    scheme: self.scheme_id.clone(),
                    token: t.token.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn has_concept_url(&self, url: &str) -> bool {
        self.terms.iter().any(|t| t.concept_url.as_deref() == Some(url))
    }
}

/// Matches `term` against a scheme's tokens: exact first, then ignoring case.
pub fn check_vocabulary(term: &str, scheme: &VocabularySnapshot) -> VocabMatch {
    if scheme.terms.iter().any(|t| t.token == term) {
        return VocabMatch::Exact;
    }
    let lower = term.to_lowercase();
    match scheme.terms.iter().find(|t| t.token.to_lowercase() == lower) {
        Some(t) => VocabMatch::CaseVariant(t.token.clone()),
        None => VocabMatch::Unknown,
    }
}

const BUILTIN: &[(&str, &str)] = &[
    ("dateType.json", include_str!("../vocab/dateType.json")),
    ("relationType.json", include_str!("../vocab/relationType.json")),
    ("alternateIdentifierType.json", include_str!("../vocab/alternateIdentifierType.json")),
    ("identifierType.json", include_str!("../vocab/identifierType.json")),
    ("L22-instrument-types.json", include_str!("../vocab/L22-instrument-types.json")),
    ("P01-measured-variables.json", include_str!("../vocab/P01-measured-variables.json")),
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VocabularySet {
    snapshots: Vec<VocabularySnapshot>,
}

impl VocabularySet {
    pub fn new(snapshots: Vec<VocabularySnapshot>) -> Self {
        VocabularySet { snapshots }
    }

    /// The snapshots shipped with the crate (the same files as `vocab/`).
    pub fn builtin() -> Self {
        let snapshots = BUILTIN
            .iter()
            .map(|(name, text)| {
                VocabularySnapshot::from_json(text, Path::new(name))
                    .expect("bundled vocabularies are well-formed")
            })
            .collect();
        VocabularySet { snapshots }
    }

    /// Loads every `*.json` file in `dir`, in file-name order.
    pub fn load_dir(dir: &Path) -> Result<Self, VocabError> {
        let io = |e| VocabError::Io {
            path: dir.to_path_buf(),
            source: e,
        };
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut snapshots = Vec::with_capacity(paths.len());
        for p in paths {
            let text = fs::read_to_string(&p).map_err(|e| VocabError::Io {
                path: p.clone(),
                source: e,
            })?;
            snapshots.push(VocabularySnapshot::from_json(&text, &p)?);
        }
        Ok(VocabularySet { snapshots })
    }

    pub fn get(&self, scheme_id: &str) -> Option<&VocabularySnapshot> {
        self.snapshots.iter().find(|s| s.scheme_id == scheme_id)
    }

    pub fn for_property<'a>(&'a self, property: &'a str) -> impl Iterator<Item = &'a VocabularySnapshot> + 'a {
        self.snapshots
            .iter()
            .filter(move |s| s.property.as_deref() == Some(property))
    }

    /// Best match of `term` across all snapshots bound to `property`, or
    /// `None` when no snapshot is bound.
    pub fn check_property(&self, property: &str, term: &str) -> Option<VocabMatch> {
        let mut best: Option<VocabMatch> = None;
        for scheme in self.for_property(property) {
            match check_vocabulary(term, scheme) {
                VocabMatch::Exact => return Some(VocabMatch::Exact),
                m @ VocabMatch::CaseVariant(_) => best = Some(m),
                VocabMatch::Unknown => {
                    best.get_or_insert(VocabMatch::Unknown);
                }
            }
        }
        best
    }

    pub fn iter(&self) -> impl Iterator<Item = &VocabularySnapshot> {
        self.snapshots.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}
