//! Instrument metadata records.
//!
//! Mandatory properties are `Option`s so that incomplete input can still be
//! read and then reported on by the validator instead of failing to parse.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::pid::Pid;

/// Recommended `identifierType` tokens. The property itself is free text.
pub const IDENTIFIER_TYPE_TOKENS: &[&str] = &["MeasuringInstrument", "Handle", "DOI"];

pub const DEFAULT_IDENTIFIER_TYPE: &str = "MeasuringInstrument";

/// Recommended `alternateIdentifierType` for an instrument serial number.
pub const SERIAL_NUMBER: &str = "SerialNumber";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InstrumentRecord {
    pub identifier: Option<Pid>,
    pub identifier_type: Option<String>,
    pub landing_page: Option<String>,
    pub name: Option<String>,
    pub owners: Vec<Owner>,
    pub manufacturers: Vec<Manufacturer>,
    pub description: Option<String>,
    pub instrument_types: Vec<TypedTerm>,
    pub measured_variables: Vec<TypedTerm>,
    pub dates: Vec<InstrumentDate>,
    pub alternate_identifiers: Vec<AlternateIdentifier>,
    pub related_identifiers: Vec<RelatedIdentifier>,
}

impl InstrumentRecord {
    /// Serial numbers recorded as alternate identifiers, matching the type
    /// token case-insensitively.
    pub fn serial_numbers(&self) -> impl Iterator<Item = &str> {
        self.alternate_identifiers
            .iter()
            .filter(|a| a.kind.eq_ignore_ascii_case(SERIAL_NUMBER))
            .map(|a| a.value.as_str())
    }
}

/// A typed `(value, type)` identifier for an owner or manufacturer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyIdentifier {
    pub value: String,
    pub kind: String,
}

impl PartyIdentifier {
    pub fn new(value: impl Into<String>, kind: impl Into<String>) -> Self {
        PartyIdentifier {
            value: value.into(),
            kind: kind.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Owner {
    pub name: String,
    pub contact: Option<String>,
    pub identifier: Option<PartyIdentifier>,
}

impl Owner {
    pub fn named(name: impl Into<String>) -> Self {
        Owner {
            name: name.into(),
            contact: None,
            identifier: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manufacturer {
    pub name: String,
    pub model_name: Option<String>,
    pub identifier: Option<PartyIdentifier>,
}

impl Manufacturer {
    pub fn named(name: impl Into<String>) -> Self {
        Manufacturer {
            name: name.into(),
            model_name: None,
            identifier: None,
        }
    }
}

/// Lifecycle event kinds. Unlisted values are carried in `Other` so that
/// the validator, not the reader, decides whether they are acceptable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DateType {
    Commissioned,
    DeCommissioned,
    Other(String),
}

impl DateType {
    pub fn as_str(&self) -> &str {
        match self {
            DateType::Commissioned => "Commissioned",
            DateType::DeCommissioned => "DeCommissioned",
            DateType::Other(s) => s,
        }
    }
}

impl From<&str> for DateType {
    fn from(s: &str) -> Self {
        match s {
            "Commissioned" => DateType::Commissioned,
            "DeCommissioned" => DateType::DeCommissioned,
            other => DateType::Other(other.to_string()),
        }
    }
}

impl fmt::Display for DateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A dated lifecycle event. The date is kept as written (`YYYY-MM-DD`) and
/// checked by the validator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstrumentDate {
    pub date: String,
    pub date_type: DateType,
}

impl InstrumentDate {
    pub fn new(date: impl Into<String>, date_type: DateType) -> Self {
        InstrumentDate {
            date: date.into(),
            date_type,
        }
    }

    /// The calendar date, when `date` is a valid ISO-8601 `YYYY-MM-DD`.
    pub fn calendar_date(&self) -> Option<NaiveDate> {
        let d = self.date.as_str();
        let b = d.as_bytes();
        if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
            return None;
        }
        NaiveDate::parse_from_str(d, "%Y-%m-%d").ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternateIdentifier {
    pub value: String,
    /// Free text; `SerialNumber` is the recommended token for serial numbers.
    pub kind: String,
}

impl AlternateIdentifier {
    pub fn new(value: impl Into<String>, kind: impl Into<String>) -> Self {
        AlternateIdentifier {
            value: value.into(),
            kind: kind.into(),
        }
    }

    pub fn serial_number(value: impl Into<String>) -> Self {
        Self::new(value, SERIAL_NUMBER)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationType {
    IsDescribedBy,
    HasMetadata,
    HasComponent,
    IsComponentOf,
    IsNewVersionOf,
    IsPreviousVersionOf,
    WasUsedIn,
    Other(String),
}

impl RelationType {
    pub const KNOWN: [RelationType; 7] = [
        RelationType::IsDescribedBy,
        RelationType::HasMetadata,
        RelationType::HasComponent,
        RelationType::IsComponentOf,
        RelationType::IsNewVersionOf,
        RelationType::IsPreviousVersionOf,
        RelationType::WasUsedIn,
    ];

    pub fn as_str(&self) -> &str {
        match self {
            RelationType::IsDescribedBy => "IsDescribedBy",
            RelationType::HasMetadata => "HasMetadata",
            RelationType::HasComponent => "HasComponent",
            RelationType::IsComponentOf => "IsComponentOf",
            RelationType::IsNewVersionOf => "IsNewVersionOf",
            RelationType::IsPreviousVersionOf => "IsPreviousVersionOf",
            RelationType::WasUsedIn => "WasUsedIn",
            RelationType::Other(s) => s,
        }
    }
}

impl From<&str> for RelationType {
    fn from(s: &str) -> Self {
        RelationType::KNOWN
            .iter()
            .find(|r| r.as_str() == s)
            .cloned()
            .unwrap_or_else(|| RelationType::Other(s.to_string()))
    }
}

impl FromStr for RelationType {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(RelationType::from(s))
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelatedIdentifier {
    pub value: String,
    pub identifier_type: String,
    pub relation_type: RelationType,
}

impl RelatedIdentifier {
    pub fn new(
        value: impl Into<String>,
        identifier_type: impl Into<String>,
        relation_type: RelationType,
    ) -> Self {
        RelatedIdentifier {
            value: value.into(),
            identifier_type: identifier_type.into(),
            relation_type,
        }
    }
}

/// Soft-typed classification value: free text or a concept URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedTerm {
    pub value: String,
    pub scheme_hint: Option<String>,
}

impl TypedTerm {
    pub fn new(value: impl Into<String>) -> Self {
        TypedTerm {
            value: value.into(),
            scheme_hint: None,
        }
    }

    pub fn with_scheme(value: impl Into<String>, scheme: impl Into<String>) -> Self {
        TypedTerm {
            value: value.into(),
            scheme_hint: Some(scheme.into()),
        }
    }
}
