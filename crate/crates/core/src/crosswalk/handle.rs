//! Instrument records as typed handle records.
//!
//! Every first-level property becomes one handle value whose `type` is the
//! property's type handle in a data type registry. Compound properties are
//! stored as compact JSON arrays of single-key objects:
//!
//! ```text
//! 1  URL                             https://linkedsystems.uk/system/instance/TOOL0022_2490/current/
//! 2  21.T11148/8eb858ee0b12e8e463a5  {"identifierValue":"http://hdl.handle.net/21.T11998/0000-001A-3905-F","identifierType":"MeasuringInstrument"}
//! 3  21.T11148/9a15a4735d4bda329d80  https://linkedsystems.uk/system/instance/TOOL0022_2490/current/
//! 4  21.T11148/709a23220f2c3d64d1e1  Sea-Bird SBE 37-IM MicroCAT C-T Sensor
//! 5  21.T11148/4eaec4bc0f1df68ab2a7  [{"Owner":{"ownerName":"National Oceanography Centre",...}}]
//! ```
//!
//! Index 1 is always the URL value; typed values follow in a fixed property
//! order with contiguous indices.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::json::{as_array, FieldError, ObjectReader};
use crate::model::*;
use crate::pid::{Pid, DEFAULT_HANDLE_RESOLVER};

/// First-level properties, in handle-record order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HandleProperty {
    Identifier,
    LandingPage,
    Name,
    Owners,
    Manufacturers,
    Description,
    InstrumentType,
    MeasuredVariables,
    Dates,
    AlternateIdentifiers,
    RelatedIdentifiers,
}

impl HandleProperty {
    pub const ALL: [HandleProperty; 11] = [
        HandleProperty::Identifier,
        HandleProperty::LandingPage,
        HandleProperty::Name,
        HandleProperty::Owners,
        HandleProperty::Manufacturers,
        HandleProperty::Description,
        HandleProperty::InstrumentType,
        HandleProperty::MeasuredVariables,
        HandleProperty::Dates,
        HandleProperty::AlternateIdentifiers,
        HandleProperty::RelatedIdentifiers,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HandleProperty::Identifier => "Identifier",
            HandleProperty::LandingPage => "LandingPage",
            HandleProperty::Name => "Name",
            HandleProperty::Owners => "Owners",
            HandleProperty::Manufacturers => "Manufacturers",
            HandleProperty::Description => "Description",
            HandleProperty::InstrumentType => "InstrumentType",
            HandleProperty::MeasuredVariables => "MeasuredVariables",
            HandleProperty::Dates => "Dates",
            HandleProperty::AlternateIdentifiers => "AlternateIdentifiers",
            HandleProperty::RelatedIdentifiers => "RelatedIdentifiers",
        }
    }

    pub fn from_name(name: &str) -> Option<HandleProperty> {
        HandleProperty::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for HandleProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Property → type handle; bijective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeHandleMap {
    by_property: BTreeMap<HandleProperty, String>,
}

impl Default for TypeHandleMap {
    /// The registered PIDINST type handles of the ePIC prototype.
    fn default() -> Self {
        use HandleProperty::*;
        let pairs = [
            (Identifier, "21.T11148/8eb858ee0b12e8e463a5"),
            (LandingPage, "21.T11148/9a15a4735d4bda329d80"),
            (Name, "21.T11148/709a23220f2c3d64d1e1"),
            (Owners, "21.T11148/4eaec4bc0f1df68ab2a7"),
            (Manufacturers, "21.T11148/1f3e82ddf0697a497432"),
            (Description, "21.T11148/55f8ebc805e65b5b71dd"),
            (InstrumentType, "21.T11148/f76ad9d0324302fc47dd"),
            (MeasuredVariables, "21.T11148/72928b84e060d491ee41"),
            (Dates, "21.T11148/22c62082a4d2d9ae2602"),
            (AlternateIdentifiers, "21.T11148/eb3c713572f681e6c4c3"),
            (RelatedIdentifiers, "21.T11148/178fb558abc755ca7046"),
        ];
        TypeHandleMap::new(pairs.into_iter().map(|(p, t)| (p, t.to_string())))
            .expect("default type handles are distinct")
    }
}

impl TypeHandleMap {
    /// Builds a map; fails if two properties share a type handle or a type
    /// handle collides with the reserved `URL` type.
    pub fn new(pairs: impl IntoIterator<Item = (HandleProperty, String)>) -> Result<Self, HandleError> {
        let mut by_property = BTreeMap::new();
        for (p, t) in pairs {
            if t == URL_TYPE || by_property.values().any(|v| v == &t) {
                return Err(HandleError::DuplicateTypeHandle(t));
            }
            by_property.insert(p, t);
        }
        Ok(TypeHandleMap { by_property })
    }

    /// Reads `{"Name": "21.T11148/...", ...}`.
    pub fn from_json(text: &str) -> Result<Self, HandleError> {
        let raw: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| HandleError::Structure(e.to_string()))?;
        let mut pairs = Vec::new();
        for (k, v) in raw {
            let p = HandleProperty::from_name(&k)
                .ok_or_else(|| HandleError::Structure(format!("unknown property `{k}`")))?;
            pairs.push((p, v));
        }
        TypeHandleMap::new(pairs)
    }

    pub fn type_of(&self, p: HandleProperty) -> Option<&str> {
        self.by_property.get(&p).map(String::as_str)
    }

    pub fn property_of(&self, type_handle: &str) -> Option<HandleProperty> {
        self.by_property
            .iter()
            .find(|(_, t)| t.as_str() == type_handle)
            .map(|(p, _)| *p)
    }

    pub fn without(mut self, p: HandleProperty) -> Self {
        self.by_property.remove(&p);
        self
    }
}

pub const URL_TYPE: &str = "URL";
/// Lightweight information types duplicated into the record when enabled.
pub const INFO_NAME_TYPE: &str = "NAME";
pub const INFO_LANDING_PAGE_TYPE: &str = "LANDINGPAGE";
const IGNORED_TYPES: &[&str] = &[INFO_NAME_TYPE, INFO_LANDING_PAGE_TYPE, "HS_ADMIN"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandleEntry {
    pub index: u32,
    #[serde(rename = "type")]
    pub kind: String,
    pub data: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandleRecord {
    pub handle: Pid,
    pub entries: Vec<HandleEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HandleError {
    #[error("no type handle configured for property {0}")]
    MissingTypeHandle(HandleProperty),
    #[error("entry {index} has unknown type `{kind}`")]
    UnknownTypeHandle { index: u32, kind: String },
    #[error("entry {index} has malformed data: {message}")]
    MalformedEntryData { index: u32, message: String },
    #[error("mandatory property {0} is missing")]
    MissingMandatory(&'static str),
    #[error("type handle `{0}` is assigned to more than one property")]
    DuplicateTypeHandle(String),
    #[error("malformed handle record: {0}")]
    Structure(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandleOptions {
    /// Base URL for the `identifierValue` display form.
    pub resolver: String,
    /// Also write `NAME` / `LANDINGPAGE` information types.
    pub info_types: bool,
}

impl Default for HandleOptions {
    fn default() -> Self {
        HandleOptions {
            resolver: DEFAULT_HANDLE_RESOLVER.to_string(),
            info_types: false,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    handle: String,
    values: Vec<HandleEntry>,
}

impl HandleRecord {
    /// Pretty JSON, `{"handle": ..., "values": [{index, type, data}]}`,
    /// with a trailing newline.
    pub fn render(&self) -> String {
        let wire = Wire {
            handle: self.handle.value().to_string(),
            values: self.entries.clone(),
        };
        let mut s = serde_json::to_string_pretty(&wire).expect("handle record serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, HandleError> {
        let wire: Wire =
            serde_json::from_str(text).map_err(|e| HandleError::Structure(e.to_string()))?;
        let hr = HandleRecord {
            handle: Pid::parse(&wire.handle),
            entries: wire.values,
        };
        hr.check()?;
        Ok(hr)
    }

    /// Structural invariants: positive, strictly ascending indices and
    /// exactly one `URL` value.
    pub fn check(&self) -> Result<(), HandleError> {
        let mut last = 0;
        for e in &self.entries {
            if e.index <= last {
                return Err(HandleError::Structure(format!(
                    "index {} is not positive and strictly ascending",
                    e.index
                )));
            }
            last = e.index;
        }
        let urls = self.entries.iter().filter(|e| e.kind == URL_TYPE).count();
        if urls != 1 {
            return Err(HandleError::Structure(format!(
                "expected exactly one URL value, found {urls}"
            )));
        }
        Ok(())
    }

    pub fn url(&self) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.kind == URL_TYPE)
            .map(|e| e.data.as_str())
    }

    pub fn entry(&self, kind: &str) -> Option<&HandleEntry> {
        self.entries.iter().find(|e| e.kind == kind)
    }
}

pub fn to_handle_record(record: &InstrumentRecord, types: &TypeHandleMap) -> Result<HandleRecord, HandleError> {
    to_handle_record_with(record, types, &HandleOptions::default())
}

pub fn to_handle_record_with(
    record: &InstrumentRecord,
    types: &TypeHandleMap,
    opts: &HandleOptions,
) -> Result<HandleRecord, HandleError> {
    use HandleProperty as P;
    let pid = record
        .identifier
        .clone()
        .ok_or(HandleError::MissingMandatory("Identifier"))?;
    let landing = record
        .landing_page
        .clone()
        .ok_or(HandleError::MissingMandatory("LandingPage"))?;
    let name = record.name.clone().ok_or(HandleError::MissingMandatory("Name"))?;

    let mut typed: Vec<(HandleProperty, String)> = Vec::new();
    let mut id = Map::new();
    id.insert("identifierValue".into(), pid.to_reference(&opts.resolver).into());
    if let Some(t) = &record.identifier_type {
        id.insert("identifierType".into(), t.clone().into());
    }
    typed.push((P::Identifier, compact(&Value::Object(id))));
    typed.push((P::LandingPage, landing.clone()));
    typed.push((P::Name, name.clone()));
    if !record.owners.is_empty() {
        let items = record.owners.iter().map(|o| {
            let mut m = Map::new();
            m.insert("ownerName".into(), o.name.clone().into());
            if let Some(c) = &o.contact {
                m.insert("ownerContact".into(), c.clone().into());
            }
            if let Some(id) = &o.identifier {
                m.insert(
                    "ownerIdentifier".into(),
                    json!({"ownerIdentifierValue": id.value, "ownerIdentifierType": id.kind}),
                );
            }
            wrap("Owner", m)
        });
        typed.push((P::Owners, compact_array(items)));
    }
    if !record.manufacturers.is_empty() {
        let items = record.manufacturers.iter().map(|x| {
            let mut m = Map::new();
            m.insert("manufacturerName".into(), x.name.clone().into());
            if let Some(model) = &x.model_name {
                m.insert("modelName".into(), model.clone().into());
            }
            if let Some(id) = &x.identifier {
                m.insert(
                    "manufacturerIdentifier".into(),
                    json!({"manufacturerIdentifierValue": id.value, "manufacturerIdentifierType": id.kind}),
                );
            }
            wrap("Manufacturer", m)
        });
        typed.push((P::Manufacturers, compact_array(items)));
    }
    if let Some(d) = &record.description {
        typed.push((P::Description, d.clone()));
    }
    if !record.instrument_types.is_empty() {
        let single_plain = match record.instrument_types.as_slice() {
            [t] if t.scheme_hint.is_none() && !t.value.trim_start().starts_with('[') => Some(t.value.clone()),
            _ => None,
        };
        let data = single_plain.unwrap_or_else(|| {
            compact_array(record.instrument_types.iter().map(|t| {
                term_object("InstrumentType", "InstrumentTypeValue", "instrumentTypeScheme", t)
            }))
        });
        typed.push((P::InstrumentType, data));
    }
    if !record.measured_variables.is_empty() {
        let items = record
            .measured_variables
            .iter()
            .map(|t| term_object("MeasuredVariable", "VariableMeasured", "variableMeasuredScheme", t));
        typed.push((P::MeasuredVariables, compact_array(items)));
    }
    if !record.dates.is_empty() {
        let items = record.dates.iter().map(|d| {
            json!({"date": {"date": d.date, "dateType": d.date_type.as_str()}})
        });
        typed.push((P::Dates, compact_array(items)));
    }
    if !record.alternate_identifiers.is_empty() {
        let items = record.alternate_identifiers.iter().map(|a| {
            json!({"AlternateIdentifier": {"AlternateIdentifierValue": a.value, "alternateIdentifierType": a.kind}})
        });
        typed.push((P::AlternateIdentifiers, compact_array(items)));
    }
    if !record.related_identifiers.is_empty() {
        let items = record.related_identifiers.iter().map(|r| {
            json!({"RelatedIdentifier": {
                "RelatedIdentifierValue": r.value,
                "RelatedIdentifierType": r.identifier_type,
                "relationType": r.relation_type.as_str(),
            }})
        });
        typed.push((P::RelatedIdentifiers, compact_array(items)));
    }

    let mut entries = vec![HandleEntry {
        index: 1,
        kind: URL_TYPE.to_string(),
        data: landing.clone(),
    }];
    for (p, data) in typed {
        let kind = types.type_of(p).ok_or(HandleError::MissingTypeHandle(p))?;
        entries.push(HandleEntry {
            index: entries.len() as u32 + 1,
            kind: kind.to_string(),
            data,
        });
    }
    if opts.info_types {
        for (kind, data) in [(INFO_NAME_TYPE, name), (INFO_LANDING_PAGE_TYPE, landing)] {
            entries.push(HandleEntry {
                index: entries.len() as u32 + 1,
                kind: kind.to_string(),
                data,
            });
        }
    }
    Ok(HandleRecord { handle: pid, entries })
}

pub fn from_handle_record(hr: &HandleRecord, types: &TypeHandleMap) -> Result<InstrumentRecord, HandleError> {
    use HandleProperty as P;
    hr.check()?;
    let mut by_prop: BTreeMap<HandleProperty, &HandleEntry> = BTreeMap::new();
    for e in &hr.entries {
        if e.kind == URL_TYPE || IGNORED_TYPES.contains(&e.kind.as_str()) {
            continue;
        }
        let p = types.property_of(&e.kind).ok_or_else(|| HandleError::UnknownTypeHandle {
            index: e.index,
            kind: e.kind.clone(),
        })?;
        if by_prop.insert(p, e).is_some() {
            return Err(HandleError::Structure(format!("type handle `{}` appears more than once", e.kind)));
        }
    }

    let mut rec = InstrumentRecord::default();

    let id_entry = by_prop.get(&P::Identifier).ok_or(HandleError::MissingMandatory("Identifier"))?;
    let v = entry_json(id_entry)?;
    with_entry(id_entry, || {
        let mut o = ObjectReader::new(&v, "Identifier")?;
        rec.identifier = Some(Pid::parse(&o.req_str("identifierValue")?));
        rec.identifier_type = o.opt_str("identifierType")?;
        o.finish()
    })?;

    rec.landing_page = Some(match by_prop.get(&P::LandingPage) {
        Some(e) => e.data.clone(),
        None => hr.url().unwrap_or_default().to_string(),
    });
    rec.name = Some(
        by_prop
            .get(&P::Name)
            .ok_or(HandleError::MissingMandatory("Name"))?
            .data
            .clone(),
    );

    let owners = by_prop.get(&P::Owners).ok_or(HandleError::MissingMandatory("Owners"))?;
    rec.owners = wrapped_items(owners, "Owner", |o| {
        let name = o.req_str("ownerName")?;
        let contact = o.opt_str("ownerContact")?;
        let identifier = nested_party(o, "ownerIdentifier", "ownerIdentifierValue", "ownerIdentifierType")?;
        Ok(Owner {
            name,
            contact,
            identifier,
        })
    })?;

    let makers = by_prop
        .get(&P::Manufacturers)
        .ok_or(HandleError::MissingMandatory("Manufacturers"))?;
    rec.manufacturers = wrapped_items(makers, "Manufacturer", |o| {
        let name = o.req_str("manufacturerName")?;
        let model_name = o.opt_str("modelName")?;
        let identifier = nested_party(
            o,
            "manufacturerIdentifier",
            "manufacturerIdentifierValue",
            "manufacturerIdentifierType",
        )?;
        Ok(Manufacturer {
            name,
            model_name,
            identifier,
        })
    })?;

    if let Some(e) = by_prop.get(&P::Description) {
        rec.description = Some(e.data.clone());
    }
    if let Some(e) = by_prop.get(&P::InstrumentType) {
        rec.instrument_types = if e.data.trim_start().starts_with('[') {
            wrapped_items(e, "InstrumentType", |o| term_from(o, "InstrumentTypeValue", "instrumentTypeScheme"))?
        } else {
            vec![TypedTerm::new(e.data.clone())]
        };
    }
    if let Some(e) = by_prop.get(&P::MeasuredVariables) {
        rec.measured_variables =
            wrapped_items(e, "MeasuredVariable", |o| term_from(o, "VariableMeasured", "variableMeasuredScheme"))?;
    }
    if let Some(e) = by_prop.get(&P::Dates) {
        rec.dates = wrapped_items(e, "date", |o| {
            let date = o.req_str("date")?;
            let date_type = DateType::from(o.req_str("dateType")?.as_str());
            Ok(InstrumentDate { date, date_type })
        })?;
    }
    if let Some(e) = by_prop.get(&P::AlternateIdentifiers) {
        rec.alternate_identifiers = wrapped_items(e, "AlternateIdentifier", |o| {
            Ok(AlternateIdentifier {
                value: o.req_str("AlternateIdentifierValue")?,
                kind: o.req_str("alternateIdentifierType")?,
            })
        })?;
    }
    if let Some(e) = by_prop.get(&P::RelatedIdentifiers) {
        rec.related_identifiers = wrapped_items(e, "RelatedIdentifier", |o| {
            Ok(RelatedIdentifier {
                value: o.req_str("RelatedIdentifierValue")?,
                identifier_type: o.req_str("RelatedIdentifierType")?,
                relation_type: RelationType::from(o.req_str("relationType")?.as_str()),
            })
        })?;
    }
    Ok(rec)
}

fn compact(v: &Value) -> String {
    serde_json::to_string(v).expect("JSON values always serialize")
}

fn compact_array(items: impl Iterator<Item = Value>) -> String {
    compact(&Value::Array(items.collect()))
}

fn wrap(key: &str, inner: Map<String, Value>) -> Value {
    let mut outer = Map::new();
    outer.insert(key.to_string(), Value::Object(inner));
    Value::Object(outer)
}

fn term_object(wrapper: &str, value_key: &str, scheme_key: &str, t: &TypedTerm) -> Value {
    let mut m = Map::new();
    m.insert(value_key.to_string(), t.value.clone().into());
    if let Some(s) = &t.scheme_hint {
        m.insert(scheme_key.to_string(), s.clone().into());
    }
    wrap(wrapper, m)
}

fn term_from(o: &mut ObjectReader<'_>, value_key: &str, scheme_key: &str) -> Result<TypedTerm, FieldError> {
    Ok(TypedTerm {
        value: o.req_str(value_key)?,
        scheme_hint: o.opt_str(scheme_key)?,
    })
}

fn nested_party(
    o: &mut ObjectReader<'_>,
    key: &str,
    value_key: &str,
    type_key: &str,
) -> Result<Option<PartyIdentifier>, FieldError> {
    let Some(v) = o.value(key) else {
        return Ok(None);
    };
    let path = o.child_path(key);
    let mut inner = ObjectReader::new(v, &path)?;
    let id = PartyIdentifier {
        value: inner.req_str(value_key)?,
        kind: inner.req_str(type_key)?,
    };
    inner.finish()?;
    Ok(Some(id))
}

fn entry_json(e: &HandleEntry) -> Result<Value, HandleError> {
    serde_json::from_str(&e.data).map_err(|err| HandleError::MalformedEntryData {
        index: e.index,
        message: err.to_string(),
    })
}

fn field_message(e: FieldError) -> String {
    match e {
        FieldError::Type { path, expected } => format!("{path}: expected {expected}"),
        FieldError::Missing { path } => format!("{path} is missing"),
        FieldError::Unknown { name, path } => format!("unknown key `{name}` in {path}"),
    }
}

fn with_entry<T>(e: &HandleEntry, f: impl FnOnce() -> Result<T, FieldError>) -> Result<T, HandleError> {
    f().map_err(|err| HandleError::MalformedEntryData {
        index: e.index,
        message: field_message(err),
    })
}

/// Decodes `[{"<key>": {...}}, ...]`, rejecting unknown keys at both levels.
fn wrapped_items<T>(
    e: &HandleEntry,
    key: &str,
    mut item: impl FnMut(&mut ObjectReader<'_>) -> Result<T, FieldError>,
) -> Result<Vec<T>, HandleError> {
    let v = entry_json(e)?;
    with_entry(e, || {
        let arr = as_array(&v, "")?;
        let mut out = Vec::with_capacity(arr.len());
        for (i, wrapper) in arr.iter().enumerate() {
            let path = format!("[{i}]");
            let mut outer = ObjectReader::new(wrapper, &path)?;
            let inner_v = outer.req_value(key)?;
            let mut inner = ObjectReader::new(inner_v, &outer.child_path(key))?;
            out.push(item(&mut inner)?);
            inner.finish()?;
            outer.finish()?;
        }
        Ok(out)
    })
}
