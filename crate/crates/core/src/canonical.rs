//! The canonical interchange text for instrument records.
//!
//! A record is a JSON object whose property names are the schema names
//! (`Identifier`, `identifierType`, `LandingPage`, `Owner`, ...). Output is
//! deterministic: fixed property order, two-space indentation, a trailing
//! newline, and empty lists left out.
//!
//! ```json
//! {
//!   "Identifier": "21.T11998/0000-001A-3905-F",
//!   "identifierType": "MeasuringInstrument",
//!   "LandingPage": "https://linkedsystems.uk/system/instance/TOOL0022_2490/current/",
//!   "Name": "Sea-Bird SBE 37-IM MicroCAT C-T Sensor",
//!   "Owner": [{ "ownerName": "National Oceanography Centre" }],
//!   "Manufacturer": [{ "manufacturerName": "Sea-Bird Scientific", "modelName": "SBE 37-IM" }]
//! }
//! ```

use serde_json::{Map, Value};

use crate::json::{index, put, put_opt, FieldError, ObjectReader};
use crate::model::*;
use crate::pid::Pid;

/// Media type used for canonical records.
pub const MEDIA_TYPE: &str = "application/pidinst+json";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown property `{name}` in {}", display_path(.path))]
    UnknownProperty { name: String, path: String },
    #[error("type mismatch at {path}: expected {expected}")]
    TypeMismatch { path: String, expected: &'static str },
    #[error("missing required property {path}")]
    MissingProperty { path: String },
}

fn display_path(path: &str) -> &str {
    if path.is_empty() {
        "record"
    } else {
        path
    }
}

impl From<FieldError> for ParseError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Type { path, expected } => ParseError::TypeMismatch { path, expected },
            FieldError::Missing { path } => ParseError::MissingProperty { path },
            FieldError::Unknown { name, path } => ParseError::UnknownProperty { name, path },
        }
    }
}

pub fn parse_record(input: &str) -> Result<InstrumentRecord, ParseError> {
    let value: Value = serde_json::from_str(input).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    record_from_value(&value)
}

pub fn record_from_value(value: &Value) -> Result<InstrumentRecord, ParseError> {
    let mut obj = ObjectReader::new(value, "")?;
    let identifier = obj.opt_str("Identifier")?.map(|s| Pid::parse(&s));
    let identifier_type = obj.opt_str("identifierType")?;
    let landing_page = obj.opt_str("LandingPage")?;

    let alternate_identifiers = list(&mut obj, "AlternateIdentifier", |v, path| {
        let mut o = ObjectReader::new(v, path)?;
        let value = o.req_str("AlternateIdentifier")?;
        let kind = o.req_str("alternateIdentifierType")?;
        o.finish()?;
        Ok(AlternateIdentifier { value, kind })
    })?;

    let name = obj.opt_str("Name")?;
    let description = obj.opt_str("Description")?;
    let instrument_types = list(&mut obj, "InstrumentType", |v, p| term(v, p, "InstrumentType"))?;

    let owners = list(&mut obj, "Owner", |v, path| {
        let mut o = ObjectReader::new(v, path)?;
        let name = o.req_str("ownerName")?;
        let contact = o.opt_str("ownerContact")?;
        let identifier = party(&mut o, "ownerIdentifier", "ownerIdentifierType")?;
        o.finish()?;
        Ok(Owner {
            name,
            contact,
            identifier,
        })
    })?;

    let manufacturers = list(&mut obj, "Manufacturer", |v, path| {
        let mut o = ObjectReader::new(v, path)?;
        let name = o.req_str("manufacturerName")?;
        let model_name = o.opt_str("modelName")?;
        let identifier = party(&mut o, "manufacturerIdentifier", "manufacturerIdentifierType")?;
        o.finish()?;
        Ok(Manufacturer {
            name,
            model_name,
            identifier,
        })
    })?;

    let dates = list(&mut obj, "Date", |v, path| {
        let mut o = ObjectReader::new(v, path)?;
        let date = o.req_str("Date")?;
        let date_type = DateType::from(o.req_str("dateType")?.as_str());
        o.finish()?;
        Ok(InstrumentDate { date, date_type })
    })?;

    let measured_variables =
        list(&mut obj, "VariableMeasured", |v, p| term(v, p, "VariableMeasured"))?;

    let related_identifiers = list(&mut obj, "RelatedIdentifier", |v, path| {
        let mut o = ObjectReader::new(v, path)?;
        let value = o.req_str("RelatedIdentifier")?;
        let identifier_type = o.req_str("relatedIdentifierType")?;
        let relation_type = RelationType::from(o.req_str("relationType")?.as_str());
        o.finish()?;
        Ok(RelatedIdentifier {
            value,
            identifier_type,
            relation_type,
        })
    })?;

    obj.finish()?;
    Ok(InstrumentRecord {
        identifier,
        identifier_type,
        landing_page,
        name,
        owners,
        manufacturers,
        description,
        instrument_types,
        measured_variables,
        dates,
        alternate_identifiers,
        related_identifiers,
    })
}

fn list<T>(
    obj: &mut ObjectReader<'_>,
    key: &str,
    mut item: impl FnMut(&Value, &str) -> Result<T, FieldError>,
) -> Result<Vec<T>, FieldError> {
    let path = obj.child_path(key);
    obj.opt_array(key)?
        .iter()
        .enumerate()
        .map(|(i, v)| item(v, &index(&path, i)))
        .collect()
}

fn term(v: &Value, path: &str, key: &str) -> Result<TypedTerm, FieldError> {
    if let Some(s) = v.as_str() {
        return Ok(TypedTerm::new(s));
    }
    let mut o = ObjectReader::new(v, path).map_err(|_| FieldError::Type {
        path: path.to_string(),
        expected: "string or object",
    })?;
    let value = o.req_str(key)?;
    let scheme_hint = o.opt_str("scheme")?;
    o.finish()?;
    Ok(TypedTerm { value, scheme_hint })
}

fn party(
    o: &mut ObjectReader<'_>,
    value_key: &str,
    type_key: &str,
) -> Result<Option<PartyIdentifier>, FieldError> {
    match (o.opt_str(value_key)?, o.opt_str(type_key)?) {
        (None, None) => Ok(None),
        (Some(value), Some(kind)) => Ok(Some(PartyIdentifier { value, kind })),
        (Some(_), None) => Err(FieldError::Missing {
            path: o.child_path(type_key),
        }),
        (None, Some(_)) => Err(FieldError::Missing {
            path: o.child_path(value_key),
        }),
    }
}

pub fn canonicalize(record: &InstrumentRecord) -> String {
    let mut text = serde_json::to_string_pretty(&record_to_value(record))
        .expect("JSON values always serialize");
    text.push('\n');
    text
}

pub fn record_to_value(r: &InstrumentRecord) -> Value {
    let mut m = Map::new();
    if let Some(id) = &r.identifier {
        put(&mut m, "Identifier", id.value());
    }
    put_opt(&mut m, "identifierType", &r.identifier_type);
    put_opt(&mut m, "LandingPage", &r.landing_page);
    put_list(&mut m, "AlternateIdentifier", &r.alternate_identifiers, |a| {
        let mut o = Map::new();
        put(&mut o, "AlternateIdentifier", &a.value);
        put(&mut o, "alternateIdentifierType", &a.kind);
        o
    });
    put_opt(&mut m, "Name", &r.name);
    put_opt(&mut m, "Description", &r.description);
    put_terms(&mut m, "InstrumentType", &r.instrument_types);
    put_list(&mut m, "Owner", &r.owners, |o| {
        let mut m = Map::new();
        put(&mut m, "ownerName", &o.name);
        put_opt(&mut m, "ownerContact", &o.contact);
        if let Some(id) = &o.identifier {
            put(&mut m, "ownerIdentifier", &id.value);
            put(&mut m, "ownerIdentifierType", &id.kind);
        }
        m
    });
    put_list(&mut m, "Manufacturer", &r.manufacturers, |x| {
        let mut m = Map::new();
        put(&mut m, "manufacturerName", &x.name);
        put_opt(&mut m, "modelName", &x.model_name);
        if let Some(id) = &x.identifier {
            put(&mut m, "manufacturerIdentifier", &id.value);
            put(&mut m, "manufacturerIdentifierType", &id.kind);
        }
        m
    });
    put_list(&mut m, "Date", &r.dates, |d| {
        let mut m = Map::new();
        put(&mut m, "Date", &d.date);
        put(&mut m, "dateType", d.date_type.as_str());
        m
    });
    put_terms(&mut m, "VariableMeasured", &r.measured_variables);
    put_list(&mut m, "RelatedIdentifier", &r.related_identifiers, |x| {
        let mut m = Map::new();
        put(&mut m, "RelatedIdentifier", &x.value);
        put(&mut m, "relatedIdentifierType", &x.identifier_type);
        put(&mut m, "relationType", x.relation_type.as_str());
        m
    });
    Value::Object(m)
}

fn put_list<T>(m: &mut Map<String, Value>, key: &str, items: &[T], f: impl Fn(&T) -> Map<String, Value>) {
    if !items.is_empty() {
        let arr = items.iter().map(|i| Value::Object(f(i))).collect();
        m.insert(key.to_string(), Value::Array(arr));
    }
}

fn put_terms(m: &mut Map<String, Value>, key: &str, terms: &[TypedTerm]) {
    if terms.is_empty() {
        return;
    }
    let arr = terms
        .iter()
        .map(|t| match &t.scheme_hint {
            None => Value::String(t.value.clone()),
            Some(s) => {
                let mut o = Map::new();
                put(&mut o, key, &t.value);
                put(&mut o, "scheme", s);
                Value::Object(o)
            }
        })
        .collect();
    m.insert(key.to_string(), Value::Array(arr));
}
