//! Record validation: mandatory properties, identifier and URL syntax,
//! controlled vocabularies.
//!
//! Validation never fails; every problem becomes an entry in the report.
//! Free-text (soft-typed) properties produce at most warnings.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::model::*;
use crate::vocab::{VocabMatch, VocabularySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ViolationCode {
    MissingMandatory,
    EmptyValue,
    BadIdentifierSyntax,
    UnknownVocabularyTerm,
    DuplicateAlternateIdentifier,
    BadDate,
    BadUrl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub path: String,
    pub message: String,
    pub severity: Severity,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Warning)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            let sev = match v.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{sev}[{:?}] {}: {}", v.code, v.path, v.message)?;
        }
        Ok(())
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, severity: Severity, code: ViolationCode, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            code,
            path: path.into(),
            message: message.into(),
            severity,
        });
    }

    fn error(&mut self, code: ViolationCode, path: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Error, code, path, message);
    }

    fn warn(&mut self, code: ViolationCode, path: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Warning, code, path, message);
    }

    fn mandatory(&mut self, path: &str, value: Option<&str>) -> Option<String> {
        match value {
            None => {
                self.error(ViolationCode::MissingMandatory, path, format!("{path} is mandatory"));
                None
            }
            Some(v) => self.non_empty(path, v),
        }
    }

    fn non_empty(&mut self, path: &str, value: &str) -> Option<String> {
        if value.trim().is_empty() {
            self.error(ViolationCode::EmptyValue, path, format!("{path} is empty"));
            None
        } else {
            Some(value.to_string())
        }
    }

    /// Soft-typed check: only a case variant of a listed token is reported.
    fn recommended_token(&mut self, vocab: &VocabularySet, property: &str, path: &str, value: &str) {
        if let Some(VocabMatch::CaseVariant(canonical)) = vocab.check_property(property, value) {
            self.warn(
                ViolationCode::UnknownVocabularyTerm,
                path,
                format!("`{value}` differs only in case from the recommended token `{canonical}`"),
            );
        }
    }
}

pub fn validate(record: &InstrumentRecord, vocab: &VocabularySet) -> ValidationReport {
    use ViolationCode::*;
    let mut c = Collector(Vec::new());

    match &record.identifier {
        None => c.error(MissingMandatory, "identifier", "identifier is mandatory"),
        Some(pid) => {
            if let Err(e) = pid.check_syntax() {
                c.error(BadIdentifierSyntax, "identifier", e.to_string());
            }
        }
    }

    if let Some(t) = c.mandatory("identifier_type", record.identifier_type.as_deref()) {
        c.recommended_token(vocab, "identifierType", "identifier_type", &t);
    }

    if let Some(url) = c.mandatory("landing_page", record.landing_page.as_deref()) {
        if !is_absolute_url(&url) {
            c.error(BadUrl, "landing_page", format!("`{url}` is not an absolute URL"));
        }
    }

    c.mandatory("name", record.name.as_deref());

    if let Some(d) = &record.description {
        c.non_empty("description", d);
    }

    if record.owners.is_empty() {
        c.error(MissingMandatory, "owners", "at least one owner is required");
    }
    for (i, o) in record.owners.iter().enumerate() {
        let base = format!("owners[{i}]");
        c.non_empty(&format!("{base}.ownerName"), &o.name);
        if let Some(contact) = &o.contact {
            c.non_empty(&format!("{base}.ownerContact"), contact);
        }
        if let Some(id) = &o.identifier {
            party_identifier(&mut c, &base, "ownerIdentifier", id);
        }
    }

    if record.manufacturers.is_empty() {
        c.error(MissingMandatory, "manufacturers", "at least one manufacturer is required");
    }
    for (i, m) in record.manufacturers.iter().enumerate() {
        let base = format!("manufacturers[{i}]");
        c.non_empty(&format!("{base}.manufacturerName"), &m.name);
        if let Some(model) = &m.model_name {
            c.non_empty(&format!("{base}.modelName"), model);
        }
        if let Some(id) = &m.identifier {
            party_identifier(&mut c, &base, "manufacturerIdentifier", id);
        }
    }

    typed_terms(&mut c, vocab, "instrument_types", "InstrumentType", &record.instrument_types);
    typed_terms(&mut c, vocab, "measured_variables", "VariableMeasured", &record.measured_variables);

    for (i, d) in record.dates.iter().enumerate() {
        let base = format!("dates[{i}]");
        if d.calendar_date().is_none() {
            c.error(BadDate, format!("{base}.date"), format!("`{}` is not a valid YYYY-MM-DD date", d.date));
        }
        if let DateType::Other(t) = &d.date_type {
            let path = format!("{base}.dateType");
            match vocab.check_property("dateType", t) {
                Some(VocabMatch::Exact) => {}
                Some(VocabMatch::CaseVariant(canonical)) => c.warn(
                    UnknownVocabularyTerm,
                    path,
                    format!("`{t}` differs only in case from `{canonical}`"),
                ),
                _ => c.error(UnknownVocabularyTerm, path, format!("`{t}` is not a known dateType")),
            }
        }
    }

    let mut seen = HashSet::new();
    for (i, a) in record.alternate_identifiers.iter().enumerate() {
        let base = format!("alternate_identifiers[{i}]");
        c.non_empty(&format!("{base}.alternateIdentifier"), &a.value);
        let type_path = format!("{base}.alternateIdentifierType");
        if c.non_empty(&type_path, &a.kind).is_some() {
            c.recommended_token(vocab, "alternateIdentifierType", &type_path, &a.kind);
        }
        if !seen.insert((a.value.as_str(), a.kind.as_str())) {
            c.error(
                DuplicateAlternateIdentifier,
                base,
                format!("alternate identifier ({}, {}) is listed more than once", a.value, a.kind),
            );
        }
    }

    for (i, r) in record.related_identifiers.iter().enumerate() {
        let base = format!("related_identifiers[{i}]");
        let value = c.non_empty(&format!("{base}.relatedIdentifier"), &r.value);
        let kind = c.non_empty(&format!("{base}.relatedIdentifierType"), &r.identifier_type);
        if let (Some(value), Some(kind)) = (value, kind) {
            related_syntax(&mut c, &base, &value, &kind);
        }
        if let RelationType::Other(t) = &r.relation_type {
            let path = format!("{base}.relationType");
            match vocab.check_property("relationType", t) {
                Some(VocabMatch::Exact) => {}
                Some(VocabMatch::CaseVariant(canonical)) => c.warn(
                    UnknownVocabularyTerm,
                    path,
                    format!("`{t}` differs only in case from `{canonical}`"),
                ),
                _ => c.warn(UnknownVocabularyTerm, path, format!("`{t}` is not a known relationType")),
            }
        }
    }

    let mut violations = c.0;
    violations.sort_by(|a, b| a.path.cmp(&b.path).then(a.code.cmp(&b.code)));
    ValidationReport { violations }
}

fn party_identifier(c: &mut Collector, base: &str, key: &str, id: &PartyIdentifier) {
    let value_path = format!("{base}.{key}");
    let value = c.non_empty(&value_path, &id.value);
    let kind = c.non_empty(&format!("{base}.{key}Type"), &id.kind);
    if let (Some(value), Some(kind)) = (value, kind) {
        if kind.eq_ignore_ascii_case("URL") && !is_absolute_url(&value) {
            c.error(ViolationCode::BadUrl, value_path, format!("`{value}` is not an absolute URL"));
        }
    }
}

fn typed_terms(c: &mut Collector, vocab: &VocabularySet, field: &str, property: &str, terms: &[TypedTerm]) {
    for (i, t) in terms.iter().enumerate() {
        let path = format!("{field}[{i}]");
        if c.non_empty(&path, &t.value).is_none() || is_absolute_url(&t.value) {
            continue;
        }
        match vocab.check_property(property, &t.value) {
            None | Some(VocabMatch::Exact) => {}
            Some(VocabMatch::CaseVariant(canonical)) => c.warn(
                ViolationCode::UnknownVocabularyTerm,
                path,
                format!("`{}` differs only in case from `{canonical}`", t.value),
            ),
            Some(VocabMatch::Unknown) => c.warn(
                ViolationCode::UnknownVocabularyTerm,
                path,
                format!("free-text {property} `{}` is neither a concept URL nor a listed token", t.value),
            ),
        }
    }
}

fn related_syntax(c: &mut Collector, base: &str, value: &str, kind: &str) {
    let path = format!("{base}.relatedIdentifier");
    let pid = crate::pid::Pid::parse(value);
    if kind.eq_ignore_ascii_case("URL") {
        if !is_absolute_url(value) {
            c.error(ViolationCode::BadUrl, path, format!("`{value}` is not an absolute URL"));
        }
    } else if kind.eq_ignore_ascii_case("DOI") {
        let ok = *pid.scheme() == crate::pid::PidScheme::Doi && pid.check_syntax().is_ok();
        if !ok {
            c.error(ViolationCode::BadIdentifierSyntax, path, format!("`{value}` is not a DOI"));
        }
    } else if kind.eq_ignore_ascii_case("Handle") {
        let ok = matches!(pid.scheme(), crate::pid::PidScheme::Handle | crate::pid::PidScheme::Doi)
            && pid.check_syntax().is_ok();
        if !ok {
            c.error(ViolationCode::BadIdentifierSyntax, path, format!("`{value}` is not a handle"));
        }
    }
}

/// Syntactic check only: a scheme and a host.
pub fn is_absolute_url(s: &str) -> bool {
    if s.trim() != s {
        return false;
    }
    match url::Url::parse(s) {
        Ok(u) => u.has_host() && !u.host_str().unwrap_or("").is_empty(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pid::Pid;

    fn base() -> InstrumentRecord {
        InstrumentRecord {
            identifier: Some(Pid::parse("21.T11998/0000-0000-0001")),
            identifier_type: Some("MeasuringInstrument".into()),
            landing_page: Some("https://example.org/i/1".into()),
            name: Some("Thermistor".into()),
            owners: vec![Owner::named("Lab")],
            manufacturers: vec![Manufacturer::named("Corp")],
            ..Default::default()
        }
    }

    fn codes(r: &ValidationReport) -> Vec<(ViolationCode, &str, Severity)> {
        r.violations.iter().map(|v| (v.code, v.path.as_str(), v.severity)).collect()
    }

    #[test]
    fn minimal_record_is_clean() {
        let r = validate(&base(), &VocabularySet::builtin());
        assert!(r.violations.is_empty(), "{r}");
    }

    #[test]
    fn every_problem_is_reported() {
        let mut rec = base();
        rec.name = None;
        rec.landing_page = Some("not a url".into());
        rec.owners.clear();
        let r = validate(&rec, &VocabularySet::builtin());
        assert_eq!(
            codes(&r),
            vec![
                (ViolationCode::BadUrl, "landing_page", Severity::Error),
                (ViolationCode::MissingMandatory, "name", Severity::Error),
                (ViolationCode::MissingMandatory, "owners", Severity::Error),
            ]
        );
    }

    #[test]
    fn empty_name_is_empty_value() {
        let mut rec = base();
        rec.name = Some("  ".into());
        let r = validate(&rec, &VocabularySet::builtin());
        assert_eq!(codes(&r), vec![(ViolationCode::EmptyValue, "name", Severity::Error)]);
    }

    #[test]
    fn bad_identifier_syntax() {
        let mut rec = base();
        rec.identifier = Some(Pid::parse("21.T11998/a/b"));
        let r = validate(&rec, &VocabularySet::builtin());
        assert_eq!(codes(&r), vec![(ViolationCode::BadIdentifierSyntax, "identifier", Severity::Error)]);
    }

    #[test]
    fn unknown_date_type_is_an_error_unless_configured() {
        let mut rec = base();
        rec.dates.push(InstrumentDate::new("2001-01-01", DateType::Other("Retired".into())));
        let r = validate(&rec, &VocabularySet::builtin());
        assert_eq!(
            codes(&r),
            vec![(ViolationCode::UnknownVocabularyTerm, "dates[0].dateType", Severity::Error)]
        );

        let mut set: Vec<_> = VocabularySet::builtin().iter().cloned().collect();
        let dt = set.iter_mut().find(|s| s.scheme_id == "dateType").unwrap();
        dt.terms.push(crate::vocab::Term {
            token: "Retired".into(),
            concept_url: None,
            definition: None,
        });
        let r = validate(&rec, &VocabularySet::new(set));
        assert!(r.violations.is_empty(), "{r}");
    }

    #[test]
    fn lowercase_date_type_warns() {
        let mut rec = base();
        rec.dates.push(InstrumentDate::new("2001-01-01", DateType::from("commissioned")));
        let r = validate(&rec, &VocabularySet::builtin());
        assert_eq!(
            codes(&r),
            vec![(ViolationCode::UnknownVocabularyTerm, "dates[0].dateType", Severity::Warning)]
        );
    }

    #[test]
    fn unknown_relation_type_is_only_a_warning() {
        let mut rec = base();
        rec.related_identifiers.push(RelatedIdentifier::new(
            "10.1/x",
            "DOI",
            RelationType::Other("WasCalibratedBy".into()),
        ));
        let r = validate(&rec, &VocabularySet::builtin());
        assert!(r.is_valid());
        assert_eq!(
            codes(&r),
            vec![(ViolationCode::UnknownVocabularyTerm, "related_identifiers[0].relationType", Severity::Warning)]
        );
    }

    #[test]
    fn duplicate_alternate_identifiers() {
        let mut rec = base();
        rec.alternate_identifiers = vec![
            AlternateIdentifier::serial_number("1"),
            AlternateIdentifier::new("1", "InventoryNumber"),
            AlternateIdentifier::serial_number("1"),
        ];
        let r = validate(&rec, &VocabularySet::builtin());
        assert_eq!(
            codes(&r),
            vec![(ViolationCode::DuplicateAlternateIdentifier, "alternate_identifiers[2]", Severity::Error)]
        );
    }

    #[test]
    fn free_text_instrument_type_warns_only_with_configured_scheme() {
        let mut rec = base();
        rec.instrument_types.push(TypedTerm::new("CTD sensor"));
        let with = validate(&rec, &VocabularySet::builtin());
        assert_eq!(
            codes(&with),
            vec![(ViolationCode::UnknownVocabularyTerm, "instrument_types[0]", Severity::Warning)]
        );
        let without = validate(&rec, &VocabularySet::default());
        assert!(without.violations.is_empty());
    }

    #[test]
    fn related_identifier_syntax() {
        let mut rec = base();
        rec.related_identifiers = vec![
            RelatedIdentifier::new("nope", "DOI", RelationType::IsDescribedBy),
            RelatedIdentifier::new("nope", "URL", RelationType::HasMetadata),
            RelatedIdentifier::new("https://doi.org/10.1/x", "DOI", RelationType::IsDescribedBy),
        ];
        let r = validate(&rec, &VocabularySet::builtin());
        assert_eq!(
            codes(&r),
            vec![
                (ViolationCode::BadIdentifierSyntax, "related_identifiers[0].relatedIdentifier", Severity::Error),
                (ViolationCode::BadUrl, "related_identifiers[1].relatedIdentifier", Severity::Error),
            ]
        );
    }

    #[test]
    fn urls() {
        assert!(is_absolute_url("https://linkedsystems.uk/system/instance/TOOL0022_2490/current/"));
        assert!(!is_absolute_url("/relative/path"));
        assert!(!is_absolute_url("mailto:someone@example.org"));
        assert!(!is_absolute_url(" https://example.org"));
    }
}
