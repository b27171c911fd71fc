mod common;

use common::fixture;
use pidinst::*;

fn bodc() -> InstrumentRecord {
    parse_record(&fixture("bodc-sbe37.pidinst")).unwrap()
}

fn missing(report: &ValidationReport) -> Vec<&str> {
    report
        .errors()
        .filter(|v| v.code == ViolationCode::MissingMandatory)
        .map(|v| v.path.as_str())
        .collect()
}

/// The seven properties shared by at least five use cases, each removed in
/// turn from the BODC record. `None` means the property is optional.
#[test]
fn common_properties_are_individually_removable() {
    let vocab = VocabularySet::builtin();
    type Knockout = fn(&mut InstrumentRecord);
    let cases: [(&str, Knockout, Option<&str>); 7] = [
        ("Persistent Identifier", |r| r.identifier = None, Some("identifier")),
        ("Instrument Name", |r| r.name = None, Some("name")),
        ("Instrument Description", |r| r.description = None, None),
        ("Instrument Type", |r| r.instrument_types.clear(), None),
        ("Instrument Owner", |r| r.owners.clear(), Some("owners")),
        ("Manufacturer", |r| r.manufacturers.clear(), Some("manufacturers")),
        ("Date", |r| r.dates.clear(), None),
    ];
    let full = bodc();
    assert!(full.identifier.is_some() && full.description.is_some());
    assert!(!full.instrument_types.is_empty() && !full.dates.is_empty());
    for (label, knock, expected) in cases {
        let mut r = full.clone();
        knock(&mut r);
        assert_ne!(r, full, "{label} was not present");
        let report = validate(&r, &vocab);
        match expected {
            Some(path) => assert_eq!(missing(&report), [path], "{label}: {report}"),
            None => assert!(report.is_valid(), "{label}: {report}"),
        }
        assert_eq!(parse_record(&canonicalize(&r)).unwrap(), r, "{label}");
    }
}

#[test]
fn table_three_record_is_clean() {
    let report = validate(&bodc(), &VocabularySet::builtin());
    assert!(report.is_valid(), "{report}");
    // `serialNumber` is a case variant of the recommended `SerialNumber`.
    let warnings: Vec<_> = report.warnings().map(|v| v.path.as_str()).collect();
    assert_eq!(warnings, ["alternate_identifiers[0].alternateIdentifierType"]);
}

#[test]
fn hzb_record_is_clean() {
    let r = parse_record(&fixture("hzb-e2.pidinst")).unwrap();
    assert!(validate(&r, &VocabularySet::builtin()).is_valid());
}

#[test]
fn blank_name_and_bad_landing_page() {
    let mut r = bodc();
    r.name = Some("   ".into());
    r.landing_page = Some("linkedsystems.uk/system".into());
    let report = validate(&r, &VocabularySet::builtin());
    let codes: Vec<_> = report.errors().map(|v| (v.path.as_str(), v.code)).collect();
    assert_eq!(
        codes,
        [("landing_page", ViolationCode::BadUrl), ("name", ViolationCode::EmptyValue)]
    );
}

#[test]
fn vocabulary_directory_matches_builtin() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("vocab");
    let loaded = VocabularySet::load_dir(&dir).unwrap();
    let r = bodc();
    assert_eq!(validate(&r, &loaded), validate(&r, &VocabularySet::builtin()));
}

#[test]
fn report_is_deterministic_and_sorted() {
    let mut r = bodc();
    r.dates[0].date = "1999-13-01".into();
    r.alternate_identifiers.push(r.alternate_identifiers[0].clone());
    r.owners[0].name.clear();
    let vocab = VocabularySet::builtin();
    let a = validate(&r, &vocab);
    assert_eq!(a, validate(&r.clone(), &vocab));
    let keys: Vec<_> = a.violations.iter().map(|v| (v.path.clone(), v.code)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(a.errors().count(), 3, "{a}");
}
