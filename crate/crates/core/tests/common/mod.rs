//! Generators of valid records shared by the property suites.

#![allow(dead_code)]

use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;

use pidinst::*;

/// Arbitrary text that survives every serialization: starts and ends with a
/// letter, may contain markup and JSON metacharacters in between.
pub fn text() -> impl Strategy<Value = String> {
    "[A-Za-zé][A-Za-z0-9 äé&<>\"'/.,()-]{0,24}[A-Za-z]"
}

pub fn handle_pid() -> impl Strategy<Value = Pid> {
    ("21\\.T1[0-9]{4}", "[0-9A-F]{4}-[0-9A-F]{4}-[0-9A-F]{4}-[0-9A-F]")
        .prop_map(|(p, s)| Pid::handle(&p, &s))
}

pub fn doi_pid() -> impl Strategy<Value = Pid> {
    ("10\\.[0-9]{4,5}", "[A-Za-z0-9.-]{1,12}").prop_map(|(p, s)| Pid::parse(&format!("{p}/{s}")))
}

pub fn url() -> impl Strategy<Value = String> {
    ("[a-z]{3,8}", "[a-z0-9/_-]{0,16}").prop_map(|(h, p)| format!("https://{h}.example.org/{p}"))
}

fn party_identifier() -> impl Strategy<Value = PartyIdentifier> {
    prop_oneof![
        url().prop_map(|v| PartyIdentifier { value: v, kind: "URL".into() }),
        ("[0-9]{4}-[0-9]{4}-[0-9]{4}-[0-9]{3}[0-9X]")
            .prop_map(|v| PartyIdentifier { value: v, kind: "ORCID".into() }),
    ]
}

fn owner() -> impl Strategy<Value = Owner> {
    (text(), option::of("[a-z]{2,8}@[a-z]{2,8}\\.org"), option::of(party_identifier()))
        .prop_map(|(name, contact, identifier)| Owner { name, contact, identifier })
}

fn manufacturer() -> impl Strategy<Value = Manufacturer> {
    (text(), option::of(text()), option::of(party_identifier()))
        .prop_map(|(name, model_name, identifier)| Manufacturer { name, model_name, identifier })
}

fn term() -> impl Strategy<Value = TypedTerm> {
    let value = prop_oneof![text(), url()];
    (value, option::of("[A-Z][0-9]{2}"))
        .prop_map(|(value, scheme_hint)| TypedTerm { value, scheme_hint })
}

fn date() -> impl Strategy<Value = InstrumentDate> {
    (1950u32..2030, 1u32..=12, 1u32..=28, prop_oneof![Just(DateType::Commissioned), Just(DateType::DeCommissioned)])
        .prop_map(|(y, m, d, t)| InstrumentDate::new(format!("{y:04}-{m:02}-{d:02}"), t))
}

fn alternate() -> impl Strategy<Value = AlternateIdentifier> {
    let kind = prop_oneof![
        Just("SerialNumber".to_string()),
        Just("serialNumber".to_string()),
        Just("InventoryNumber".to_string()),
        text()
    ];
    ("[A-Za-z0-9-]{1,10}", kind).prop_map(|(v, k)| AlternateIdentifier::new(v, k))
}

pub fn relation() -> impl Strategy<Value = RelationType> {
    prop_oneof![
        4 => proptest::sample::select(RelationType::KNOWN.to_vec()),
        1 => Just(RelationType::Other("Cites".into())),
        1 => "Zz[a-z]{3,8}".prop_map(RelationType::Other),
    ]
}

fn related() -> impl Strategy<Value = RelatedIdentifier> {
    let target = prop_oneof![
        doi_pid().prop_map(|p| (p.value().to_string(), "DOI".to_string())),
        handle_pid().prop_map(|p| (p.value().to_string(), "Handle".to_string())),
        url().prop_map(|u| (u, "URL".to_string())),
    ];
    (target, relation()).prop_map(|((v, k), r)| RelatedIdentifier::new(v, k, r))
}

/// Records for which the validator reports no errors.
pub fn valid_record() -> impl Strategy<Value = InstrumentRecord> {
    let identity = (
        prop_oneof![handle_pid(), doi_pid()],
        proptest::sample::select(vec!["MeasuringInstrument", "Handle", "DOI"]),
        url(),
        text(),
        option::of(text()),
    );
    let parties = (vec(owner(), 1..3), vec(manufacturer(), 1..3));
    let rest = (
        vec(term(), 0..3),
        vec(term(), 0..4),
        vec(date(), 0..3),
        vec(alternate(), 0..3),
        vec(related(), 0..4),
    );
    (identity, parties, rest).prop_map(
        |((id, id_type, landing, name, description), (owners, manufacturers), (it, mv, dates, alt, rel))| {
            let mut alternate_identifiers: Vec<AlternateIdentifier> = Vec::new();
            for a in alt {
                if !alternate_identifiers.contains(&a) {
                    alternate_identifiers.push(a);
                }
            }
            InstrumentRecord {
                identifier: Some(id),
                identifier_type: Some(id_type.to_string()),
                landing_page: Some(landing),
                name: Some(name),
                description,
                owners,
                manufacturers,
                instrument_types: it,
                measured_variables: mv,
                dates,
                alternate_identifiers,
                related_identifiers: rel,
            }
        },
    )
}

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Corpora of up to `max` records with distinct identifiers whose relations
/// point at each other (in bare or resolver-URL form) and at outside targets.
pub fn corpus(max: usize) -> impl Strategy<Value = Vec<InstrumentRecord>> {
    proptest::collection::btree_set(0u32..200, 0..=max).prop_flat_map(|ids| {
        let ids: Vec<u32> = ids.into_iter().collect();
        let n = ids.len();
        let target = prop_oneof![
            (0u32..200, any::<bool>()).prop_map(|(i, url)| {
                let bare = format!("21.T11998/{i:04X}");
                if url { format!("http://hdl.handle.net/{bare}") } else { bare }
            }),
            (0u32..30).prop_map(|i| format!("10.1234/ext-{i}")),
        ];
        let rel = (target, proptest::sample::select(vec!["Handle", "DOI", "URL"]), relation())
            .prop_map(|(v, k, r)| RelatedIdentifier::new(v, k, r));
        vec(vec(rel, 0..5), n).prop_map(move |rels| {
            ids.iter()
                .zip(rels)
                .map(|(i, related_identifiers)| InstrumentRecord {
                    identifier: Some(Pid::parse(&format!("21.T11998/{i:04X}"))),
                    related_identifiers,
                    ..Default::default()
                })
                .collect()
        })
    })
}

/// Brute-force statement of the graph's node count, edge count and
/// dangling set.
pub fn naive_graph(corpus: &[InstrumentRecord]) -> (usize, usize, Vec<String>) {
    fn norm(s: &str) -> String {
        let s = s.trim();
        for p in ["http://hdl.handle.net/", "https://hdl.handle.net/", "https://doi.org/", "http://doi.org/", "http://dx.doi.org/", "https://dx.doi.org/"] {
            if let Some(rest) = s.strip_prefix(p) {
                return rest.to_string();
            }
        }
        s.to_string()
    }
    let ids: Vec<String> = corpus.iter().map(|r| norm(r.identifier.as_ref().unwrap().value())).collect();
    let mut external: Vec<String> = Vec::new();
    let mut triples: Vec<(String, String, String)> = Vec::new();
    for (r, from) in corpus.iter().zip(&ids) {
        for x in &r.related_identifiers {
            let to = norm(&x.value);
            if !ids.contains(&to) && !external.contains(&to) {
                external.push(to.clone());
            }
            let t = (from.clone(), x.relation_type.as_str().to_string(), to);
            if !triples.contains(&t) {
                triples.push(t);
            }
        }
    }
    external.sort();
    (ids.len() + external.len(), triples.len(), external)
}
