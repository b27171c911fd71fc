//! Projection of instrument records onto DataCite 4.3 metadata.
//!
//! DataCite has no native notion of an instrument, so a few properties are
//! stretched:
//!
//! * the resource type is `Other` with the free-text type `Instrument`;
//! * each manufacturer's model name becomes a title of type `Other`,
//!   prefixed with `Model: `;
//! * owners become `HostingInstitution` contributors;
//! * `HasComponent`/`IsComponentOf` become `HasPart`/`IsPartOf`, and
//!   relation types DataCite does not know (`WasUsedIn`, ...) are dropped.
//!
//! Lossy steps are reported as warnings next to the converted record.

use std::fmt::Write as _;

use quick_xml::escape::escape;
use serde::Serialize;

use crate::model::*;
use crate::pid::{Pid, PidScheme};

pub const RESOURCE_TYPE_GENERAL: &str = "Other";
pub const RESOURCE_TYPE: &str = "Instrument";
pub const MODEL_TITLE_PREFIX: &str = "Model: ";
pub const HOSTING_INSTITUTION: &str = "HostingInstitution";

pub const DATACITE_RESOURCE_TYPES: &[&str] = &[
    "Audiovisual",
    "Collection",
    "DataPaper",
    "Dataset",
    "Event",
    "Image",
    "InteractiveResource",
    "Model",
    "PhysicalObject",
    "Service",
    "Software",
    "Sound",
    "Text",
    "Workflow",
    "Other",
];

pub const DATACITE_RELATION_TYPES: &[&str] = &[
    "IsCitedBy",
    "Cites",
    "IsSupplementTo",
    "IsSupplementedBy",
    "IsContinuedBy",
    "Continues",
    "IsDescribedBy",
    "Describes",
    "HasMetadata",
    "IsMetadataFor",
    "HasVersion",
    "IsVersionOf",
    "IsNewVersionOf",
    "IsPreviousVersionOf",
    "IsPartOf",
    "HasPart",
    "IsReferencedBy",
    "References",
    "IsDocumentedBy",
    "Documents",
    "IsCompiledBy",
    "Compiles",
    "IsVariantFormOf",
    "IsOriginalFormOf",
    "IsIdenticalTo",
    "IsReviewedBy",
    "Reviews",
    "IsDerivedFrom",
    "IsSourceOf",
    "IsRequiredBy",
    "Requires",
];

pub const DATACITE_RELATED_IDENTIFIER_TYPES: &[&str] = &[
    "ARK", "arXiv", "bibcode", "DOI", "EAN13", "EISSN", "Handle", "IGSN", "ISBN", "ISSN", "ISTC",
    "LISSN", "LSID", "PMID", "PURL", "UPC", "URL", "URN", "w3id",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NameIdentifier {
    pub name_identifier: String,
    pub name_identifier_scheme: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Creator {
    pub name: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub name_identifiers: Vec<NameIdentifier>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Title {
    pub title: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResourceType {
    #[serde(rename = "resourceTypeGeneral")]
    pub general: String,
    #[serde(rename = "resourceType")]
    pub specific: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Contributor {
    pub name: String,
    pub contributor_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DataCiteDate {
    pub date: String,
    pub date_type: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub date_information: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DataCiteAlternateIdentifier {
    pub alternate_identifier: String,
    pub alternate_identifier_type: String,
}

/// Field order matches the serialized key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DataCiteRelatedIdentifier {
    pub relation_type: String,
    pub related_identifier: String,
    pub related_identifier_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Description {
    pub description: String,
    pub description_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Subject {
    pub subject: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subject_scheme: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DataCiteRecord {
    pub doi: Pid,
    pub url: String,
    pub types: ResourceType,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub creators: Vec<Creator>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub titles: Vec<Title>,
    pub publisher: String,
    pub publication_year: u16,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub subjects: Vec<Subject>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub contributors: Vec<Contributor>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub dates: Vec<DataCiteDate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub alternate_identifiers: Vec<DataCiteAlternateIdentifier>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub related_identifiers: Vec<DataCiteRelatedIdentifier>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub descriptions: Vec<Description>,
}

impl DataCiteRecord {
    /// Shape-level checks against the DataCite 4.3 controlled lists.
    pub fn check(&self) -> Result<(), String> {
        if !DATACITE_RESOURCE_TYPES.contains(&self.types.general.as_str()) {
            return Err(format!("resourceTypeGeneral `{}` is not in DataCite 4.3", self.types.general));
        }
        if let Some(r) = self
            .related_identifiers
            .iter()
            .find(|r| !DATACITE_RELATION_TYPES.contains(&r.relation_type.as_str()))
        {
            return Err(format!("relationType `{}` is not in DataCite 4.3", r.relation_type));
        }
        if !(1000..=9999).contains(&self.publication_year) {
            return Err(format!("publicationYear {} is not a 4-digit year", self.publication_year));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CreatorPolicy {
    /// Manufacturers are creators; owners are hosting institutions.
    #[default]
    ManufacturerAsCreator,
    /// Owners are creators and hosting institutions (custom-built
    /// instruments); manufacturers become `Producer` contributors.
    OwnerAsCreator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataCiteOptions {
    pub publisher: String,
    pub publication_year: u16,
    pub creator_policy: CreatorPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionWarning {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DataCiteError {
    #[error("mandatory property {0} is missing")]
    MissingMandatory(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationMapping {
    Verbatim(&'static str),
    Approximated(&'static str),
    Dropped,
}

/// How a relation type is carried into DataCite.
pub fn map_relation(r: &RelationType) -> RelationMapping {
    match r {
        RelationType::HasComponent => RelationMapping::Approximated("HasPart"),
        RelationType::IsComponentOf => RelationMapping::Approximated("IsPartOf"),
        RelationType::WasUsedIn => RelationMapping::Dropped,
        other => DATACITE_RELATION_TYPES
            .iter()
            .find(|t| **t == other.as_str())
            .map(|t| RelationMapping::Verbatim(t))
            .unwrap_or(RelationMapping::Dropped),
    }
}

pub fn to_datacite(
    record: &InstrumentRecord,
    opts: &DataCiteOptions,
) -> Result<(DataCiteRecord, Vec<ConversionWarning>), DataCiteError> {
    let mut warnings = Vec::new();
    let doi = record
        .identifier
        .clone()
        .ok_or(DataCiteError::MissingMandatory("identifier"))?;
    let url = record
        .landing_page
        .clone()
        .ok_or(DataCiteError::MissingMandatory("landing_page"))?;
    let name = record.name.clone().ok_or(DataCiteError::MissingMandatory("name"))?;
    if *doi.scheme() != PidScheme::Doi {
        warnings.push(ConversionWarning {
            path: "identifier".into(),
            message: format!("DataCite identifiers are DOIs; `{doi}` is a {}", doi.scheme()),
        });
    }

    let mut titles = vec![Title {
        title: name,
        title_type: None,
    }];
    for m in &record.manufacturers {
        if let Some(model) = &m.model_name {
            let t = Title {
                title: format!("{MODEL_TITLE_PREFIX}{model}"),
                title_type: Some("Other".into()),
            };
            if !titles.contains(&t) {
                titles.push(t);
            }
        }
    }

    let owner_creator = |o: &Owner| Creator {
        name: o.name.clone(),
        name_identifiers: party_ids(&o.identifier),
    };
    let maker_creator = |m: &Manufacturer| Creator {
        name: m.name.clone(),
        name_identifiers: party_ids(&m.identifier),
    };
    let mut contributors: Vec<Contributor> = record
        .owners
        .iter()
        .map(|o| Contributor {
            name: o.name.clone(),
            contributor_type: HOSTING_INSTITUTION.into(),
        })
        .collect();
    let creators = match opts.creator_policy {
        CreatorPolicy::ManufacturerAsCreator => record.manufacturers.iter().map(maker_creator).collect(),
        CreatorPolicy::OwnerAsCreator => {
            for m in &record.manufacturers {
                let c = Contributor {
                    name: m.name.clone(),
                    contributor_type: "Producer".into(),
                };
                if !contributors.contains(&c) {
                    contributors.push(c);
                }
            }
            record.owners.iter().map(owner_creator).collect()
        }
    };

    let mut subjects = Vec::new();
    for (field, terms) in [
        ("InstrumentType", &record.instrument_types),
        ("VariableMeasured", &record.measured_variables),
    ] {
        for t in terms.iter() {
            subjects.push(Subject {
                subject: t.value.clone(),
                subject_scheme: Some(t.scheme_hint.clone().unwrap_or_else(|| field.to_string())),
            });
        }
    }

    let dates = record
        .dates
        .iter()
        .map(|d| DataCiteDate {
            date: d.date.clone(),
            date_type: "Other".into(),
            date_information: Some(d.date_type.as_str().to_string()),
        })
        .collect();

    let alternate_identifiers = record
        .alternate_identifiers
        .iter()
        .map(|a| DataCiteAlternateIdentifier {
            alternate_identifier: a.value.clone(),
            alternate_identifier_type: a.kind.clone(),
        })
        .collect();

    let mut related_identifiers = Vec::new();
    for (i, r) in record.related_identifiers.iter().enumerate() {
        let path = format!("related_identifiers[{i}]");
        let relation = match map_relation(&r.relation_type) {
            RelationMapping::Verbatim(t) => t,
            RelationMapping::Approximated(t) => {
                warnings.push(ConversionWarning {
                    path: path.clone(),
                    message: format!("relationType {} approximated as {t}", r.relation_type),
                });
                t
            }
            RelationMapping::Dropped => {
                warnings.push(ConversionWarning {
                    path,
                    message: format!("relationType {} has no DataCite equivalent; dropped", r.relation_type),
                });
                continue;
            }
        };
        if !DATACITE_RELATED_IDENTIFIER_TYPES.contains(&r.identifier_type.as_str()) {
            warnings.push(ConversionWarning {
                path: path.clone(),
                message: format!("relatedIdentifierType `{}` is not in DataCite 4.3", r.identifier_type),
            });
        }
        related_identifiers.push(DataCiteRelatedIdentifier {
            relation_type: relation.to_string(),
            related_identifier: r.value.clone(),
            related_identifier_type: r.identifier_type.clone(),
        });
    }

    let descriptions = record
        .description
        .iter()
        .map(|d| Description {
            description: d.clone(),
            description_type: "Abstract".into(),
        })
        .collect();

    let dc = DataCiteRecord {
        doi,
        url,
        types: ResourceType {
            general: RESOURCE_TYPE_GENERAL.into(),
            specific: RESOURCE_TYPE.into(),
        },
        creators,
        titles,
        publisher: opts.publisher.clone(),
        publication_year: opts.publication_year,
        subjects,
        contributors,
        dates,
        alternate_identifiers,
        related_identifiers,
        descriptions,
    };
    Ok((dc, warnings))
}

fn party_ids(id: &Option<PartyIdentifier>) -> Vec<NameIdentifier> {
    id.iter()
        .map(|p| NameIdentifier {
            name_identifier: p.value.clone(),
            name_identifier_scheme: p.kind.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataCiteFormat {
    Xml,
    Json,
}

/// Deterministic text. JSON is compact (one line) in the REST `attributes`
/// shape; XML follows the kernel-4 element order. The landing-page URL is
/// not part of the XML kernel and only appears in JSON.
pub fn render_datacite(dc: &DataCiteRecord, format: DataCiteFormat) -> String {
    match format {
        DataCiteFormat::Json => {
            let mut s = serde_json::to_string(dc).expect("DataCite record serializes");
            s.push('\n');
            s
        }
        DataCiteFormat::Xml => render_xml(dc),
    }
}

fn render_xml(dc: &DataCiteRecord) -> String {
    let mut x = String::new();
    let e = |s: &str| escape(s).into_owned();
    x.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    x.push_str(
        "<resource xmlns=\"http://datacite.org/schema/kernel-4\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://datacite.org/schema/kernel-4 \
         http://schema.datacite.org/meta/kernel-4.3/metadata.xsd\">\n",
    );
    let _ = writeln!(x, "  <identifier identifierType=\"DOI\">{}</identifier>", e(dc.doi.value()));
    if !dc.creators.is_empty() {
        x.push_str("  <creators>\n");
        for c in &dc.creators {
            x.push_str("    <creator>\n");
            let _ = writeln!(x, "      <creatorName>{}</creatorName>", e(&c.name));
            for n in &c.name_identifiers {
                let _ = writeln!(
                    x,
                    "      <nameIdentifier nameIdentifierScheme=\"{}\">{}</nameIdentifier>",
                    e(&n.name_identifier_scheme),
                    e(&n.name_identifier)
                );
            }
            x.push_str("    </creator>\n");
        }
        x.push_str("  </creators>\n");
    }
    if !dc.titles.is_empty() {
        x.push_str("  <titles>\n");
        for t in &dc.titles {
            match &t.title_type {
                Some(tt) => {
                    let _ = writeln!(x, "    <title titleType=\"{}\">{}</title>", e(tt), e(&t.title));
                }
                None => {
                    let _ = writeln!(x, "    <title>{}</title>", e(&t.title));
                }
            }
        }
        x.push_str("  </titles>\n");
    }
    let _ = writeln!(x, "  <publisher>{}</publisher>", e(&dc.publisher));
    let _ = writeln!(x, "  <publicationYear>{}</publicationYear>", dc.publication_year);
    let _ = writeln!(
        x,
        "  <resourceType resourceTypeGeneral=\"{}\">{}</resourceType>",
        e(&dc.types.general),
        e(&dc.types.specific)
    );
    if !dc.subjects.is_empty() {
        x.push_str("  <subjects>\n");
        for s in &dc.subjects {
            match &s.subject_scheme {
                Some(scheme) => {
                    let _ = writeln!(x, "    <subject subjectScheme=\"{}\">{}</subject>", e(scheme), e(&s.subject));
                }
                None => {
                    let _ = writeln!(x, "    <subject>{}</subject>", e(&s.subject));
                }
            }
        }
        x.push_str("  </subjects>\n");
    }
    if !dc.contributors.is_empty() {
        x.push_str("  <contributors>\n");
        for c in &dc.contributors {
            let _ = writeln!(x, "    <contributor contributorType=\"{}\">", e(&c.contributor_type));
            let _ = writeln!(x, "      <contributorName>{}</contributorName>", e(&c.name));
            x.push_str("    </contributor>\n");
        }
        x.push_str("  </contributors>\n");
    }
    if !dc.dates.is_empty() {
        x.push_str("  <dates>\n");
        for d in &dc.dates {
            let info = d
                .date_information
                .as_deref()
                .map(|i| format!(" dateInformation=\"{}\"", e(i)))
                .unwrap_or_default();
            let _ = writeln!(x, "    <date dateType=\"{}\"{info}>{}</date>", e(&d.date_type), e(&d.date));
        }
        x.push_str("  </dates>\n");
    }
    if !dc.alternate_identifiers.is_empty() {
        x.push_str("  <alternateIdentifiers>\n");
        for a in &dc.alternate_identifiers {
            let _ = writeln!(
                x,
                "    <alternateIdentifier alternateIdentifierType=\"{}\">{}</alternateIdentifier>",
                e(&a.alternate_identifier_type),
                e(&a.alternate_identifier)
            );
        }
        x.push_str("  </alternateIdentifiers>\n");
    }
    if !dc.related_identifiers.is_empty() {
        x.push_str("  <relatedIdentifiers>\n");
        for r in &dc.related_identifiers {
            let _ = writeln!(
                x,
                "    <relatedIdentifier relatedIdentifierType=\"{}\" relationType=\"{}\">{}</relatedIdentifier>",
                e(&r.related_identifier_type),
                e(&r.relation_type),
                e(&r.related_identifier)
            );
        }
        x.push_str("  </relatedIdentifiers>\n");
    }
    if !dc.descriptions.is_empty() {
        x.push_str("  <descriptions>\n");
        for d in &dc.descriptions {
            let _ = writeln!(
                x,
                "    <description descriptionType=\"{}\">{}</description>",
                e(&d.description_type),
                e(&d.description)
            );
        }
        x.push_str("  </descriptions>\n");
    }
    x.push_str("</resource>\n");
    x
}
