use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::document::{parse_json, read_text};
use crate::model::{
    Category, CompetencyQuery, Datatype, DocumentError, Label, PropertyKind, ResourceKind,
    ResourceMeta,
};

#[derive(Debug, Error)]
pub enum PurposeError {
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("{path}: at `{field}`: {message}")]
    Invalid {
        path: PathBuf,
        field: String,
        message: String,
    },
    #[error("{path}: duplicate {what} id `{id}`")]
    DuplicateId {
        path: PathBuf,
        what: &'static str,
        id: String,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PurposeFile {
    title: String,
    #[serde(default)]
    narrative: String,
    cqs: Vec<CqEntry>,
    #[serde(default)]
    datasets: Vec<DatasetEntry>,
    #[serde(default)]
    ontologies: Vec<OntologyEntry>,
    #[serde(default)]
    property_types: Vec<PropertyOverride>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CqEntry {
    id: String,
    #[serde(default)]
    sentence: String,
    etypes: Vec<Label>,
    #[serde(default)]
    properties: Vec<(Label, Label)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetEntry {
    path: PathBuf,
    id: String,
    category: Category,
    #[serde(default)]
    popularity: u64,
    #[serde(default)]
    origin: String,
    etype: Label,
    #[serde(default)]
    identity: Option<Label>,
    #[serde(default)]
    links: BTreeMap<Label, Label>,
    #[serde(default)]
    ignore: Vec<Label>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OntologyEntry {
    path: PathBuf,
    id: String,
    category: Category,
    #[serde(default)]
    popularity: u64,
    #[serde(default)]
    origin: String,
}

/// Explicit typing of a property, overriding the `data`/`string` default
/// used when modeling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyOverride {
    pub etype: Label,
    pub name: Label,
    pub kind: PropertyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datatype: Option<Datatype>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<Label>,
}

/// A candidate dataset: where to find its rows and how they map onto an etype.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetRef {
    pub path: PathBuf,
    pub meta: ResourceMeta,
    pub etype: Label,
    pub identity: Option<Label>,
    /// Link columns and the etype their values identify.
    pub links: BTreeMap<Label, Label>,
    /// Columns that are not mapped to any property.
    pub ignore: BTreeSet<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OntologyRef {
    pub path: PathBuf,
    pub meta: ResourceMeta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Purpose {
    pub title: String,
    pub narrative: String,
    pub cqs: Vec<CompetencyQuery>,
    pub dataset_refs: Vec<DatasetRef>,
    pub ontology_refs: Vec<OntologyRef>,
    pub property_overrides: Vec<PropertyOverride>,
    /// Directory relative resource paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Purpose {
    /// Identifier derived from the title, used to name generated graphs.
    pub fn slug(&self) -> String {
        Label::new(&self.title)
            .map(|l| l.as_str().replace('_', "-"))
            .unwrap_or_else(|_| "purpose".to_string())
    }

    pub fn dataset(&self, id: &str) -> Option<&DatasetRef> {
        self.dataset_refs.iter().find(|d| d.meta.id == id)
    }

    pub fn ontology(&self, id: &str) -> Option<&OntologyRef> {
        self.ontology_refs.iter().find(|o| o.meta.id == id)
    }
}

/// Reads and validates a purpose file.
pub fn parse_purpose(path: &Path) -> Result<Purpose, PurposeError> {
    let text = read_text(path)?;
    parse_purpose_str(path, &text)
}

pub fn parse_purpose_str(path: &Path, text: &str) -> Result<Purpose, PurposeError> {
    let file: PurposeFile = parse_json(path, text)?;
    let invalid = |field: String, message: String| PurposeError::Invalid {
        path: path.to_path_buf(),
        field,
        message,
    };

    if file.cqs.is_empty() {
        return Err(invalid(
            "cqs".into(),
            "a purpose must state at least one competency query".into(),
        ));
    }

    let mut cq_ids = BTreeSet::new();
    let mut cqs = Vec::with_capacity(file.cqs.len());
    for (i, entry) in file.cqs.into_iter().enumerate() {
        if !cq_ids.insert(entry.id.clone()) {
            return Err(PurposeError::DuplicateId {
                path: path.to_path_buf(),
                what: "competency query",
                id: entry.id,
            });
        }
        let cq = CompetencyQuery::new(entry.id, entry.sentence, entry.etypes, entry.properties)
            .map_err(|e| invalid(format!("cqs[{i}]"), e.to_string()))?;
        cqs.push(cq);
    }

    let mut resource_ids = BTreeSet::new();
    let mut check_id = |id: &str| {
        if resource_ids.insert(id.to_string()) {
            Ok(())
        } else {
            Err(PurposeError::DuplicateId {
                path: path.to_path_buf(),
                what: "resource",
                id: id.to_string(),
            })
        }
    };

    let mut dataset_refs = Vec::new();
    for (i, d) in file.datasets.into_iter().enumerate() {
        check_id(&d.id)?;
        if let Some(identity) = &d.identity {
            if d.links.contains_key(identity) {
                return Err(invalid(
                    format!("datasets[{i}].identity"),
                    format!("column `{identity}` cannot be both identity and link"),
                ));
            }
        }
        dataset_refs.push(DatasetRef {
            path: d.path,
            meta: ResourceMeta {
                id: d.id,
                kind: ResourceKind::Dataset,
                category: d.category,
                popularity: d.popularity,
                origin: d.origin,
            },
            etype: d.etype,
            identity: d.identity,
            links: d.links,
            ignore: d.ignore.into_iter().collect(),
        });
    }

    let mut ontology_refs = Vec::new();
    for o in file.ontologies {
        check_id(&o.id)?;
        ontology_refs.push(OntologyRef {
            path: o.path,
            meta: ResourceMeta {
                id: o.id,
                kind: ResourceKind::Ontology,
                category: o.category,
                popularity: o.popularity,
                origin: o.origin,
            },
        });
    }

    let mut seen_overrides = BTreeSet::new();
    for (i, o) in file.property_types.iter().enumerate() {
        let well_formed = match o.kind {
            PropertyKind::Data => o.range.is_none(),
            PropertyKind::Object => o.range.is_some() && o.datatype.is_none(),
        };
        if !well_formed {
            return Err(invalid(
                format!("property_types[{i}]"),
                "data properties take a datatype, object properties take a range".into(),
            ));
        }
        if !seen_overrides.insert((o.etype.clone(), o.name.clone())) {
            return Err(invalid(
                format!("property_types[{i}]"),
                format!("{}.{} is typed twice", o.etype, o.name),
            ));
        }
    }

    Ok(Purpose {
        title: file.title,
        narrative: file.narrative,
        cqs,
        dataset_refs,
        ontology_refs,
        property_overrides: file.property_types,
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PURPOSE: &str = r#"{
  "title": "Mini purpose",
  "cqs": [
    { "id": "cq1", "sentence": "Which hospitals exist?", "etypes": ["Hospital"], "properties": [["hospital", "Name"]] }
  ],
  "datasets": [
    { "path": "h.csv", "id": "h", "category": "common", "popularity": 2, "etype": "hospital", "identity": "code" }
  ],
  "ontologies": [
    { "path": "o.json", "id": "o", "category": "core" }
  ]
}"#;

    fn parse(text: &str) -> Result<Purpose, PurposeError> {
        parse_purpose_str(Path::new("/tmp/p/purpose.json"), text)
    }

    #[test]
    fn parses_minimal_purpose() {
        let p = parse(PURPOSE).unwrap();
        assert_eq!(p.cqs.len(), 1);
        assert_eq!(
            p.cqs[0].property_pairs.iter().next().unwrap().1.as_str(),
            "name"
        );
        assert_eq!(p.dataset_refs[0].meta.popularity, 2);
        assert_eq!(p.ontology_refs[0].meta.popularity, 0);
        assert_eq!(p.base_dir, Path::new("/tmp/p"));
        assert_eq!(p.slug(), "mini-purpose");
    }

    #[test]
    fn duplicate_cq_id() {
        let text = PURPOSE.replace(
            "\"cqs\": [",
            "\"cqs\": [ { \"id\": \"cq1\", \"etypes\": [\"x\"] },",
        );
        assert!(matches!(
            parse(&text),
            Err(PurposeError::DuplicateId { .. })
        ));
    }

    #[test]
    fn duplicate_resource_id_across_kinds() {
        let text = PURPOSE.replace("\"id\": \"o\"", "\"id\": \"h\"");
        assert!(matches!(
            parse(&text),
            Err(PurposeError::DuplicateId {
                what: "resource",
                ..
            })
        ));
    }

    #[test]
    fn empty_cq_list_is_rejected() {
        let text = r#"{ "title": "t", "cqs": [] }"#;
        match parse(text) {
            Err(PurposeError::Invalid { field, .. }) => assert_eq!(field, "cqs"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_has_location() {
        let text = PURPOSE.replace("\"category\": \"core\"", "\"category\": \"central\"");
        match parse(&text) {
            Err(PurposeError::Document(DocumentError::Parse { field, line, .. })) => {
                assert_eq!(field, "ontologies[0].category");
                assert_eq!(line, 10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cq_property_outside_its_etypes_is_rejected() {
        let text = PURPOSE.replace("[\"hospital\", \"Name\"]", "[\"clinic\", \"name\"]");
        match parse(&text) {
            Err(PurposeError::Invalid { field, .. }) => assert_eq!(field, "cqs[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
