use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Category, Etg, Label, PropertyDef, ResourceKind, ResourceMeta};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: at `{field}`: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub category: Category,
    #[serde(default)]
    pub popularity: u64,
    #[serde(default)]
    pub origin: String,
}

/// On-disk form of an [`Etg`]. Field order here is the serialized order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtgDocument {
    pub id: String,
    pub meta: DocumentMeta,
    pub etypes: Vec<Label>,
    #[serde(default)]
    pub properties: BTreeMap<Label, Vec<PropertyDef>>,
    #[serde(default)]
    pub subclass: Vec<(Label, Label)>,
}

impl From<&Etg> for EtgDocument {
    fn from(g: &Etg) -> Self {
        EtgDocument {
            id: g.id.clone(),
            meta: DocumentMeta {
                category: g.meta.category,
                popularity: g.meta.popularity,
                origin: g.meta.origin.clone(),
            },
            etypes: g.etypes.iter().cloned().collect(),
            properties: g
                .properties
                .iter()
                .filter(|(_, ps)| !ps.is_empty())
                .map(|(e, ps)| (e.clone(), ps.clone()))
                .collect(),
            subclass: g.subclass_edges.iter().cloned().collect(),
        }
    }
}

impl From<EtgDocument> for Etg {
    fn from(doc: EtgDocument) -> Self {
        Etg {
            meta: ResourceMeta {
                id: doc.id.clone(),
                kind: ResourceKind::Ontology,
                category: doc.meta.category,
                popularity: doc.meta.popularity,
                origin: doc.meta.origin,
            },
            id: doc.id,
            etypes: doc.etypes.into_iter().collect::<BTreeSet<_>>(),
            properties: doc.properties,
            subclass_edges: doc.subclass.into_iter().collect(),
        }
    }
}

pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(
    path: &Path,
    text: &str,
) -> Result<T, DocumentError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let field = err.path().to_string();
        let inner = err.into_inner();
        DocumentError::Parse {
            path: path.to_path_buf(),
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })
}

pub(crate) fn read_text(path: &Path) -> Result<String, DocumentError> {
    std::fs::read_to_string(path).map_err(|source| DocumentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads any JSON document; parse errors carry line, column and field path.
pub fn read_json_document<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, DocumentError> {
    let text = read_text(path)?;
    parse_json(path, &text)
}

/// Reads an ontology / ETG document. The result is not validated.
pub fn read_etg_document(path: &Path) -> Result<Etg, DocumentError> {
    let text = read_text(path)?;
    parse_json::<EtgDocument>(path, &text).map(Etg::from)
}

/// Renders `g` in the document format, with a trailing newline.
pub fn write_etg_document(g: &Etg) -> String {
    let mut text = serde_json::to_string_pretty(&EtgDocument::from(g))
        .expect("ETG documents always serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_etg;

    const DOC: &str = r#"{
  "id": "mini",
  "meta": { "category": "common", "popularity": 7, "origin": "test" },
  "etypes": ["Organization", "Hospital"],
  "properties": {
    "hospital": [
      { "name": "name", "kind": "data", "datatype": "string" },
      { "name": "Part Of", "kind": "object", "range": "organization" }
    ]
  },
  "subclass": [["hospital", "organization"]]
}"#;

    #[test]
    fn parses_and_normalizes() {
        let g: Etg = parse_json::<EtgDocument>(Path::new("mini.json"), DOC)
            .unwrap()
            .into();
        assert!(validate_etg(&g).is_empty());
        assert_eq!(g.meta.popularity, 7);
        assert!(g.etypes.contains(&Label::new("hospital").unwrap()));
        assert_eq!(
            g.own_properties(&Label::new("hospital").unwrap())[1]
                .name
                .as_str(),
            "part_of"
        );
    }

    #[test]
    fn render_then_parse_is_stable() {
        let g: Etg = parse_json::<EtgDocument>(Path::new("mini.json"), DOC)
            .unwrap()
            .into();
        let text = write_etg_document(&g);
        let again: Etg = parse_json::<EtgDocument>(Path::new("x"), &text)
            .unwrap()
            .into();
        assert_eq!(write_etg_document(&again), text);
    }

    #[test]
    fn parse_error_names_field() {
        let bad = DOC.replace("\"kind\": \"data\"", "\"kind\": \"datum\"");
        match parse_json::<EtgDocument>(Path::new("bad.json"), &bad) {
            Err(DocumentError::Parse { field, line, .. }) => {
                assert_eq!(field, "properties.hospital[0].kind");
                assert_eq!(line, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
