use std::fs;
use std::path::Path;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::Serialize;

use super::entities::{is_valid_literal, LiteralIssue};
use super::IntegrationError;
use crate::model::{Datatype, Eg, Label};

const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Characters left as-is in entity IRIs.
const IRI_SAFE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'_')
    .remove(b'.')
    .remove(b'~')
    .remove(b'/');

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExportSummary {
    pub triples: usize,
    /// Values exported as plain strings because they do not parse as
    /// their declared datatype.
    pub ill_typed: Vec<LiteralIssue>,
}

pub fn schema_iri(label: &Label) -> String {
    format!("urn:itelos:etg:{label}")
}

pub fn entity_iri(graph_id: &str, entity_id: &str) -> String {
    format!(
        "urn:itelos:{}:{}",
        utf8_percent_encode(graph_id, IRI_SAFE),
        utf8_percent_encode(entity_id, IRI_SAFE)
    )
}

fn escape_literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Serializes the graph as N-Triples: one `rdf:type` triple per entity, one
/// typed literal per distinct data value, one triple per object link.
/// Lines are sorted and deduplicated, so equal graphs give equal bytes.
pub fn render_ntriples(eg: &Eg) -> (String, ExportSummary) {
    let mut lines = Vec::new();
    let mut ill_typed = Vec::new();
    for entity in eg.entities.values() {
        let subject = entity_iri(&eg.id, &entity.id);
        lines.push(format!(
            "<{subject}> <{RDF_TYPE}> <{}> .",
            schema_iri(&entity.etype)
        ));
        let declared = eg.schema.properties_of(&entity.etype);
        for (property, values) in &entity.data_values {
            let datatype = declared
                .get(property)
                .map(|d| d.effective_datatype())
                .unwrap_or(Datatype::String);
            for v in values {
                let typed = if is_valid_literal(&v.value, datatype) {
                    datatype
                } else {
                    ill_typed.push(LiteralIssue {
                        entity: entity.id.clone(),
                        property: property.clone(),
                        value: v.value.clone(),
                        datatype,
                    });
                    Datatype::String
                };
                lines.push(format!(
                    "<{subject}> <{}> \"{}\"^^<{}> .",
                    schema_iri(property),
                    escape_literal(&v.value),
                    typed.xsd_iri()
                ));
            }
        }
        for link in &entity.object_links {
            lines.push(format!(
                "<{subject}> <{}> <{}> .",
                schema_iri(&link.property),
                entity_iri(&eg.id, &link.target)
            ));
        }
    }
    lines.sort();
    lines.dedup();
    ill_typed.sort();
    ill_typed.dedup();
    let mut text = lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    let summary = ExportSummary {
        triples: lines.len(),
        ill_typed,
    };
    (text, summary)
}

pub fn export_eg(eg: &Eg, path: &Path) -> Result<ExportSummary, IntegrationError> {
    let (text, summary) = render_ntriples(eg);
    fs::write(path, text).map_err(|source| IntegrationError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Category, DataValue, Entity, Etg, ObjectLink, PropertyDef, ResourceKind, ResourceMeta,
    };

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn eg() -> Eg {
        let mut g = Etg::new(
            "g",
            ResourceMeta {
                id: "g".into(),
                kind: ResourceKind::Ontology,
                category: Category::Core,
                popularity: 0,
                origin: String::new(),
            },
        );
        g.add_etype(l("hospital"));
        g.put_property(
            &l("hospital"),
            PropertyDef::data(l("name"), Datatype::String),
        );
        g.put_property(
            &l("hospital"),
            PropertyDef::data(l("beds"), Datatype::Integer),
        );
        g.put_property(
            &l("hospital"),
            PropertyDef::object(l("partner"), l("hospital")),
        );
        let mut eg = Eg::new("covid eg", g);
        let mut a = Entity::new("d1/tn 01", l("hospital"));
        for (p, v, s) in [
            ("name", "Ospedale \"S\"\nChiara", "d1"),
            ("beds", "620", "d1"),
            ("beds", "620", "d2"),
            ("beds", "many", "d2"),
        ] {
            a.add_value(
                l(p),
                DataValue {
                    value: v.into(),
                    source: s.into(),
                },
            );
        }
        a.object_links.insert(ObjectLink {
            property: l("partner"),
            target: "d1/tn 01".into(),
            source: "d1".into(),
        });
        eg.entities.insert(a.id.clone(), a);
        eg
    }

    #[test]
    fn renders_sorted_escaped_typed_lines() {
        let (text, summary) = render_ntriples(&eg());
        let lines: Vec<&str> = text.lines().collect();
        // type, name, beds 620 (deduplicated across sources), beds many, partner
        assert_eq!(lines.len(), 5);
        assert_eq!(summary.triples, 5);
        assert!(lines.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("<urn:itelos:covid%20eg:d1/tn%2001>"));
        assert!(
            text.contains(r#""Ospedale \"S\"\nChiara"^^<http://www.w3.org/2001/XMLSchema#string>"#)
        );
        assert!(text.contains(r#""620"^^<http://www.w3.org/2001/XMLSchema#integer>"#));
        assert!(text.contains(r#""many"^^<http://www.w3.org/2001/XMLSchema#string>"#));
        assert_eq!(summary.ill_typed.len(), 1);
        assert!(text.ends_with(" .\n"));
    }

    #[test]
    fn equal_graphs_give_equal_bytes() {
        assert_eq!(render_ntriples(&eg()).0, render_ntriples(&eg().clone()).0);
        assert_eq!(render_ntriples(&Eg::new("e", eg().schema)).0, "");
    }
}
