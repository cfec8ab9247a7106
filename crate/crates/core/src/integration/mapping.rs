use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IntegrationError;
use crate::alignment::name_sim;
use crate::fraction::Fraction;
use crate::model::document::{parse_json, read_text};
use crate::model::{ColumnRole, DatasetSchema, Etg, Label, PropertyKind};

/// Where one column's values go.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnTarget {
    Property(Label, Label),
    Drop(DropMarker),
}

/// The literal string `"drop"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropMarker {
    Drop,
}

impl ColumnTarget {
    pub const DROP: ColumnTarget = ColumnTarget::Drop(DropMarker::Drop);

    pub fn property(&self) -> Option<(&Label, &Label)> {
        match self {
            ColumnTarget::Property(e, p) => Some((e, p)),
            ColumnTarget::Drop(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaMapping {
    pub dataset_id: String,
    /// Etype of the generated entities, after alignment renames.
    pub etype: Label,
    /// Keyed by normalized column name.
    pub columns: BTreeMap<Label, ColumnTarget>,
    #[serde(default)]
    pub identity_key: Vec<Label>,
}

/// Hand-written mapping file. Replaces inference for its dataset entirely:
/// columns it does not list are dropped.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingOverride {
    pub dataset_id: String,
    pub columns: BTreeMap<Label, ColumnTarget>,
    #[serde(default)]
    pub identity_key: Vec<Label>,
}

pub fn read_mapping_override(path: &Path) -> Result<MappingOverride, IntegrationError> {
    let text = read_text(path)?;
    Ok(parse_json(path, &text)?)
}

fn final_etype(
    schema: &DatasetSchema,
    etg: &Etg,
    renames: &BTreeMap<Label, Label>,
) -> Result<Label, IntegrationError> {
    let etype = renames
        .get(&schema.assigned_etype)
        .cloned()
        .unwrap_or_else(|| schema.assigned_etype.clone());
    if !etg.etypes.contains(&etype) {
        return Err(IntegrationError::UnknownEtype {
            dataset: schema.dataset_id.clone(),
            etype,
        });
    }
    Ok(etype)
}

/// Maps every column to the most similar property of the dataset's etype
/// (inherited properties included), requiring a name similarity of at
/// least 0.7 and a matching kind; anything else is dropped.
pub fn infer_mapping(
    schema: &DatasetSchema,
    etg: &Etg,
    renames: &BTreeMap<Label, Label>,
) -> Result<SchemaMapping, IntegrationError> {
    let etype = final_etype(schema, etg, renames)?;
    let threshold = Fraction::new(7, 10).expect("non-zero denominator");
    let available = etg.properties_of(&etype);

    let mut columns = BTreeMap::new();
    for column in &schema.columns {
        let wanted_kind = if column.role == ColumnRole::Link {
            PropertyKind::Object
        } else {
            PropertyKind::Data
        };
        let target = column
            .property
            .as_ref()
            .and_then(|name| {
                available
                    .iter()
                    .filter(|(_, def)| def.kind == wanted_kind)
                    .map(|(p, _)| (name_sim(name, p), p))
                    .filter(|(score, _)| *score >= threshold)
                    // Highest score wins; among equals, the first label.
                    .min_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)))
            })
            .map(|(_, p)| ColumnTarget::Property(etype.clone(), p.clone()))
            .unwrap_or(ColumnTarget::DROP);
        columns.insert(column.name.clone(), target);
    }

    let identity_key = schema
        .identity_column()
        .filter(|c| columns.get(&c.name).is_some_and(|t| t.property().is_some()))
        .map(|c| vec![c.name.clone()])
        .unwrap_or_default();

    Ok(SchemaMapping {
        dataset_id: schema.dataset_id.clone(),
        etype,
        columns,
        identity_key,
    })
}

/// Turns an override file into a mapping, checking it against the schema
/// and the final ETG.
pub fn apply_override(
    over: &MappingOverride,
    schema: &DatasetSchema,
    etg: &Etg,
    renames: &BTreeMap<Label, Label>,
) -> Result<SchemaMapping, IntegrationError> {
    let invalid = |message: String| IntegrationError::InvalidMapping {
        dataset: schema.dataset_id.clone(),
        message,
    };
    if over.dataset_id != schema.dataset_id {
        return Err(invalid(format!(
            "override is for dataset `{}`",
            over.dataset_id
        )));
    }
    let etype = final_etype(schema, etg, renames)?;
    let known: BTreeSet<&Label> = schema.columns.iter().map(|c| &c.name).collect();
    for column in over.columns.keys().chain(&over.identity_key) {
        if !known.contains(column) {
            return Err(invalid(format!("column `{column}` is not in the dataset")));
        }
    }
    let lineage = etg.lineage(&etype);
    let mut columns: BTreeMap<Label, ColumnTarget> = schema
        .columns
        .iter()
        .map(|c| (c.name.clone(), ColumnTarget::DROP))
        .collect();
    for (column, target) in &over.columns {
        if let Some((target_etype, property)) = target.property() {
            if !lineage.contains(target_etype) {
                return Err(invalid(format!(
                    "column `{column}` targets `{target_etype}`, which `{etype}` does not specialize"
                )));
            }
            if etg.property(target_etype, property).is_none() {
                return Err(invalid(format!(
                    "column `{column}` targets undeclared property {target_etype}.{property}"
                )));
            }
        }
        columns.insert(column.clone(), target.clone());
    }
    for column in &over.identity_key {
        if columns
            .get(column)
            .and_then(ColumnTarget::property)
            .is_none()
        {
            return Err(invalid(format!("identity column `{column}` is dropped")));
        }
    }
    Ok(SchemaMapping {
        dataset_id: schema.dataset_id.clone(),
        etype,
        columns,
        identity_key: over.identity_key.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Category, Column, Datatype, PropertyDef, ResourceKind, ResourceMeta};

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn etg() -> Etg {
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
        for e in ["agent", "person"] {
            g.add_etype(l(e));
        }
        g.subclass_edges.insert((l("person"), l("agent")));
        g.put_property(&l("agent"), PropertyDef::data(l("name"), Datatype::String));
        g.put_property(
            &l("person"),
            PropertyDef::data(l("birth_date"), Datatype::Date),
        );
        g.put_property(&l("person"), PropertyDef::data(l("code"), Datatype::String));
        g
    }

    fn schema(columns: &[&str]) -> DatasetSchema {
        DatasetSchema {
            dataset_id: "people".into(),
            assigned_etype: l("human"),
            columns: columns
                .iter()
                .map(|c| Column {
                    name: l(c),
                    header: c.to_string(),
                    property: Some(l(c)),
                    role: if *c == "code" {
                        ColumnRole::Identity
                    } else {
                        ColumnRole::Attribute
                    },
                    link_target: None,
                })
                .collect(),
            meta: ResourceMeta {
                id: "people".into(),
                kind: ResourceKind::Dataset,
                category: Category::Common,
                popularity: 0,
                origin: String::new(),
            },
        }
    }

    fn renames() -> BTreeMap<Label, Label> {
        BTreeMap::from([(l("human"), l("person"))])
    }

    #[test]
    fn infers_inherited_and_drops_unknown() {
        let m = infer_mapping(
            &schema(&["code", "name", "zzz_internal"]),
            &etg(),
            &renames(),
        )
        .unwrap();
        assert_eq!(m.etype, l("person"));
        assert_eq!(
            m.columns[&l("name")],
            ColumnTarget::Property(l("person"), l("name"))
        );
        assert_eq!(m.columns[&l("zzz_internal")], ColumnTarget::DROP);
        assert_eq!(m.identity_key, vec![l("code")]);
    }

    #[test]
    fn unknown_etype() {
        let err = infer_mapping(&schema(&["name"]), &etg(), &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, IntegrationError::UnknownEtype { .. }));
    }

    #[test]
    fn override_wins() {
        let s = schema(&["code", "name", "dob"]);
        let inferred = infer_mapping(&s, &etg(), &renames()).unwrap();
        assert_eq!(inferred.columns[&l("dob")], ColumnTarget::DROP);
        let over: MappingOverride = serde_json::from_str(
            r#"{"dataset_id": "people", "columns": {"dob": ["person", "birth_date"], "name": "drop", "code": ["person", "code"]}, "identity_key": ["code"]}"#,
        )
        .unwrap();
        let m = apply_override(&over, &s, &etg(), &renames()).unwrap();
        assert_eq!(
            m.columns[&l("dob")],
            ColumnTarget::Property(l("person"), l("birth_date"))
        );
        assert_eq!(m.columns[&l("name")], ColumnTarget::DROP);
    }

    #[test]
    fn override_must_target_declared_properties() {
        let s = schema(&["code", "name"]);
        let over: MappingOverride = serde_json::from_str(
            r#"{"dataset_id": "people", "columns": {"name": ["person", "nickname"]}}"#,
        )
        .unwrap();
        assert!(apply_override(&over, &s, &etg(), &renames()).is_err());
        let dropped_key: MappingOverride = serde_json::from_str(
            r#"{"dataset_id": "people", "columns": {"name": ["agent", "name"]}, "identity_key": ["code"]}"#,
        )
        .unwrap();
        assert!(apply_override(&dropped_key, &s, &etg(), &renames()).is_err());
    }
}
