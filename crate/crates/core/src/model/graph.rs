use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{Etg, Label, PropertyKind};

/// One data value together with the dataset it came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DataValue {
    pub value: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ObjectLink {
    pub property: Label,
    pub target: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entity {
    pub id: String,
    pub etype: Label,
    /// Normalized identity-key value, when the originating dataset had one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity: Option<String>,
    /// Value lists are kept sorted and free of exact duplicates.
    pub data_values: BTreeMap<Label, Vec<DataValue>>,
    pub object_links: BTreeSet<ObjectLink>,
    /// Datasets that contributed at least one row to this entity.
    pub sources: BTreeSet<String>,
}

impl Entity {
    pub fn new(id: impl Into<String>, etype: Label) -> Self {
        Entity {
            id: id.into(),
            etype,
            identity: None,
            data_values: BTreeMap::new(),
            object_links: BTreeSet::new(),
            sources: BTreeSet::new(),
        }
    }

    /// Inserts a value unless the same (value, source) pair is already present.
    /// Returns whether the entity changed.
    pub fn add_value(&mut self, property: Label, value: DataValue) -> bool {
        let values = self.data_values.entry(property).or_default();
        match values.binary_search(&value) {
            Ok(_) => false,
            Err(i) => {
                values.insert(i, value);
                true
            }
        }
    }

    /// Distinct normalized values recorded for `property`.
    pub fn normalized_values(&self, property: &Label) -> BTreeSet<String> {
        self.data_values
            .get(property)
            .map(|vs| vs.iter().map(|v| normalize_value(&v.value)).collect())
            .unwrap_or_default()
    }

    pub fn has_property(&self, property: &Label) -> bool {
        self.data_values
            .get(property)
            .is_some_and(|v| !v.is_empty())
            || self.object_links.iter().any(|l| &l.property == property)
    }

    pub fn value_count(&self) -> usize {
        self.data_values.values().map(Vec::len).sum()
    }
}

/// Value normalization used for identity keys, matching and conflict
/// detection: trimmed, lowercased, inner whitespace collapsed.
pub fn normalize_value(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Entity Graph: instances described by an [`Etg`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eg {
    pub id: String,
    pub schema: Etg,
    pub entities: BTreeMap<String, Entity>,
    pub conflict_flags: BTreeSet<(String, Label)>,
}

impl Eg {
    pub fn new(id: impl Into<String>, schema: Etg) -> Self {
        Eg {
            id: id.into(),
            schema,
            entities: BTreeMap::new(),
            conflict_flags: BTreeSet::new(),
        }
    }

    pub fn value_count(&self) -> usize {
        self.entities.values().map(Entity::value_count).sum()
    }

    pub fn link_count(&self) -> usize {
        self.entities.values().map(|e| e.object_links.len()).sum()
    }

    /// Re-derives the conflict flag for (`entity`, `property`).
    pub fn refresh_conflict(&mut self, entity: &str, property: &Label) {
        let key = (entity.to_string(), property.clone());
        let conflicting = self
            .entities
            .get(entity)
            .is_some_and(|e| e.normalized_values(property).len() >= 2);
        if conflicting {
            self.conflict_flags.insert(key);
        } else {
            self.conflict_flags.remove(&key);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum EgViolation {
    UnknownEtype {
        entity: String,
        etype: Label,
    },
    UndeclaredProperty {
        entity: String,
        property: Label,
    },
    /// A property used with the wrong kind (data value on an object
    /// property or the reverse).
    WrongPropertyKind {
        entity: String,
        property: Label,
    },
    EmptyValueList {
        entity: String,
        property: Label,
    },
    DanglingLink {
        entity: String,
        property: Label,
        target: String,
    },
    MismatchedId {
        key: String,
        entity: String,
    },
    InvalidConflictFlag {
        entity: String,
        property: Label,
    },
}

impl fmt::Display for EgViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EgViolation::UnknownEtype { entity, etype } => {
                write!(f, "entity `{entity}` has unknown etype `{etype}`")
            }
            EgViolation::UndeclaredProperty { entity, property } => {
                write!(f, "entity `{entity}` uses undeclared property `{property}`")
            }
            EgViolation::WrongPropertyKind { entity, property } => {
                write!(f, "entity `{entity}` uses `{property}` with the wrong kind")
            }
            EgViolation::EmptyValueList { entity, property } => {
                write!(
                    f,
                    "entity `{entity}` has an empty value list for `{property}`"
                )
            }
            EgViolation::DanglingLink {
                entity,
                property,
                target,
            } => {
                write!(
                    f,
                    "entity `{entity}` links via `{property}` to missing `{target}`"
                )
            }
            EgViolation::MismatchedId { key, entity } => {
                write!(f, "entity stored under `{key}` has id `{entity}`")
            }
            EgViolation::InvalidConflictFlag { entity, property } => {
                write!(
                    f,
                    "conflict flag ({entity}, {property}) has fewer than two distinct values"
                )
            }
        }
    }
}

/// Checks every EG invariant against its schema.
pub fn validate_eg(eg: &Eg) -> Vec<EgViolation> {
    let mut report = Vec::new();
    for (key, entity) in &eg.entities {
        if key != &entity.id {
            report.push(EgViolation::MismatchedId {
                key: key.clone(),
                entity: entity.id.clone(),
            });
        }
        if !eg.schema.etypes.contains(&entity.etype) {
            report.push(EgViolation::UnknownEtype {
                entity: entity.id.clone(),
                etype: entity.etype.clone(),
            });
        }
        let declared = eg.schema.properties_of(&entity.etype);
        for (property, values) in &entity.data_values {
            match declared.get(property) {
                None => report.push(EgViolation::UndeclaredProperty {
                    entity: entity.id.clone(),
                    property: property.clone(),
                }),
                Some(def) if def.kind != PropertyKind::Data => {
                    report.push(EgViolation::WrongPropertyKind {
                        entity: entity.id.clone(),
                        property: property.clone(),
                    })
                }
                Some(_) => {}
            }
            if values.is_empty() {
                report.push(EgViolation::EmptyValueList {
                    entity: entity.id.clone(),
                    property: property.clone(),
                });
            }
        }
        for link in &entity.object_links {
            match declared.get(&link.property) {
                None => report.push(EgViolation::UndeclaredProperty {
                    entity: entity.id.clone(),
                    property: link.property.clone(),
                }),
                Some(def) if def.kind != PropertyKind::Object => {
                    report.push(EgViolation::WrongPropertyKind {
                        entity: entity.id.clone(),
                        property: link.property.clone(),
                    })
                }
                Some(_) => {}
            }
            if !eg.entities.contains_key(&link.target) {
                report.push(EgViolation::DanglingLink {
                    entity: entity.id.clone(),
                    property: link.property.clone(),
                    target: link.target.clone(),
                });
            }
        }
    }
    for (entity, property) in &eg.conflict_flags {
        let distinct = eg
            .entities
            .get(entity)
            .map(|e| e.normalized_values(property).len())
            .unwrap_or(0);
        if distinct < 2 {
            report.push(EgViolation::InvalidConflictFlag {
                entity: entity.clone(),
                property: property.clone(),
            });
        }
    }
    report.sort();
    report.dedup();
    report
}
