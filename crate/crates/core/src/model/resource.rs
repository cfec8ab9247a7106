use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Label, ModelError, ResourceMeta};

/// A formalized requirement: the etypes and (etype, property) pairs the
/// final graph must be able to answer for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompetencyQuery {
    pub id: String,
    /// The informal sentence, kept for documentation.
    pub sentence: String,
    pub etypes: BTreeSet<Label>,
    pub property_pairs: BTreeSet<(Label, Label)>,
}

impl CompetencyQuery {
    pub fn new(
        id: impl Into<String>,
        sentence: impl Into<String>,
        etypes: impl IntoIterator<Item = Label>,
        property_pairs: impl IntoIterator<Item = (Label, Label)>,
    ) -> Result<Self, ModelError> {
        let cq = CompetencyQuery {
            id: id.into(),
            sentence: sentence.into(),
            etypes: etypes.into_iter().collect(),
            property_pairs: property_pairs.into_iter().collect(),
        };
        if cq.etypes.is_empty() {
            return Err(ModelError::InvalidQuery {
                id: cq.id,
                reason: "no etypes".into(),
            });
        }
        if let Some((etype, property)) = cq
            .property_pairs
            .iter()
            .find(|(etype, _)| !cq.etypes.contains(etype))
        {
            return Err(ModelError::InvalidQuery {
                reason: format!(
                    "property pair ({etype}, {property}) names an etype the query does not list"
                ),
                id: cq.id,
            });
        }
        Ok(cq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Identity,
    Attribute,
    Link,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: Label,
    /// Header text as it appears in the file.
    pub header: String,
    pub property: Option<Label>,
    pub role: ColumnRole,
    /// Target etype of a link column.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_target: Option<Label>,
}

/// The schema of a tabular dataset whose rows instantiate one etype.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetSchema {
    pub dataset_id: String,
    pub assigned_etype: Label,
    pub columns: Vec<Column>,
    pub meta: ResourceMeta,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum SchemaViolation {
    MultipleIdentityColumns {
        columns: Vec<Label>,
    },
    DuplicateColumn {
        column: Label,
    },
    LinkWithoutTarget {
        column: Label,
    },
    /// A column named by the dataset entry that the file does not have.
    MissingColumn {
        column: Label,
    },
}

impl std::fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemaViolation::MultipleIdentityColumns { columns } => {
                let names: Vec<_> = columns.iter().map(Label::as_str).collect();
                write!(f, "more than one identity column: {}", names.join(", "))
            }
            SchemaViolation::DuplicateColumn { column } => {
                write!(
                    f,
                    "column `{column}` appears more than once after normalization"
                )
            }
            SchemaViolation::LinkWithoutTarget { column } => {
                write!(f, "link column `{column}` has no target etype")
            }
            SchemaViolation::MissingColumn { column } => {
                write!(f, "column `{column}` is not in the file")
            }
        }
    }
}

impl DatasetSchema {
    pub fn identity_column(&self) -> Option<&Column> {
        self.columns.iter().find(|c| c.role == ColumnRole::Identity)
    }

    pub fn validate(&self) -> Vec<SchemaViolation> {
        let mut report = Vec::new();
        let identities: Vec<Label> = self
            .columns
            .iter()
            .filter(|c| c.role == ColumnRole::Identity)
            .map(|c| c.name.clone())
            .collect();
        if identities.len() > 1 {
            report.push(SchemaViolation::MultipleIdentityColumns {
                columns: identities,
            });
        }
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(&c.name) {
                report.push(SchemaViolation::DuplicateColumn {
                    column: c.name.clone(),
                });
            }
            if c.role == ColumnRole::Link && c.link_target.is_none() {
                report.push(SchemaViolation::LinkWithoutTarget {
                    column: c.name.clone(),
                });
            }
        }
        report.sort();
        report.dedup();
        report
    }
}
