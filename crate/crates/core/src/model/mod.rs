//! Domain types shared by every phase: labels, schemas (ETG), instance
//! graphs (EG), competency queries, dataset schemas and element sets.

pub(crate) mod document;
mod elements;
mod graph;
mod label;
mod resource;
mod schema;

use thiserror::Error;

pub use document::{
    read_etg_document, read_json_document, write_etg_document, DocumentError, EtgDocument,
};
pub use elements::{
    etype_elements, property_elements, property_key, ElementKind, ElementSet, ElementSource,
};
pub use graph::{normalize_value, validate_eg, DataValue, Eg, EgViolation, Entity, ObjectLink};
pub use label::{normalize_label, Label};
pub use resource::{Column, ColumnRole, CompetencyQuery, DatasetSchema, SchemaViolation};
pub use schema::{
    validate_etg, Category, Datatype, Etg, EtgViolation, PropertyDef, PropertyKind, ResourceKind,
    ResourceMeta,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("label {0:?} has no alphanumeric characters")]
    EmptyLabel(String),
    #[error("competency query `{id}`: {reason}")]
    InvalidQuery { id: String, reason: String },
}
