//! Phase 4: integration of dataset rows into an entity graph.
//!
//! Each selected dataset is mapped onto the final ETG, turned into
//! entities, matched and merged into the graph. The result is exported as
//! N-Triples and checked against the competency queries (Eval(d)).

mod analysis;
mod entities;
mod export;
mod integrator;
mod mapping;
mod merge;

use std::path::PathBuf;

use thiserror::Error;

use crate::model::{DocumentError, EgViolation, Label};

pub use analysis::{
    analyze_integration, connected_components, eval_purpose, missing_link_ratio,
    populated_elements, EntityOverlap, IntegrationCase, IntegrationCaseReport,
};
pub use entities::{generate_entities, is_valid_literal, Fragment, LiteralIssue, PendingLink};
pub use export::{entity_iri, export_eg, render_ntriples, schema_iri, ExportSummary};
pub use integrator::{IntegrationSummary, Integrator};
pub use mapping::{
    apply_override, infer_mapping, read_mapping_override, ColumnTarget, DropMarker,
    MappingOverride, SchemaMapping,
};
pub use merge::{match_entities, merge_entities, merge_with_ids, MergeOutcome};

#[derive(Debug, Error)]
pub enum IntegrationError {
    #[error("dataset `{dataset}` is assigned etype `{etype}`, which the final ETG lacks")]
    UnknownEtype { dataset: String, etype: Label },
    #[error("mapping for `{dataset}`: {message}")]
    InvalidMapping { dataset: String, message: String },
    #[error("dataset `{dataset}`, line {line}: wrong number of fields")]
    RowArity { dataset: String, line: u64 },
    #[error("dataset `{dataset}`: {message}")]
    Csv { dataset: String, message: String },
    #[error("entity id `{id}` is used by a `{existing}` and an unrelated `{incoming}`")]
    IdCollision {
        id: String,
        existing: Label,
        incoming: Label,
    },
    #[error("matched entity `{0}` is not in the graph")]
    UnknownEntity(String),
    #[error("merged graph is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<EgViolation>),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
