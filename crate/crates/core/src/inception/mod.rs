//! Phase 1: the purpose, candidate resources and their reusability.

mod catalog;
mod purpose;
mod ranking;

pub use catalog::{
    collect_resources, load_dataset_schema, load_ontology, schema_from_headers, Catalog, LoadError,
    LoadProblem, Resource, ResourceLocator,
};
pub use purpose::{
    parse_purpose, parse_purpose_str, DatasetRef, OntologyRef, PropertyOverride, Purpose,
    PurposeError,
};
pub use ranking::{eval_inception, match_resources, Candidate, CandidateRanking};
