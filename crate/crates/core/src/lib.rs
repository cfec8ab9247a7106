//! Purpose-driven knowledge graph construction.
//!
//! The pipeline runs four phases, each closed by an evaluation gate:
//!
//! 1. [`inception`]: parse the purpose, load candidate datasets and
//!    ontologies, rank them against the competency queries (Eval(a)).
//! 2. [`modeling`]: build the ETG model from the queries and the selected
//!    dataset schemas (Eval(b)).
//! 3. [`alignment`]: align the model with reference ontologies and
//!    generate the final ETG (Eval(c)).
//! 4. [`integration`]: map dataset rows onto the final ETG, merge entities,
//!    export N-Triples and check the queries are answerable (Eval(d)).

pub mod alignment;
pub mod fraction;
pub mod inception;
pub mod integration;
pub mod metrics;
pub mod model;
pub mod modeling;

pub use fraction::Fraction;
pub use metrics::{GateId, GateReport, Thresholds, Verdict};
