//! Phase 3: alignment of the ETG model with reference ontologies.
//!
//! Ontologies are ranked, every model etype is matched against every
//! ranked ontology (entity type recognition), and the final ETG is
//! generated according to the category of each etype.

mod etr;
mod generate;
mod ranking;
mod similarity;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fraction::Fraction;
use crate::model::EtgViolation;

pub use etr::{etr_predict, Prediction, PredictionVector};
pub use generate::{
    eval_alignment, generate_etg, AdoptionRate, Match, MergeAction, MergePlan, PlanEntry,
};
pub use ranking::{rank_ontologies, ExcludedOntology, OntologyRanking, RankedOntology};
pub use similarity::{
    etr_score, levenshtein, name_sim, property_names, property_overlap, property_sharability,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlignmentError {
    #[error("no reference ontology was loaded")]
    NoOntologies,
    #[error("invalid alignment policy: {0}")]
    InvalidPolicy(String),
    #[error("no predictions for ranked ontology `{0}`")]
    MissingPredictions(String),
    #[error("ranked ontology `{0}` is not loaded")]
    MissingOntology(String),
    #[error("generated ETG is invalid: {0:?}")]
    Invalid(Vec<EtgViolation>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlignmentPolicy {
    pub match_threshold: Fraction,
    pub core_adopt_threshold: Fraction,
    pub etr_name_weight: Fraction,
}

impl Default for AlignmentPolicy {
    fn default() -> Self {
        AlignmentPolicy {
            match_threshold: Fraction::new(7, 10).unwrap(),
            core_adopt_threshold: Fraction::new(3, 4).unwrap(),
            etr_name_weight: Fraction::new(1, 2).unwrap(),
        }
    }
}

impl AlignmentPolicy {
    pub fn validate(&self) -> Result<(), AlignmentError> {
        for (name, v) in [
            ("match_threshold", self.match_threshold),
            ("core_adopt_threshold", self.core_adopt_threshold),
            ("etr_name_weight", self.etr_name_weight),
        ] {
            if !v.is_unit_interval() {
                return Err(AlignmentError::InvalidPolicy(format!(
                    "{name} must lie in [0, 1]"
                )));
            }
        }
        Ok(())
    }
}
