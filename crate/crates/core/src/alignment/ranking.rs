use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::similarity::{property_names, property_sharability};
use super::AlignmentError;
use crate::fraction::Fraction;
use crate::metrics::coverage;
use crate::model::{Category, ElementSource, Etg};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedOntology {
    pub id: String,
    pub category: Category,
    pub popularity: u64,
    /// Share of model etypes the ontology also has.
    pub etype_cov: Fraction,
    /// Mean property sharability over the etypes shared with the model.
    pub sharability: Fraction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedOntology {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyRanking {
    pub entries: Vec<RankedOntology>,
    pub excluded: Vec<ExcludedOntology>,
}

/// Orders ontologies by popularity, then etype coverage of the model, then
/// property sharability, then id. Ontologies sharing no etype with the
/// model are excluded.
pub fn rank_ontologies(
    model: &Etg,
    ontologies: &[&Etg],
) -> Result<OntologyRanking, AlignmentError> {
    if ontologies.is_empty() {
        return Err(AlignmentError::NoOntologies);
    }
    let model_etypes = model.etype_elements();
    let mut ranking = OntologyRanking::default();
    for onto in ontologies {
        let etype_cov = coverage(&model_etypes, &onto.etype_elements())
            .map(|r| r.value)
            .unwrap_or(Fraction::ZERO);
        if etype_cov == Fraction::ZERO {
            ranking.excluded.push(ExcludedOntology {
                id: onto.meta.id.clone(),
                reason: "no etype in common with the model".into(),
            });
            continue;
        }
        let shared: Vec<Fraction> = model
            .etypes
            .intersection(&onto.etypes)
            .map(|e| property_sharability(&property_names(model, e), &property_names(onto, e)))
            .collect();
        ranking.entries.push(RankedOntology {
            id: onto.meta.id.clone(),
            category: onto.meta.category,
            popularity: onto.meta.popularity,
            etype_cov,
            sharability: Fraction::mean(&shared),
        });
    }
    ranking.entries.sort_by(|a, b| {
        (
            Reverse(a.popularity),
            Reverse(a.etype_cov),
            Reverse(a.sharability),
            &a.id,
        )
            .cmp(&(
                Reverse(b.popularity),
                Reverse(b.etype_cov),
                Reverse(b.sharability),
                &b.id,
            ))
    });
    ranking.excluded.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(ranking)
}
