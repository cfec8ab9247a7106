use std::cmp::Reverse;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::similarity::{etr_score, name_sim, property_names, property_overlap};
use super::AlignmentPolicy;
use crate::fraction::Fraction;
use crate::model::{Etg, Label};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub etype: Label,
    pub score: Fraction,
    pub name_sim: Fraction,
    pub property_overlap: Fraction,
}

/// For each model etype, the ontology etypes scoring at least the match
/// threshold, best first. Lists may be empty.
pub type PredictionVector = BTreeMap<Label, Vec<Prediction>>;

/// Entity type recognition of `model`'s etypes against one ontology.
pub fn etr_predict(model: &Etg, ontology: &Etg, policy: &AlignmentPolicy) -> PredictionVector {
    let onto_props: Vec<_> = ontology
        .etypes
        .iter()
        .map(|o| (o, property_names(ontology, o)))
        .collect();
    model
        .etypes
        .iter()
        .map(|m| {
            let m_props = property_names(model, m);
            let mut candidates: Vec<Prediction> = onto_props
                .iter()
                .map(|(o, o_props)| Prediction {
                    etype: (*o).clone(),
                    score: etr_score(policy.etr_name_weight, (m, &m_props), (o, o_props)),
                    name_sim: name_sim(m, o),
                    property_overlap: property_overlap(&m_props, o_props),
                })
                .filter(|p| p.score >= policy.match_threshold)
                .collect();
            candidates.sort_by(|a, b| {
                (Reverse(a.score), Reverse(a.property_overlap), &a.etype).cmp(&(
                    Reverse(b.score),
                    Reverse(b.property_overlap),
                    &b.etype,
                ))
            });
            (m.clone(), candidates)
        })
        .collect()
}
