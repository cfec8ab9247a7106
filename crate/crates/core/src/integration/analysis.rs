use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::fraction::Fraction;
use crate::metrics::{evaluate_gate, GateError, GateId, GatePair, GateReport, Thresholds, Verdict};
use crate::model::{CompetencyQuery, Eg, ElementSet, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationCase {
    /// The dataset populates an etype the graph already had instances of.
    SharedEtype,
    NewEtype,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityOverlap {
    /// Some entity now carries values from this dataset and an earlier one.
    PopulatesBoth,
    OnlyOne,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegrationCaseReport {
    pub dataset: String,
    pub etypes: Vec<Label>,
    pub case: IntegrationCase,
    pub entity_overlap: EntityOverlap,
    pub entities_before: usize,
    pub entities_after: usize,
    pub merged_entities: usize,
    /// Conflict flags raised by this integration step.
    pub conflicts: Vec<(String, Label)>,
    pub missing_link_ratio: Fraction,
    pub components_before: usize,
    pub connected_components: usize,
}

/// Share of (entity, declared property) pairs with no value or link.
/// Zero for a graph without entities or declared properties.
pub fn missing_link_ratio(eg: &Eg) -> Fraction {
    let mut pairs = 0usize;
    let mut missing = 0usize;
    for entity in eg.entities.values() {
        for property in eg.schema.properties_of(&entity.etype).keys() {
            pairs += 1;
            if !entity.has_property(property) {
                missing += 1;
            }
        }
    }
    if pairs == 0 {
        Fraction::ZERO
    } else {
        Fraction::of(missing, pairs)
    }
}

/// Number of weakly connected components, with entities as nodes and
/// object links as undirected edges.
pub fn connected_components(eg: &Eg) -> usize {
    let index: BTreeMap<&str, usize> = eg
        .entities
        .keys()
        .enumerate()
        .map(|(i, k)| (k.as_str(), i))
        .collect();
    let mut parent: Vec<usize> = (0..index.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = index.len();
    for (id, entity) in &eg.entities {
        let a = index[id.as_str()];
        for link in &entity.object_links {
            if let Some(&b) = index.get(link.target.as_str()) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                    components -= 1;
                }
            }
        }
    }
    components
}

/// Describes what integrating `dataset` did to the graph.
pub fn analyze_integration(before: &Eg, after: &Eg, dataset: &str) -> IntegrationCaseReport {
    let contributed: Vec<_> = after
        .entities
        .values()
        .filter(|e| e.sources.contains(dataset))
        .collect();
    let etypes: BTreeSet<Label> = contributed.iter().map(|e| e.etype.clone()).collect();
    let shared = before.entities.values().any(|e| etypes.contains(&e.etype));
    let merged_entities = contributed
        .iter()
        .filter(|e| e.sources.len() > 1 || before.entities.contains_key(&e.id))
        .count();
    let conflicts = after
        .conflict_flags
        .iter()
        .filter(|(id, _)| contributed.iter().any(|e| &e.id == id))
        .filter(|flag| !before.conflict_flags.contains(flag))
        .cloned()
        .collect();
    IntegrationCaseReport {
        dataset: dataset.to_string(),
        etypes: etypes.into_iter().collect(),
        case: if shared {
            IntegrationCase::SharedEtype
        } else {
            IntegrationCase::NewEtype
        },
        entity_overlap: if contributed.iter().any(|e| e.sources.len() > 1) {
            EntityOverlap::PopulatesBoth
        } else {
            EntityOverlap::OnlyOne
        },
        entities_before: before.entities.len(),
        entities_after: after.entities.len(),
        merged_entities,
        conflicts,
        missing_link_ratio: missing_link_ratio(after),
        components_before: connected_components(before),
        connected_components: connected_components(after),
    }
}

/// Element sets the graph can answer for: every populated etype and its
/// ancestors, and `etype.property` for every property an entity has,
/// attributed to each etype of the entity's lineage.
pub fn populated_elements(eg: &Eg) -> (ElementSet, ElementSet) {
    let mut etypes = BTreeSet::new();
    let mut properties = BTreeSet::new();
    let mut lineages: BTreeMap<&Label, Vec<Label>> = BTreeMap::new();
    for entity in eg.entities.values() {
        let lineage = lineages
            .entry(&entity.etype)
            .or_insert_with(|| eg.schema.lineage(&entity.etype));
        let used: BTreeSet<&Label> = entity
            .data_values
            .keys()
            .chain(entity.object_links.iter().map(|l| &l.property))
            .collect();
        for etype in lineage.iter() {
            etypes.insert(etype.clone());
            for p in &used {
                properties.insert((etype.clone(), (*p).clone()));
            }
        }
    }
    (
        ElementSet::etypes(&etypes),
        ElementSet::properties(properties.iter().map(|(e, p)| (e, p))),
    )
}

/// Eval(d): every etype and property named by a competency query, after
/// alignment renames, must be populated in the integrated graph.
pub fn eval_purpose(
    eg: &Eg,
    cqs: &[CompetencyQuery],
    renames: &BTreeMap<Label, Label>,
    thresholds: &Thresholds,
) -> Result<GateReport, GateError> {
    let rename = |l: &Label| renames.get(l).cloned().unwrap_or_else(|| l.clone());
    let (etypes, properties) = populated_elements(eg);
    let mut pairs = Vec::new();
    for cq in cqs {
        let wanted: Vec<Label> = cq.etypes.iter().map(rename).collect();
        pairs.push(GatePair {
            resource: cq.id.clone(),
            alpha: ElementSet::etypes(&wanted),
            beta: etypes.clone(),
        });
        if !cq.property_pairs.is_empty() {
            let wanted: Vec<(Label, Label)> = cq
                .property_pairs
                .iter()
                .map(|(e, p)| (rename(e), p.clone()))
                .collect();
            pairs.push(GatePair {
                resource: cq.id.clone(),
                alpha: ElementSet::properties(wanted.iter().map(|(e, p)| (e, p))),
                beta: properties.clone(),
            });
        }
    }
    let mut report = evaluate_gate(GateId::EvalD, pairs, thresholds)?;
    if report.verdict == Verdict::Pass {
        report.push_note("every competency query is answerable from the integrated graph");
    } else {
        let missing: BTreeSet<&String> = report.failing_rows().flat_map(|r| &r.missing).collect();
        report.push_note(format!(
            "unanswered elements: {}; revisit the earlier phases that should have supplied them",
            missing.into_iter().cloned().collect::<Vec<_>>().join(", ")
        ));
    }
    Ok(report)
}
