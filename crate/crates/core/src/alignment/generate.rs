use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::etr::{Prediction, PredictionVector};
use super::ranking::OntologyRanking;
use super::{AlignmentError, AlignmentPolicy};
use crate::fraction::Fraction;
use crate::metrics::{evaluate_gate, GateError, GateId, GatePair, GateReport, Thresholds, Verdict};
use crate::model::{
    validate_etg, Category, ElementKind, ElementSource, Etg, Label, PropertyDef, PropertyKind,
    ResourceKind, ResourceMeta,
};
use crate::modeling::EtgModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeAction {
    AdoptOntologyEtype,
    KeepModelEtype,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub ontology: String,
    pub etype: Label,
    pub score: Fraction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub model_etype: Label,
    pub category: Category,
    pub action: MergeAction,
    pub final_etype: Label,
    /// Best candidate from the highest-ranked ontology that has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Match>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub adopted_properties: Vec<Label>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub adopted_parents: Vec<(Label, Label)>,
    /// Best candidate of every ranked ontology, recorded without renaming.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<Match>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdoptionRate {
    pub adopted: usize,
    pub total: usize,
    pub rate: Fraction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergePlan {
    pub entries: Vec<PlanEntry>,
    pub adoption_rates: BTreeMap<Category, AdoptionRate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl MergePlan {
    /// Model etype → final etype, for every etype whose label changed.
    pub fn rename_map(&self) -> BTreeMap<Label, Label> {
        self.entries
            .iter()
            .filter(|e| e.model_etype != e.final_etype)
            .map(|e| (e.model_etype.clone(), e.final_etype.clone()))
            .collect()
    }

    pub fn adoption_rate(&self, category: Category) -> Option<Fraction> {
        self.adoption_rates.get(&category).map(|r| r.rate)
    }
}

fn best_candidate(
    etype: &Label,
    predictions: &BTreeMap<String, PredictionVector>,
    ranking: &OntologyRanking,
) -> Result<(Option<Match>, Vec<Match>), AlignmentError> {
    let mut first = None;
    let mut all = Vec::new();
    for ranked in &ranking.entries {
        let vector = predictions
            .get(&ranked.id)
            .ok_or_else(|| AlignmentError::MissingPredictions(ranked.id.clone()))?;
        if let Some(Prediction {
            etype: o, score, ..
        }) = vector.get(etype).and_then(|v| v.first())
        {
            let m = Match {
                ontology: ranked.id.clone(),
                etype: o.clone(),
                score: *score,
            };
            if first.is_none() {
                first = Some(m.clone());
            }
            all.push(m);
        }
    }
    Ok((first, all))
}

/// A property copied from an ontology, waiting for its range check.
struct PendingProperty {
    entry: usize,
    owner: Label,
    def: PropertyDef,
}

/// Generates the final ETG from the model, the per-ontology predictions
/// and the ontology ranking.
///
/// Common etypes adopt their best candidate; core etypes adopt it only when
/// it scores at least `core_adopt_threshold`; contextual etypes are never
/// renamed and only get annotations. Adoption brings in the candidate's
/// label, its properties and its ancestor etypes.
pub fn generate_etg(
    model: &EtgModel,
    predictions: &BTreeMap<String, PredictionVector>,
    ranking: &OntologyRanking,
    ontologies: &BTreeMap<String, Etg>,
    policy: &AlignmentPolicy,
) -> Result<(Etg, MergePlan), AlignmentError> {
    policy.validate()?;
    let source = &model.etg;

    // Decide actions, most reusable categories first.
    let mut order: Vec<(Category, &Label)> = source
        .etypes
        .iter()
        .map(|e| {
            (
                model
                    .etype_categories
                    .get(e)
                    .copied()
                    .unwrap_or(Category::Contextual),
                e,
            )
        })
        .collect();
    order.sort();

    let mut taken: BTreeSet<Label> = source.etypes.clone();
    let mut entries = Vec::with_capacity(order.len());
    for (category, etype) in order {
        let (candidate, annotations) = best_candidate(etype, predictions, ranking)?;
        let mut entry = PlanEntry {
            model_etype: etype.clone(),
            category,
            action: MergeAction::KeepModelEtype,
            final_etype: etype.clone(),
            candidate: candidate.clone(),
            adopted_properties: Vec::new(),
            adopted_parents: Vec::new(),
            annotations: Vec::new(),
            reason: None,
        };
        let wanted = match (category, &candidate) {
            (_, None) => {
                entry.reason = Some("no candidate above the match threshold".into());
                false
            }
            (Category::Common, Some(_)) => true,
            (Category::Core, Some(c)) if c.score >= policy.core_adopt_threshold => true,
            (Category::Core, Some(_)) => {
                entry.reason = Some("candidate below the core adoption threshold".into());
                false
            }
            (Category::Contextual, Some(_)) => {
                entry.annotations = annotations;
                entry.reason = Some("contextual etypes are annotated, not adopted".into());
                false
            }
        };
        if wanted {
            let target = &candidate
                .as_ref()
                .expect("wanted implies a candidate")
                .etype;
            if target != etype && taken.contains(target) {
                entry.reason = Some(format!("`{target}` is already used by another etype"));
            } else {
                taken.remove(etype);
                taken.insert(target.clone());
                entry.action = MergeAction::AdoptOntologyEtype;
                entry.final_etype = target.clone();
            }
        }
        entries.push(entry);
    }

    let renames: BTreeMap<Label, Label> = entries
        .iter()
        .map(|e| (e.model_etype.clone(), e.final_etype.clone()))
        .collect();
    let rename = |l: &Label| renames.get(l).cloned().unwrap_or_else(|| l.clone());

    let base = source.id.strip_suffix("-model").unwrap_or(&source.id);
    let final_id = format!("{base}-etg");
    let mut etg = Etg::new(
        final_id.clone(),
        ResourceMeta {
            id: final_id,
            kind: ResourceKind::Ontology,
            category: Category::Core,
            popularity: 0,
            origin: "aligned etg".into(),
        },
    );
    for e in &source.etypes {
        etg.add_etype(rename(e));
    }
    for (e, props) in &source.properties {
        for p in props {
            let mut def = p.clone();
            def.range = def.range.as_ref().map(rename);
            etg.put_property(&rename(e), def);
        }
    }
    for (child, parent) in &source.subclass_edges {
        etg.subclass_edges.insert((rename(child), rename(parent)));
    }

    let mut notes = Vec::new();
    let mut pending = Vec::new();
    for (idx, entry) in entries.iter_mut().enumerate() {
        if entry.action != MergeAction::AdoptOntologyEtype {
            continue;
        }
        let m = entry
            .candidate
            .as_ref()
            .expect("adopted entries have a candidate");
        let onto = ontologies
            .get(&m.ontology)
            .ok_or_else(|| AlignmentError::MissingOntology(m.ontology.clone()))?;
        let lineage = onto.lineage(&m.etype);
        for etype in &lineage {
            etg.add_etype(etype.clone());
            for p in onto.own_properties(etype) {
                pending.push(PendingProperty {
                    entry: idx,
                    owner: etype.clone(),
                    def: p.clone(),
                });
            }
        }
        for (child, parent) in &onto.subclass_edges {
            if !lineage.contains(child)
                || etg
                    .subclass_edges
                    .contains(&(child.clone(), parent.clone()))
            {
                continue;
            }
            if etg.would_cycle(child, parent) {
                notes.push(format!(
                    "skipped subclass edge {child} -> {parent}: it would close a cycle"
                ));
                continue;
            }
            etg.subclass_edges.insert((child.clone(), parent.clone()));
            entry.adopted_parents.push((child.clone(), parent.clone()));
        }
    }

    // Ranges are checked once every adopted etype is present.
    for PendingProperty { entry, owner, def } in pending {
        if def.kind == PropertyKind::Object {
            let range = def.range.as_ref().expect("object properties carry a range");
            if !etg.etypes.contains(range) {
                notes.push(format!(
                    "skipped {owner}.{}: range `{range}` is not part of the ETG",
                    def.name
                ));
                continue;
            }
        }
        match etg.property(&owner, &def.name) {
            Some(existing) if existing.kind != def.kind || existing.range != def.range => {
                notes.push(format!(
                    "kept the model's {owner}.{}: the ontology declares it differently",
                    def.name
                ));
            }
            Some(_) => {}
            None => {
                if owner == entries[entry].final_etype {
                    entries[entry].adopted_properties.push(def.name.clone());
                }
                etg.put_property(&owner, def);
            }
        }
    }

    let violations = validate_etg(&etg);
    if !violations.is_empty() {
        return Err(AlignmentError::Invalid(violations));
    }

    let mut adoption_rates = BTreeMap::new();
    for category in Category::ALL {
        let in_category: Vec<_> = entries.iter().filter(|e| e.category == category).collect();
        if in_category.is_empty() {
            continue;
        }
        let adopted = in_category
            .iter()
            .filter(|e| e.action == MergeAction::AdoptOntologyEtype)
            .count();
        adoption_rates.insert(
            category,
            AdoptionRate {
                adopted,
                total: in_category.len(),
                rate: Fraction::of(adopted, in_category.len()),
            },
        );
    }
    entries.sort_by(|a, b| a.model_etype.cmp(&b.model_etype));
    Ok((
        etg,
        MergePlan {
            entries,
            adoption_rates,
            notes,
        },
    ))
}

/// Eval(c): sparsity between the final ETG and each ranked ontology, on
/// etypes and on properties, must fall inside the configured band.
pub fn eval_alignment(
    etg: &Etg,
    ontologies: &[&Etg],
    thresholds: &Thresholds,
) -> Result<GateReport, GateError> {
    let mut pairs = Vec::new();
    for onto in ontologies {
        for kind in [ElementKind::Etypes, ElementKind::Properties] {
            pairs.push(GatePair {
                resource: onto.meta.id.clone(),
                alpha: etg.elements(kind),
                beta: onto.elements(kind),
            });
        }
    }
    let mut report = evaluate_gate(GateId::EvalC, pairs, thresholds)?;
    match report.verdict {
        Verdict::Pass => report.push_note(
            "sparsity is inside the band: the ETG stays close to every reference ontology while keeping its own context-specific elements",
        ),
        _ => {
            let out: BTreeSet<_> = report.failing_rows().map(|r| r.resource.clone()).collect();
            if !out.is_empty() {
                report.push_note(format!(
                    "sparsity outside the band for: {}",
                    out.into_iter().collect::<Vec<_>>().join(", ")
                ));
            }
        }
    }
    Ok(report)
}
