//! Phase 2: the ETG model built from the competency queries and the
//! schemas of the selected datasets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inception::{Candidate, CandidateRanking, PropertyOverride};
use crate::metrics::{evaluate_gate, GateError, GateId, GatePair, GateReport, Thresholds};
use crate::model::{
    property_key, validate_etg, Category, ColumnRole, CompetencyQuery, DatasetSchema, Datatype,
    ElementKind, ElementSource, Etg, EtgViolation, Label, PropertyDef, PropertyKind, ResourceKind,
    ResourceMeta,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    FromCq,
    FromDataset,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub origin: Origin,
    /// Selected datasets that declare the element.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub datasets: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtgModel {
    pub etg: Etg,
    /// Keyed by element key: `etype` or `etype.property`.
    pub provenance: BTreeMap<String, Provenance>,
    /// Category of the most reusable dataset that introduced each etype.
    pub etype_categories: BTreeMap<Label, Category>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelingError {
    #[error("{etype}.{property} is declared as {first} and as {second}")]
    ConflictingPropertyKind {
        etype: Label,
        property: Label,
        first: String,
        second: String,
    },
    #[error("generated model is invalid: {0:?}")]
    Invalid(Vec<EtgViolation>),
}

fn describe(kind: PropertyKind, range: Option<&Label>) -> String {
    match (kind, range) {
        (PropertyKind::Object, Some(r)) => format!("an object property to `{r}`"),
        (PropertyKind::Object, None) => "an object property".into(),
        (PropertyKind::Data, _) => "a data property".into(),
    }
}

#[derive(Default)]
struct Declaration {
    /// First explicit shape seen, with its description for error messages.
    shape: Option<(PropertyKind, Option<Label>, Option<Datatype>)>,
    datasets: BTreeSet<String>,
    from_cq: bool,
}

impl Declaration {
    fn declare(
        &mut self,
        etype: &Label,
        property: &Label,
        kind: PropertyKind,
        range: Option<Label>,
        datatype: Option<Datatype>,
    ) -> Result<(), ModelingError> {
        match &self.shape {
            None => {
                self.shape = Some((kind, range, datatype));
                Ok(())
            }
            Some((k, r, _)) if *k == kind && (kind == PropertyKind::Data || *r == range) => Ok(()),
            Some((k, r, _)) => Err(ModelingError::ConflictingPropertyKind {
                etype: etype.clone(),
                property: property.clone(),
                first: describe(*k, r.as_ref()),
                second: describe(kind, range.as_ref()),
            }),
        }
    }
}

/// Builds the ETG model. Every query element is kept; every mapped column
/// of a selected dataset is added. Properties default to `data`/`string`
/// unless an override types them.
pub fn build_etg_model(
    id: &str,
    cqs: &[CompetencyQuery],
    selected: &[&DatasetSchema],
    overrides: &[PropertyOverride],
) -> Result<EtgModel, ModelingError> {
    let model_id = format!("{id}-model");
    let mut etg = Etg::new(
        model_id.clone(),
        ResourceMeta {
            id: model_id,
            kind: ResourceKind::Ontology,
            category: Category::Core,
            popularity: 0,
            origin: "etg model".into(),
        },
    );
    let mut provenance: BTreeMap<String, Provenance> = BTreeMap::new();
    let mut etype_categories: BTreeMap<Label, Category> = BTreeMap::new();
    let mut declarations: BTreeMap<(Label, Label), Declaration> = BTreeMap::new();

    let mut note = |key: String, origin: Origin, dataset: Option<&str>| {
        let entry = provenance.entry(key).or_insert(Provenance {
            origin,
            datasets: BTreeSet::new(),
        });
        entry.origin = entry.origin.min(origin);
        if let Some(d) = dataset {
            entry.datasets.insert(d.to_string());
        }
    };

    for cq in cqs {
        for etype in &cq.etypes {
            etg.add_etype(etype.clone());
            note(etype.as_str().to_string(), Origin::FromCq, None);
        }
        for (etype, property) in &cq.property_pairs {
            declarations
                .entry((etype.clone(), property.clone()))
                .or_default()
                .from_cq = true;
            note(property_key(etype, property), Origin::FromCq, None);
        }
    }

    // Explicit overrides are applied first so that dataset declarations are
    // checked against them.
    for o in overrides {
        let decl = declarations
            .entry((o.etype.clone(), o.name.clone()))
            .or_default();
        decl.declare(&o.etype, &o.name, o.kind, o.range.clone(), o.datatype)?;
    }

    for schema in selected {
        let etype = &schema.assigned_etype;
        let id = schema.dataset_id.as_str();
        etg.add_etype(etype.clone());
        note(etype.as_str().to_string(), Origin::FromDataset, Some(id));
        etype_categories
            .entry(etype.clone())
            .and_modify(|c| *c = (*c).min(schema.meta.category))
            .or_insert(schema.meta.category);
        for column in &schema.columns {
            let Some(property) = &column.property else {
                continue;
            };
            let decl = declarations
                .entry((etype.clone(), property.clone()))
                .or_default();
            if column.role == ColumnRole::Link {
                decl.declare(
                    etype,
                    property,
                    PropertyKind::Object,
                    column.link_target.clone(),
                    None,
                )?;
            } else {
                decl.declare(etype, property, PropertyKind::Data, None, None)?;
            }
            decl.datasets.insert(id.to_string());
            note(property_key(etype, property), Origin::FromDataset, Some(id));
        }
    }

    for ((etype, property), decl) in &declarations {
        if !decl.from_cq && decl.datasets.is_empty() {
            // An override for an element nobody asked for or supplies.
            continue;
        }
        let def = match &decl.shape {
            Some((PropertyKind::Object, Some(range), _)) => {
                if etg.etypes.insert(range.clone()) {
                    if decl.datasets.is_empty() {
                        note(range.as_str().to_string(), Origin::FromCq, None);
                    }
                    for d in &decl.datasets {
                        note(range.as_str().to_string(), Origin::FromDataset, Some(d));
                    }
                }
                PropertyDef::object(property.clone(), range.clone())
            }
            Some((_, _, datatype)) => {
                PropertyDef::data(property.clone(), datatype.unwrap_or(Datatype::String))
            }
            None => PropertyDef::data(property.clone(), Datatype::String),
        };
        etg.add_etype(etype.clone());
        etg.put_property(etype, def);
    }

    for etype in &etg.etypes {
        etype_categories
            .entry(etype.clone())
            .or_insert(Category::Contextual);
    }

    let violations = validate_etg(&etg);
    if !violations.is_empty() {
        return Err(ModelingError::Invalid(violations));
    }
    Ok(EtgModel {
        etg,
        provenance,
        etype_categories,
    })
}

/// Top `max_per_category` shortlisted datasets of each category, in
/// ranking order; categories are concatenated common, core, contextual.
pub fn select_datasets(
    ranking: &CandidateRanking,
    max_per_category: Option<usize>,
) -> Vec<Candidate> {
    Category::ALL
        .into_iter()
        .flat_map(|c| {
            ranking
                .category(c)
                .iter()
                .filter(|cand| cand.kind == ResourceKind::Dataset)
                .take(max_per_category.unwrap_or(usize::MAX))
                .cloned()
        })
        .collect()
}

/// Eval(b): extensiveness of the model with respect to the queries.
pub fn eval_modeling(
    cqs: &[CompetencyQuery],
    model: &EtgModel,
    thresholds: &Thresholds,
) -> Result<GateReport, GateError> {
    let pairs = [ElementKind::Etypes, ElementKind::Properties]
        .into_iter()
        .map(|kind| GatePair {
            resource: model.etg.id.clone(),
            alpha: cqs.elements(kind),
            beta: model.etg.elements(kind),
        })
        .collect();
    let mut report = evaluate_gate(GateId::EvalB, pairs, thresholds)?;
    let half = crate::Fraction::new(1, 2).expect("non-zero denominator");
    for row in &report.rows.clone() {
        let reading = if row.result.value >= half {
            "the model reaches well beyond the competency queries"
        } else if row.result.value == crate::Fraction::ZERO {
            "the model adds nothing beyond the competency queries"
        } else {
            "the competency queries account for most of the model"
        };
        report.push_note(format!(
            "{} extensiveness {}: {}",
            row.kind, row.result.value, reading
        ));
    }
    Ok(report)
}

/// Modeling output that accompanies `etg_model.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSidecar {
    pub model: String,
    pub selection: Vec<Candidate>,
    pub etype_categories: BTreeMap<Label, Category>,
    pub provenance: BTreeMap<String, Provenance>,
}

impl ModelSidecar {
    pub fn new(model: &EtgModel, selection: Vec<Candidate>) -> Self {
        ModelSidecar {
            model: model.etg.id.clone(),
            selection,
            etype_categories: model.etype_categories.clone(),
            provenance: model.provenance.clone(),
        }
    }

    pub fn into_model(self, etg: Etg) -> EtgModel {
        EtgModel {
            etg,
            provenance: self.provenance,
            etype_categories: self.etype_categories,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Column;

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn schema(
        id: &str,
        etype: &str,
        category: Category,
        columns: &[(&str, Option<&str>)],
    ) -> DatasetSchema {
        DatasetSchema {
            dataset_id: id.into(),
            assigned_etype: l(etype),
            columns: columns
                .iter()
                .map(|(name, link)| Column {
                    name: l(name),
                    header: name.to_string(),
                    property: Some(l(name)),
                    role: if link.is_some() {
                        ColumnRole::Link
                    } else {
                        ColumnRole::Attribute
                    },
                    link_target: link.map(l),
                })
                .collect(),
            meta: ResourceMeta {
                id: id.into(),
                kind: ResourceKind::Dataset,
                category,
                popularity: 0,
                origin: String::new(),
            },
        }
    }

    fn person_cq() -> Vec<CompetencyQuery> {
        vec![CompetencyQuery::new("q", "", [l("person")], [(l("person"), l("name"))]).unwrap()]
    }

    #[test]
    fn queries_only_model() {
        let m = build_etg_model("p", &person_cq(), &[], &[]).unwrap();
        assert_eq!(m.etg.id, "p-model");
        assert_eq!(m.etg.etypes.len(), 1);
        assert!(m.provenance.values().all(|p| p.origin == Origin::FromCq));
        assert_eq!(m.etype_categories[&l("person")], Category::Contextual);
        let def = m.etg.property(&l("person"), &l("name")).unwrap();
        assert_eq!(def.datatype, Some(Datatype::String));
    }

    #[test]
    fn dataset_extends_model() {
        let d = schema(
            "people",
            "person",
            Category::Common,
            &[("name", None), ("age", None)],
        );
        let m = build_etg_model("p", &person_cq(), &[&d], &[]).unwrap();
        assert_eq!(m.provenance["person.name"].origin, Origin::FromCq);
        assert_eq!(m.provenance["person.age"].origin, Origin::FromDataset);
        assert!(m.provenance["person.age"].datasets.contains("people"));
        assert_eq!(m.etype_categories[&l("person")], Category::Common);
    }

    #[test]
    fn data_versus_object_conflict() {
        let a = schema("a", "person", Category::Core, &[("home", None)]);
        let b = schema("b", "person", Category::Core, &[("home", Some("location"))]);
        assert!(matches!(
            build_etg_model("p", &person_cq(), &[&a, &b], &[]),
            Err(ModelingError::ConflictingPropertyKind { .. })
        ));
    }

    #[test]
    fn override_types_a_property_and_conflicts_with_dataset() {
        let over = PropertyOverride {
            etype: l("person"),
            name: l("name"),
            kind: PropertyKind::Data,
            datatype: Some(Datatype::Date),
            range: None,
        };
        let m = build_etg_model("p", &person_cq(), &[], std::slice::from_ref(&over)).unwrap();
        assert_eq!(
            m.etg.property(&l("person"), &l("name")).unwrap().datatype,
            Some(Datatype::Date)
        );
        let d = schema("d", "person", Category::Core, &[("name", Some("location"))]);
        assert!(build_etg_model("p", &person_cq(), &[&d], &[over]).is_err());
    }

    #[test]
    fn link_range_becomes_an_etype() {
        let d = schema(
            "d",
            "person",
            Category::Core,
            &[("name", None), ("home", Some("location"))],
        );
        let m = build_etg_model("p", &person_cq(), &[&d], &[]).unwrap();
        assert!(m.etg.etypes.contains(&l("location")));
        assert_eq!(m.provenance["location"].origin, Origin::FromDataset);
        assert!(validate_etg(&m.etg).is_empty());
    }

    fn candidate(id: &str, category: Category) -> Candidate {
        Candidate {
            id: id.into(),
            kind: ResourceKind::Dataset,
            category,
            etype_cov: crate::Fraction::ONE,
            property_cov: None,
            popularity: 0,
        }
    }

    #[test]
    fn selection_takes_top_k_per_category() {
        let ranking = CandidateRanking {
            common: vec![
                candidate("c1", Category::Common),
                candidate("c2", Category::Common),
                candidate("c3", Category::Common),
            ],
            core: vec![candidate("k1", Category::Core)],
            contextual: vec![],
            excluded: vec![],
        };
        let ids = |v: Vec<Candidate>| v.into_iter().map(|c| c.id).collect::<Vec<_>>();
        assert_eq!(ids(select_datasets(&ranking, Some(2))), ["c1", "c2", "k1"]);
        assert_eq!(
            ids(select_datasets(&ranking, None)),
            ["c1", "c2", "c3", "k1"]
        );
    }

    #[test]
    fn eval_b_extensiveness() {
        let cqs = vec![CompetencyQuery::new("q", "", [l("a")], []).unwrap()];
        let mut m = build_etg_model("p", &cqs, &[], &[]).unwrap();
        m.etg.add_etype(l("b"));
        m.etg.add_etype(l("c"));
        let r = eval_modeling(&cqs, &m, &Thresholds::default()).unwrap();
        let etypes = r
            .rows
            .iter()
            .find(|r| r.kind == ElementKind::Etypes)
            .unwrap();
        assert_eq!(etypes.result.value, crate::Fraction::new(2, 3).unwrap());
        assert_eq!(r.verdict, crate::Verdict::Pass);
    }
}
