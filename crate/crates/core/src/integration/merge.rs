use std::collections::{BTreeMap, BTreeSet};

use super::IntegrationError;
use crate::model::{validate_eg, Eg, Entity, Etg, Label};

/// Same etype, or one a specialization of the other.
fn compatible(schema: &Etg, a: &Label, b: &Label) -> bool {
    a == b || schema.is_subtype_of(a, b) || schema.is_subtype_of(b, a)
}

/// Both entities have values for at least one common data property, and
/// agree (as normalized value sets) on every such property.
fn values_agree(a: &Entity, b: &Entity) -> bool {
    let mut shared = 0;
    for property in a.data_values.keys() {
        if !b.data_values.contains_key(property) {
            continue;
        }
        shared += 1;
        if a.normalized_values(property) != b.normalized_values(property) {
            return false;
        }
    }
    shared > 0
}

/// Pairs each fragment entity with the existing entity it denotes, if any.
///
/// Two entities match when both carry an identity key and the keys are
/// equal, or, when at least one lacks a key, when their values agree on
/// every shared property. An entity with the fragment entity's own id is
/// always its match. Returns `(fragment id, existing id)` pairs; among
/// several candidates the smallest id is taken.
pub fn match_entities(eg: &Eg, fragment: &Eg) -> Vec<(String, String)> {
    let mut keyed: BTreeMap<&str, Vec<&Entity>> = BTreeMap::new();
    let mut unkeyed: Vec<&Entity> = Vec::new();
    for entity in eg.entities.values() {
        match &entity.identity {
            Some(key) => keyed.entry(key.as_str()).or_default().push(entity),
            None => unkeyed.push(entity),
        }
    }
    let schema = &eg.schema;
    let mut matches = Vec::new();
    for candidate in fragment.entities.values() {
        let fits = |e: &Entity| compatible(schema, &e.etype, &candidate.etype);
        let found = if let Some(same) = eg.entities.get(&candidate.id).filter(|e| fits(e)) {
            Some(same)
        } else {
            let by_values = |e: &&&Entity| fits(e) && values_agree(e, candidate);
            match &candidate.identity {
                Some(key) => keyed
                    .get(key.as_str())
                    .and_then(|es| es.iter().find(|e| fits(e)))
                    .or_else(|| unkeyed.iter().find(by_values))
                    .copied(),
                None => eg
                    .entities
                    .values()
                    .find(|e| fits(e) && values_agree(e, candidate)),
            }
        };
        if let Some(existing) = found {
            matches.push((candidate.id.clone(), existing.id.clone()));
        }
    }
    matches
}

#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub eg: Eg,
    /// Old id → surviving id, for every fragment entity and for every
    /// existing entity whose id changed.
    pub ids: BTreeMap<String, String>,
}

fn absorb(into: &mut Entity, other: Entity, schema: &Etg) {
    if schema.is_subtype_of(&other.etype, &into.etype) {
        into.etype = other.etype;
    }
    if into.identity.is_none() {
        into.identity = other.identity;
    }
    for (property, values) in other.data_values {
        for value in values {
            into.add_value(property.clone(), value);
        }
    }
    into.object_links.extend(other.object_links);
    into.sources.extend(other.sources);
}

/// Merges a fragment into `eg`. A merged entity keeps the smallest of the
/// merged ids, so the result does not depend on integration order; links
/// and conflict flags follow renamed entities.
pub fn merge_with_ids(
    eg: &Eg,
    fragment: &Eg,
    matches: &[(String, String)],
) -> Result<MergeOutcome, IntegrationError> {
    let matched: BTreeMap<&str, &str> = matches
        .iter()
        .map(|(f, e)| (f.as_str(), e.as_str()))
        .collect();
    let mut out = eg.clone();
    let mut renamed: BTreeMap<String, String> = BTreeMap::new();
    let mut touched: BTreeSet<String> = BTreeSet::new();
    let resolve = |renamed: &BTreeMap<String, String>, id: &str| {
        let mut id = id.to_string();
        while let Some(next) = renamed.get(&id) {
            id = next.clone();
        }
        id
    };

    for (fid, entity) in &fragment.entities {
        let Some(existing) = matched.get(fid.as_str()) else {
            if let Some(clash) = out.entities.get(fid) {
                return Err(IntegrationError::IdCollision {
                    id: fid.clone(),
                    existing: clash.etype.clone(),
                    incoming: entity.etype.clone(),
                });
            }
            out.entities.insert(fid.clone(), entity.clone());
            touched.insert(fid.clone());
            continue;
        };
        let current = resolve(&renamed, existing);
        let mut merged = out
            .entities
            .remove(&current)
            .ok_or_else(|| IntegrationError::UnknownEntity(current.clone()))?;
        absorb(&mut merged, entity.clone(), &out.schema);
        let survivor = current.clone().min(fid.clone());
        merged.id = survivor.clone();
        if let Some(clash) = out.entities.get(&survivor) {
            return Err(IntegrationError::IdCollision {
                id: survivor,
                existing: clash.etype.clone(),
                incoming: merged.etype,
            });
        }
        out.entities.insert(survivor.clone(), merged);
        if survivor != current {
            renamed.insert(current.clone(), survivor.clone());
        }
        if survivor != *fid {
            renamed.insert(fid.clone(), survivor.clone());
        }
        touched.insert(survivor);
    }

    if !renamed.is_empty() {
        for entity in out.entities.values_mut() {
            if entity
                .object_links
                .iter()
                .any(|l| renamed.contains_key(&l.target))
            {
                entity.object_links = std::mem::take(&mut entity.object_links)
                    .into_iter()
                    .map(|mut l| {
                        l.target = resolve(&renamed, &l.target);
                        l
                    })
                    .collect();
            }
        }
    }
    let ids: BTreeMap<String, String> = fragment
        .entities
        .keys()
        .chain(renamed.keys())
        .map(|id| (id.clone(), resolve(&renamed, id)))
        .collect();

    out.conflict_flags = std::mem::take(&mut out.conflict_flags)
        .into_iter()
        .map(|(id, p)| (resolve(&renamed, &id), p))
        .collect();
    let touched: BTreeSet<String> = touched.iter().map(|id| resolve(&renamed, id)).collect();
    for id in &touched {
        let properties: Vec<Label> = out.entities[id].data_values.keys().cloned().collect();
        for property in &properties {
            out.refresh_conflict(id, property);
        }
    }

    let violations = validate_eg(&out);
    if !violations.is_empty() {
        return Err(IntegrationError::InvalidGraph(violations));
    }
    Ok(MergeOutcome { eg: out, ids })
}

pub fn merge_entities(
    eg: &Eg,
    fragment: &Eg,
    matches: &[(String, String)],
) -> Result<Eg, IntegrationError> {
    merge_with_ids(eg, fragment, matches).map(|o| o.eg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Category, DataValue, Datatype, ObjectLink, PropertyDef, ResourceKind, ResourceMeta,
    };

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn schema() -> Etg {
        let mut g = Etg::new(
            "g",
            ResourceMeta {
                id: "g".into(),
                kind: ResourceKind::Ontology,
                category: Category::Core,
                popularity: 0,
                origin: String::new(),
            },
        );
        g.add_etype(l("hospital"));
        g.add_etype(l("report"));
        g.put_property(
            &l("hospital"),
            PropertyDef::data(l("name"), Datatype::String),
        );
        g.put_property(
            &l("hospital"),
            PropertyDef::data(l("beds"), Datatype::Integer),
        );
        g.put_property(
            &l("report"),
            PropertyDef::object(l("hospital"), l("hospital")),
        );
        g
    }

    fn hospital(id: &str, key: Option<&str>, values: &[(&str, &str)]) -> Entity {
        let source = id.split('/').next().unwrap().to_string();
        let mut e = Entity::new(id, l("hospital"));
        e.identity = key.map(str::to_string);
        e.sources.insert(source.clone());
        for (p, v) in values {
            e.add_value(
                l(p),
                DataValue {
                    value: v.to_string(),
                    source: source.clone(),
                },
            );
        }
        e
    }

    fn graph(entities: Vec<Entity>) -> Eg {
        let mut eg = Eg::new("eg", schema());
        for e in entities {
            eg.entities.insert(e.id.clone(), e);
        }
        eg
    }

    #[test]
    fn keys_match_and_conflicts_are_flagged() {
        let eg = graph(vec![hospital(
            "d2/tn01",
            Some("tn01"),
            &[("name", "Santa Chiara")],
        )]);
        let frag = graph(vec![
            hospital(
                "d1/tn01",
                Some("tn01"),
                &[("name", "S. Chiara"), ("beds", "620")],
            ),
            hospital("d1/tn02", Some("tn02"), &[("name", "Rovereto")]),
        ]);
        let matches = match_entities(&eg, &frag);
        assert_eq!(
            matches,
            vec![("d1/tn01".to_string(), "d2/tn01".to_string())]
        );
        let outcome = merge_with_ids(&eg, &frag, &matches).unwrap();
        let merged = &outcome.eg.entities["d1/tn01"];
        assert_eq!(merged.sources.len(), 2);
        assert_eq!(merged.value_count(), 3);
        assert!(outcome
            .eg
            .conflict_flags
            .contains(&("d1/tn01".to_string(), l("name"))));
        assert_eq!(outcome.ids["d2/tn01"], "d1/tn01");
        assert_eq!(outcome.eg.entities.len(), 2);
    }

    #[test]
    fn renamed_targets_are_followed_by_links() {
        let mut report = Entity::new("d3/r1", l("report"));
        report.sources.insert("d3".into());
        report.object_links.insert(ObjectLink {
            property: l("hospital"),
            target: "d2/tn01".into(),
            source: "d3".into(),
        });
        let eg = graph(vec![
            hospital("d2/tn01", Some("tn01"), &[("name", "A")]),
            report,
        ]);
        let frag = graph(vec![hospital("d1/tn01", Some("tn01"), &[("name", "A")])]);
        let merged = merge_entities(&eg, &frag, &match_entities(&eg, &frag)).unwrap();
        let link = merged.entities["d3/r1"].object_links.iter().next().unwrap();
        assert_eq!(link.target, "d1/tn01");
        assert!(merged.conflict_flags.is_empty());
    }

    #[test]
    fn keyless_entities_match_on_values() {
        let eg = graph(vec![hospital(
            "d1/1",
            None,
            &[("name", "Cles"), ("beds", "110")],
        )]);
        let same = graph(vec![hospital("d2/1", None, &[("name", " CLES ")])]);
        assert_eq!(match_entities(&eg, &same).len(), 1);
        let other = graph(vec![hospital(
            "d2/1",
            None,
            &[("name", "Cles"), ("beds", "111")],
        )]);
        assert!(match_entities(&eg, &other).is_empty());
        let disjoint = graph(vec![hospital("d2/1", None, &[])]);
        assert!(match_entities(&eg, &disjoint).is_empty());
    }

    #[test]
    fn merging_twice_changes_nothing() {
        let eg = graph(vec![]);
        let frag = graph(vec![
            hospital("d1/tn01", Some("tn01"), &[("name", "A"), ("beds", "1")]),
            hospital("d1/2", None, &[("name", "B")]),
        ]);
        let once = merge_entities(&eg, &frag, &match_entities(&eg, &frag)).unwrap();
        let twice = merge_entities(&once, &frag, &match_entities(&once, &frag)).unwrap();
        assert_eq!(once, twice);
    }
}
