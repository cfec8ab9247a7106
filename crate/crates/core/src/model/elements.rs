use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{CompetencyQuery, DatasetSchema, Etg, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Etypes,
    Properties,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::Etypes => "etypes",
            ElementKind::Properties => "properties",
        })
    }
}

/// A set of normalized element keys of one kind: etype labels, or
/// `etype.property` compound keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementSet {
    kind: ElementKind,
    members: BTreeSet<String>,
}

impl ElementSet {
    pub fn empty(kind: ElementKind) -> Self {
        ElementSet {
            kind,
            members: BTreeSet::new(),
        }
    }

    pub fn etypes<'a>(labels: impl IntoIterator<Item = &'a Label>) -> Self {
        ElementSet {
            kind: ElementKind::Etypes,
            members: labels.into_iter().map(|l| l.as_str().to_string()).collect(),
        }
    }

    pub fn properties<'a>(pairs: impl IntoIterator<Item = (&'a Label, &'a Label)>) -> Self {
        ElementSet {
            kind: ElementKind::Properties,
            members: pairs.into_iter().map(|(e, p)| property_key(e, p)).collect(),
        }
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn members(&self) -> &BTreeSet<String> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.members.contains(key)
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        ElementSet {
            kind: self.kind,
            members: self.members.union(&other.members).cloned().collect(),
        }
    }
}

pub fn property_key(etype: &Label, property: &Label) -> String {
    format!("{}.{}", etype.as_str(), property.as_str())
}

/// Anything etype and property element sets can be extracted from.
pub trait ElementSource {
    fn etype_elements(&self) -> ElementSet;
    fn property_elements(&self) -> ElementSet;

    fn elements(&self, kind: ElementKind) -> ElementSet {
        match kind {
            ElementKind::Etypes => self.etype_elements(),
            ElementKind::Properties => self.property_elements(),
        }
    }
}

impl ElementSource for Etg {
    fn etype_elements(&self) -> ElementSet {
        ElementSet::etypes(&self.etypes)
    }

    fn property_elements(&self) -> ElementSet {
        ElementSet::properties(
            self.properties
                .iter()
                .flat_map(|(e, ps)| ps.iter().map(move |p| (e, &p.name))),
        )
    }
}

impl ElementSource for DatasetSchema {
    fn etype_elements(&self) -> ElementSet {
        ElementSet::etypes([&self.assigned_etype])
    }

    fn property_elements(&self) -> ElementSet {
        ElementSet::properties(
            self.columns
                .iter()
                .filter_map(|c| c.property.as_ref())
                .map(|p| (&self.assigned_etype, p)),
        )
    }
}

impl ElementSource for [CompetencyQuery] {
    fn etype_elements(&self) -> ElementSet {
        ElementSet::etypes(self.iter().flat_map(|q| &q.etypes))
    }

    fn property_elements(&self) -> ElementSet {
        ElementSet::properties(
            self.iter()
                .flat_map(|q| q.property_pairs.iter().map(|(e, p)| (e, p))),
        )
    }
}

impl ElementSource for Vec<CompetencyQuery> {
    fn etype_elements(&self) -> ElementSet {
        self.as_slice().etype_elements()
    }

    fn property_elements(&self) -> ElementSet {
        self.as_slice().property_elements()
    }
}

/// Etype elements of `source`.
pub fn etype_elements<S: ElementSource + ?Sized>(source: &S) -> ElementSet {
    source.etype_elements()
}

/// Property elements of `source`, as `etype.property` keys.
pub fn property_elements<S: ElementSource + ?Sized>(source: &S) -> ElementSet {
    source.property_elements()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Category, Column, ColumnRole, Datatype, PropertyDef, ResourceKind, ResourceMeta,
    };
    use proptest::prelude::*;

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn meta(kind: ResourceKind) -> ResourceMeta {
        ResourceMeta {
            id: "r".into(),
            kind,
            category: Category::Common,
            popularity: 0,
            origin: String::new(),
        }
    }

    fn keys(set: &ElementSet) -> Vec<&str> {
        set.members().iter().map(String::as_str).collect()
    }

    #[test]
    fn etg_elements() {
        let mut g = Etg::new("g", meta(ResourceKind::Ontology));
        g.add_etype(l("person"));
        g.add_etype(l("location"));
        g.put_property(&l("person"), PropertyDef::data(l("name"), Datatype::String));
        assert_eq!(keys(&etype_elements(&g)), ["location", "person"]);
        assert_eq!(keys(&property_elements(&g)), ["person.name"]);
    }

    #[test]
    fn dataset_contributes_assigned_etype_and_mapped_columns() {
        let mut schema = DatasetSchema {
            dataset_id: "d".into(),
            assigned_etype: l("hospital"),
            columns: vec![Column {
                name: l("internal"),
                header: "internal".into(),
                property: None,
                role: ColumnRole::Attribute,
                link_target: None,
            }],
            meta: meta(ResourceKind::Dataset),
        };
        assert_eq!(keys(&etype_elements(&schema)), ["hospital"]);
        assert!(property_elements(&schema).is_empty());
        schema.columns.push(Column {
            name: l("beds"),
            header: "beds".into(),
            property: Some(l("beds")),
            role: ColumnRole::Attribute,
            link_target: None,
        });
        assert_eq!(keys(&property_elements(&schema)), ["hospital.beds"]);
    }

    #[test]
    fn query_elements_are_unions() {
        let cqs = vec![
            CompetencyQuery::new("a", "", [l("person")], []).unwrap(),
            CompetencyQuery::new(
                "b",
                "",
                [l("person"), l("event")],
                [(l("person"), l("name")), (l("person"), l("age"))],
            )
            .unwrap(),
        ];
        assert_eq!(keys(&etype_elements(&cqs)), ["event", "person"]);
        assert_eq!(
            keys(&property_elements(&cqs)),
            ["person.age", "person.name"]
        );
    }

    proptest! {
        #[test]
        fn extraction_is_monotone(
            etypes in proptest::collection::btree_set("[a-e]", 1..5),
            extra in "[a-g]",
            prop in "[p-s]",
        ) {
            let mut g = Etg::new("g", meta(ResourceKind::Ontology));
            for e in &etypes {
                g.add_etype(l(e));
            }
            let first = l(etypes.iter().next().unwrap());
            let before_e = etype_elements(&g);
            let before_p = property_elements(&g);
            g.add_etype(l(&extra));
            g.put_property(&first, PropertyDef::data(l(&prop), Datatype::String));
            let after_e = etype_elements(&g);
            let after_p = property_elements(&g);
            prop_assert!(before_e.members().is_subset(after_e.members()));
            prop_assert!(before_p.members().is_subset(after_p.members()));
        }
    }
}
