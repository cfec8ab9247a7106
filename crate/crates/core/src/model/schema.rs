use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;
use serde::{Deserialize, Serialize};

use super::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    Data,
    Object,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Datatype {
    String,
    Integer,
    Decimal,
    Boolean,
    Date,
}

impl Datatype {
    pub fn xsd_iri(self) -> &'static str {
        match self {
            Datatype::String => "http://www.w3.org/2001/XMLSchema#string",
            Datatype::Integer => "http://www.w3.org/2001/XMLSchema#integer",
            Datatype::Decimal => "http://www.w3.org/2001/XMLSchema#decimal",
            Datatype::Boolean => "http://www.w3.org/2001/XMLSchema#boolean",
            Datatype::Date => "http://www.w3.org/2001/XMLSchema#date",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyDef {
    pub name: Label,
    pub kind: PropertyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datatype: Option<Datatype>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<Label>,
}

impl PropertyDef {
    pub fn data(name: Label, datatype: Datatype) -> Self {
        PropertyDef {
            name,
            kind: PropertyKind::Data,
            datatype: Some(datatype),
            range: None,
        }
    }

    pub fn object(name: Label, range: Label) -> Self {
        PropertyDef {
            name,
            kind: PropertyKind::Object,
            datatype: None,
            range: Some(range),
        }
    }

    /// Data properties carry no range; object properties carry a range and no datatype.
    pub fn is_well_formed(&self) -> bool {
        match self.kind {
            PropertyKind::Data => self.range.is_none(),
            PropertyKind::Object => self.datatype.is_none() && self.range.is_some(),
        }
    }

    /// Declared datatype of a data property, `string` when unspecified.
    pub fn effective_datatype(&self) -> Datatype {
        self.datatype.unwrap_or(Datatype::String)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Dataset,
    Ontology,
}

/// Resource categories in decreasing order of reusability. The derived
/// ordering is the processing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Common,
    Core,
    Contextual,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Common, Category::Core, Category::Contextual];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Common => "common",
            Category::Core => "core",
            Category::Contextual => "contextual",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceMeta {
    pub id: String,
    pub kind: ResourceKind,
    pub category: Category,
    /// Reuse count supplied by the catalog author.
    #[serde(default)]
    pub popularity: u64,
    #[serde(default)]
    pub origin: String,
}

/// Entity Type Graph: the schema of an entity graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Etg {
    pub id: String,
    pub etypes: BTreeSet<Label>,
    /// Kept as lists so that duplicate declarations in a document stay
    /// visible to [`validate_etg`].
    pub properties: BTreeMap<Label, Vec<PropertyDef>>,
    pub subclass_edges: BTreeSet<(Label, Label)>,
    pub meta: ResourceMeta,
}

impl Etg {
    pub fn new(id: impl Into<String>, meta: ResourceMeta) -> Self {
        Etg {
            id: id.into(),
            etypes: BTreeSet::new(),
            properties: BTreeMap::new(),
            subclass_edges: BTreeSet::new(),
            meta,
        }
    }

    pub fn add_etype(&mut self, etype: Label) {
        self.etypes.insert(etype);
    }

    /// Adds or replaces the property named `def.name` on `etype`, keeping
    /// the per-etype list sorted by name.
    pub fn put_property(&mut self, etype: &Label, def: PropertyDef) {
        let props = self.properties.entry(etype.clone()).or_default();
        match props.binary_search_by(|p| p.name.cmp(&def.name)) {
            Ok(i) => props[i] = def,
            Err(i) => props.insert(i, def),
        }
    }

    /// Properties declared directly on `etype`.
    pub fn own_properties(&self, etype: &Label) -> &[PropertyDef] {
        self.properties.get(etype).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn property(&self, etype: &Label, name: &Label) -> Option<&PropertyDef> {
        self.own_properties(etype).iter().find(|p| &p.name == name)
    }

    pub fn parents(&self, etype: &Label) -> impl Iterator<Item = &Label> {
        let etype = etype.clone();
        self.subclass_edges
            .iter()
            .filter(move |(child, _)| *child == etype)
            .map(|(_, parent)| parent)
    }

    /// `etype` followed by all of its ancestors, each once.
    pub fn lineage(&self, etype: &Label) -> Vec<Label> {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        let mut stack = vec![etype.clone()];
        while let Some(current) = stack.pop() {
            if !seen.insert(current.clone()) {
                continue;
            }
            stack.extend(self.parents(&current).cloned());
            order.push(current);
        }
        order
    }

    pub fn is_subtype_of(&self, etype: &Label, ancestor: &Label) -> bool {
        self.lineage(etype).iter().any(|e| e == ancestor)
    }

    /// Properties available on `etype`, including inherited ones. The
    /// nearest declaration wins.
    pub fn properties_of(&self, etype: &Label) -> BTreeMap<Label, &PropertyDef> {
        let mut out = BTreeMap::new();
        for e in self.lineage(etype) {
            for p in self.own_properties(&e) {
                out.entry(p.name.clone()).or_insert(p);
            }
        }
        out
    }

    /// Whether adding `child -> parent` would close a cycle.
    pub fn would_cycle(&self, child: &Label, parent: &Label) -> bool {
        child == parent || self.is_subtype_of(parent, child)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum EtgViolation {
    /// Properties declared for an etype not in the etype set.
    UnknownPropertyOwner {
        etype: Label,
    },
    /// A subclass edge endpoint that is not an etype.
    UnknownSubclassEndpoint {
        child: Label,
        parent: Label,
    },
    /// Members of a subclass cycle, sorted.
    Cycle {
        members: Vec<Label>,
    },
    DanglingRange {
        etype: Label,
        property: Label,
        range: Label,
    },
    DuplicateProperty {
        etype: Label,
        property: Label,
    },
    MalformedProperty {
        etype: Label,
        property: Label,
    },
}

impl fmt::Display for EtgViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EtgViolation::UnknownPropertyOwner { etype } => {
                write!(f, "properties declared for unknown etype `{etype}`")
            }
            EtgViolation::UnknownSubclassEndpoint { child, parent } => {
                write!(
                    f,
                    "subclass edge {child} -> {parent} references an unknown etype"
                )
            }
            EtgViolation::Cycle { members } => {
                let names: Vec<_> = members.iter().map(Label::as_str).collect();
                write!(f, "subclass cycle through {}", names.join(", "))
            }
            EtgViolation::DanglingRange {
                etype,
                property,
                range,
            } => {
                write!(
                    f,
                    "{etype}.{property} has range `{range}` which is not an etype"
                )
            }
            EtgViolation::DuplicateProperty { etype, property } => {
                write!(f, "{etype}.{property} is declared more than once")
            }
            EtgViolation::MalformedProperty { etype, property } => {
                write!(f, "{etype}.{property} mixes data and object attributes")
            }
        }
    }
}

/// Checks every ETG invariant. An empty report means the graph is well formed.
pub fn validate_etg(g: &Etg) -> Vec<EtgViolation> {
    let mut report = Vec::new();

    for (etype, props) in &g.properties {
        if !g.etypes.contains(etype) {
            report.push(EtgViolation::UnknownPropertyOwner {
                etype: etype.clone(),
            });
        }
        let mut names = BTreeSet::new();
        for p in props {
            if !names.insert(&p.name) {
                report.push(EtgViolation::DuplicateProperty {
                    etype: etype.clone(),
                    property: p.name.clone(),
                });
            }
            if !p.is_well_formed() {
                report.push(EtgViolation::MalformedProperty {
                    etype: etype.clone(),
                    property: p.name.clone(),
                });
            }
            if let Some(range) = &p.range {
                if !g.etypes.contains(range) {
                    report.push(EtgViolation::DanglingRange {
                        etype: etype.clone(),
                        property: p.name.clone(),
                        range: range.clone(),
                    });
                }
            }
        }
    }

    let mut graph: DiGraphMap<&str, ()> = DiGraphMap::new();
    for (child, parent) in &g.subclass_edges {
        if !g.etypes.contains(child) || !g.etypes.contains(parent) {
            report.push(EtgViolation::UnknownSubclassEndpoint {
                child: child.clone(),
                parent: parent.clone(),
            });
        }
        graph.add_edge(child.as_str(), parent.as_str(), ());
    }
    for scc in tarjan_scc(&graph) {
        let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        if cyclic {
            let mut members: Vec<Label> = g
                .subclass_edges
                .iter()
                .flat_map(|(c, p)| [c, p])
                .filter(|l| scc.contains(&l.as_str()))
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            members.sort();
            report.push(EtgViolation::Cycle { members });
        }
    }

    report.sort();
    report
}
