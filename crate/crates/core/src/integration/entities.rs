use std::collections::BTreeSet;
use std::io::Read;

use chrono::NaiveDate;
use serde::Serialize;

use super::mapping::SchemaMapping;
use super::IntegrationError;
use crate::model::{normalize_value, DataValue, Datatype, Eg, Entity, Etg, Label, PropertyKind};

/// A link cell whose target entity may not exist yet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PendingLink {
    pub entity: String,
    pub property: Label,
    /// Etype the target must have (or specialize).
    pub range: Label,
    /// Normalized identity key of the target.
    pub key: String,
    pub source: String,
}

/// A literal that does not parse as its property's datatype. The value is
/// kept; export falls back to a plain string for it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LiteralIssue {
    pub entity: String,
    pub property: Label,
    pub value: String,
    pub datatype: Datatype,
}

/// Entities generated from one dataset, before merging.
#[derive(Debug, Clone)]
pub struct Fragment {
    pub dataset_id: String,
    pub eg: Eg,
    pub links: Vec<PendingLink>,
    pub rows: usize,
    /// Non-empty cells of mapped data columns.
    pub cells: usize,
    /// Cells that repeated a (value, source) pair already on their entity.
    pub collapsed: usize,
    pub literal_issues: Vec<LiteralIssue>,
}

pub fn is_valid_literal(value: &str, datatype: Datatype) -> bool {
    let unsigned = value.strip_prefix(['+', '-']).unwrap_or(value);
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    match datatype {
        Datatype::String => true,
        Datatype::Integer => digits(unsigned),
        Datatype::Decimal => match unsigned.split_once('.') {
            Some((i, f)) => {
                (i.is_empty() || digits(i))
                    && (f.is_empty() || digits(f))
                    && !(i.is_empty() && f.is_empty())
            }
            None => digits(unsigned),
        },
        Datatype::Boolean => matches!(value, "true" | "false" | "1" | "0"),
        Datatype::Date => value.len() == 10 && NaiveDate::parse_from_str(value, "%Y-%m-%d").is_ok(),
    }
}

enum Slot {
    Skip,
    Data(Label, Datatype),
    Link(Label, Label),
}

/// Generates one entity per row (rows sharing an identity key collapse into
/// one entity). Entity ids are `<dataset>/<normalized key>`, or
/// `<dataset>/<row number>` when the row has no complete key. Empty cells
/// produce nothing; link cells become [`PendingLink`]s.
pub fn generate_entities<R: Read>(
    input: R,
    mapping: &SchemaMapping,
    etg: &Etg,
) -> Result<Fragment, IntegrationError> {
    let dataset = &mapping.dataset_id;
    let csv_error = |e: csv::Error| match e.kind() {
        csv::ErrorKind::UnequalLengths { pos, .. } => IntegrationError::RowArity {
            dataset: dataset.clone(),
            line: pos.as_ref().map(|p| p.line()).unwrap_or(0),
        },
        _ => IntegrationError::Csv {
            dataset: dataset.clone(),
            message: e.to_string(),
        },
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = reader.headers().map_err(csv_error)?.clone();

    let declared = etg.properties_of(&mapping.etype);
    let mut slots = Vec::with_capacity(headers.len());
    let mut key_positions = Vec::new();
    for header in headers.iter() {
        let name = Label::new(header).map_err(|e| IntegrationError::Csv {
            dataset: dataset.clone(),
            message: format!("header: {e}"),
        })?;
        let target =
            mapping
                .columns
                .get(&name)
                .ok_or_else(|| IntegrationError::InvalidMapping {
                    dataset: dataset.clone(),
                    message: format!("column `{name}` is not covered by the mapping"),
                })?;
        let slot = match target.property() {
            None => Slot::Skip,
            Some((_, property)) => match declared.get(property) {
                Some(def) if def.kind == PropertyKind::Object => Slot::Link(
                    property.clone(),
                    def.range.clone().expect("object properties carry a range"),
                ),
                Some(def) => Slot::Data(property.clone(), def.effective_datatype()),
                None => {
                    return Err(IntegrationError::InvalidMapping {
                        dataset: dataset.clone(),
                        message: format!("`{}` has no property `{property}`", mapping.etype),
                    })
                }
            },
        };
        slots.push(slot);
    }
    for key in &mapping.identity_key {
        let pos = headers
            .iter()
            .position(|h| Label::new(h).is_ok_and(|l| &l == key))
            .ok_or_else(|| IntegrationError::InvalidMapping {
                dataset: dataset.clone(),
                message: format!("identity column `{key}` is missing"),
            })?;
        key_positions.push(pos);
    }

    let mut fragment = Fragment {
        dataset_id: dataset.clone(),
        eg: Eg::new(format!("{dataset}-fragment"), etg.clone()),
        links: Vec::new(),
        rows: 0,
        cells: 0,
        collapsed: 0,
        literal_issues: Vec::new(),
    };
    let mut touched: BTreeSet<(String, Label)> = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        fragment.rows += 1;
        let key_parts: Vec<String> = key_positions
            .iter()
            .map(|&i| normalize_value(record.get(i).unwrap_or("")))
            .collect();
        let identity = (!key_parts.is_empty() && key_parts.iter().all(|k| !k.is_empty()))
            .then(|| key_parts.join("|"));
        let id = match &identity {
            Some(key) => format!("{dataset}/{key}"),
            None => format!("{dataset}/{}", fragment.rows),
        };
        let entity = fragment
            .eg
            .entities
            .entry(id.clone())
            .or_insert_with(|| Entity::new(id.clone(), mapping.etype.clone()));
        entity.identity = identity;
        entity.sources.insert(dataset.clone());

        for (slot, cell) in slots.iter().zip(record.iter()) {
            let cell = cell.trim();
            if cell.is_empty() {
                continue;
            }
            match slot {
                Slot::Skip => {}
                Slot::Data(property, datatype) => {
                    fragment.cells += 1;
                    let value = DataValue {
                        value: cell.to_string(),
                        source: dataset.clone(),
                    };
                    if entity.add_value(property.clone(), value) {
                        if !is_valid_literal(cell, *datatype) {
                            fragment.literal_issues.push(LiteralIssue {
                                entity: id.clone(),
                                property: property.clone(),
                                value: cell.to_string(),
                                datatype: *datatype,
                            });
                        }
                    } else {
                        fragment.collapsed += 1;
                    }
                    touched.insert((id.clone(), property.clone()));
                }
                Slot::Link(property, range) => fragment.links.push(PendingLink {
                    entity: id.clone(),
                    property: property.clone(),
                    range: range.clone(),
                    key: normalize_value(cell),
                    source: dataset.clone(),
                }),
            }
        }
    }
    for (id, property) in &touched {
        fragment.eg.refresh_conflict(id, property);
    }
    fragment.links.sort();
    fragment.links.dedup();
    fragment.literal_issues.sort();
    Ok(fragment)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::integration::mapping::ColumnTarget;
    use crate::model::{Category, PropertyDef, ResourceKind, ResourceMeta};

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn etg() -> Etg {
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
        g.put_property(
            &l("hospital"),
            PropertyDef::data(l("code"), Datatype::String),
        );
        g.put_property(
            &l("hospital"),
            PropertyDef::data(l("name"), Datatype::String),
        );
        g.put_property(
            &l("hospital"),
            PropertyDef::data(l("beds"), Datatype::Integer),
        );
        g.put_property(
            &l("hospital"),
            PropertyDef::object(l("partner"), l("hospital")),
        );
        g
    }

    fn mapping(key: bool) -> SchemaMapping {
        let h = l("hospital");
        SchemaMapping {
            dataset_id: "d1".into(),
            etype: h.clone(),
            columns: BTreeMap::from([
                (l("code"), ColumnTarget::Property(h.clone(), l("code"))),
                (l("name"), ColumnTarget::Property(h.clone(), l("name"))),
                (l("beds"), ColumnTarget::Property(h.clone(), l("beds"))),
                (
                    l("partner"),
                    ColumnTarget::Property(h.clone(), l("partner")),
                ),
                (l("note"), ColumnTarget::DROP),
            ]),
            identity_key: if key { vec![l("code")] } else { vec![] },
        }
    }

    #[test]
    fn keyed_rows() {
        let csv =
            "code,name,beds,partner,note\nTN01,Santa Chiara,620,TN02,x\nTN02,Rovereto,many,,y\n";
        let f = generate_entities(csv.as_bytes(), &mapping(true), &etg()).unwrap();
        assert_eq!(f.eg.entities.len(), 2);
        let e = &f.eg.entities["d1/tn01"];
        assert_eq!(e.identity.as_deref(), Some("tn01"));
        assert_eq!(e.value_count(), 3);
        assert_eq!(f.cells, 6);
        assert_eq!(f.links.len(), 1);
        assert_eq!(f.links[0].key, "tn02");
        assert_eq!(f.literal_issues.len(), 1);
        assert_eq!(f.literal_issues[0].value, "many");
    }

    #[test]
    fn unkeyed_rows_use_row_numbers() {
        let csv = "code,name,beds,partner,note\n,A,1,,\n,B,2,,\n";
        let f = generate_entities(csv.as_bytes(), &mapping(true), &etg()).unwrap();
        let ids: Vec<_> = f.eg.entities.keys().cloned().collect();
        assert_eq!(ids, vec!["d1/1", "d1/2"]);
    }

    #[test]
    fn duplicate_keys_merge_and_flag_conflicts() {
        let csv = "code,name,beds,partner,note\nTN01,Santa Chiara,620,,\nTN01,S. Chiara,620,,\n";
        let f = generate_entities(csv.as_bytes(), &mapping(true), &etg()).unwrap();
        assert_eq!(f.eg.entities.len(), 1);
        assert!(f
            .eg
            .conflict_flags
            .contains(&("d1/tn01".to_string(), l("name"))));
        assert!(!f
            .eg
            .conflict_flags
            .contains(&("d1/tn01".to_string(), l("beds"))));
        assert_eq!(f.collapsed, 2);
    }

    #[test]
    fn ragged_row_is_reported_with_its_line() {
        let csv = "code,name,beds,partner,note\nTN01,A,1,,\nTN02,B\n";
        let err = generate_entities(csv.as_bytes(), &mapping(false), &etg()).unwrap_err();
        assert!(
            matches!(err, IntegrationError::RowArity { line: 3, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn literal_checks() {
        assert!(is_valid_literal("-12", Datatype::Integer));
        assert!(!is_valid_literal("1.5", Datatype::Integer));
        assert!(is_valid_literal("1.5", Datatype::Decimal));
        assert!(is_valid_literal(".5", Datatype::Decimal));
        assert!(!is_valid_literal(".", Datatype::Decimal));
        assert!(is_valid_literal("2020-03-10", Datatype::Date));
        assert!(!is_valid_literal("2020-3-10", Datatype::Date));
        assert!(!is_valid_literal("2020-02-30", Datatype::Date));
        assert!(is_valid_literal("true", Datatype::Boolean));
        assert!(!is_valid_literal("yes", Datatype::Boolean));
    }
}
