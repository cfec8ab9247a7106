use std::collections::BTreeMap;

use serde::Serialize;

use super::analysis::{analyze_integration, IntegrationCaseReport};
use super::entities::{Fragment, LiteralIssue, PendingLink};
use super::merge::{match_entities, merge_with_ids};
use super::IntegrationError;
use crate::model::{Eg, Etg, ObjectLink};

/// Integrates dataset fragments one at a time into a growing graph.
///
/// Link cells stay pending until an entity of the right etype with the
/// referenced identity key exists; every step retries all pending links.
#[derive(Debug, Clone)]
pub struct Integrator {
    eg: Eg,
    pending: Vec<PendingLink>,
    cases: Vec<IntegrationCaseReport>,
    literal_issues: Vec<LiteralIssue>,
    cells: usize,
    collapsed: usize,
}

/// Outcome of a whole integration run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegrationSummary {
    pub graph: String,
    pub entities: usize,
    pub values: usize,
    pub links: usize,
    /// Non-empty mapped data cells read, and how many of them repeated a
    /// (value, source) pair already present.
    pub cells: usize,
    pub collapsed_cells: usize,
    pub conflicts: usize,
    pub cases: Vec<IntegrationCaseReport>,
    pub unresolved_links: Vec<PendingLink>,
    pub literal_issues: Vec<LiteralIssue>,
}

impl Integrator {
    pub fn new(id: impl Into<String>, etg: Etg) -> Self {
        Integrator {
            eg: Eg::new(id, etg),
            pending: Vec::new(),
            cases: Vec::new(),
            literal_issues: Vec::new(),
            cells: 0,
            collapsed: 0,
        }
    }

    pub fn eg(&self) -> &Eg {
        &self.eg
    }

    pub fn pending(&self) -> &[PendingLink] {
        &self.pending
    }

    pub fn cases(&self) -> &[IntegrationCaseReport] {
        &self.cases
    }

    pub fn integrate(
        &mut self,
        fragment: Fragment,
    ) -> Result<&IntegrationCaseReport, IntegrationError> {
        let before = self.eg.clone();
        let matches = match_entities(&self.eg, &fragment.eg);
        let outcome = merge_with_ids(&self.eg, &fragment.eg, &matches)?;
        self.eg = outcome.eg;
        let remap = |id: &String| outcome.ids.get(id).cloned().unwrap_or_else(|| id.clone());
        let mut pending: Vec<PendingLink> = std::mem::take(&mut self.pending)
            .into_iter()
            .chain(fragment.links)
            .map(|mut link| {
                link.entity = remap(&link.entity);
                link
            })
            .collect();
        pending.sort();
        pending.dedup();
        self.pending = self.resolve(pending);

        for mut issue in fragment.literal_issues {
            issue.entity = remap(&issue.entity);
            self.literal_issues.push(issue);
        }
        self.cells += fragment.cells;
        self.collapsed += fragment.collapsed;
        let report = analyze_integration(&before, &self.eg, &fragment.dataset_id);
        self.cases.push(report);
        Ok(self.cases.last().expect("just pushed"))
    }

    /// Adds every link whose target now exists; returns the rest.
    fn resolve(&mut self, pending: Vec<PendingLink>) -> Vec<PendingLink> {
        let mut by_key: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for entity in self.eg.entities.values() {
            if let Some(key) = &entity.identity {
                by_key
                    .entry(key.as_str())
                    .or_default()
                    .push(entity.id.as_str());
            }
        }
        let mut found = Vec::new();
        let mut unresolved = Vec::new();
        for link in pending {
            let target = by_key.get(link.key.as_str()).and_then(|ids| {
                ids.iter()
                    .find(|id| {
                        self.eg
                            .schema
                            .is_subtype_of(&self.eg.entities[**id].etype, &link.range)
                    })
                    .map(|id| id.to_string())
            });
            match target {
                Some(target) if self.eg.entities.contains_key(&link.entity) => {
                    found.push((link, target))
                }
                _ => unresolved.push(link),
            }
        }
        for (link, target) in found {
            let entity = self
                .eg
                .entities
                .get_mut(&link.entity)
                .expect("checked above");
            entity.object_links.insert(ObjectLink {
                property: link.property,
                target,
                source: link.source,
            });
        }
        unresolved
    }

    pub fn finish(self) -> (Eg, IntegrationSummary) {
        let mut literal_issues = self.literal_issues;
        literal_issues.sort();
        literal_issues.dedup();
        let summary = IntegrationSummary {
            graph: self.eg.id.clone(),
            entities: self.eg.entities.len(),
            values: self.eg.value_count(),
            links: self.eg.link_count(),
            cells: self.cells,
            collapsed_cells: self.collapsed,
            conflicts: self.eg.conflict_flags.len(),
            cases: self.cases,
            unresolved_links: self.pending,
            literal_issues,
        };
        (self.eg, summary)
    }
}
