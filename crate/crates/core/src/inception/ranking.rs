use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::catalog::{Catalog, Resource};
use crate::fraction::Fraction;
use crate::metrics::{
    coverage, evaluate_gate, GateError, GateId, GatePair, GateReport, Thresholds, Verdict,
};
use crate::model::{Category, CompetencyQuery, ElementKind, ElementSource, ResourceKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub kind: ResourceKind,
    pub category: Category,
    pub etype_cov: Fraction,
    /// Absent when the queries name no properties.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property_cov: Option<Fraction>,
    pub popularity: u64,
}

impl Candidate {
    fn sort_key(&self) -> (Reverse<Fraction>, Reverse<Fraction>, Reverse<u64>, &str) {
        (
            Reverse(self.etype_cov),
            Reverse(self.property_cov.unwrap_or(Fraction::ZERO)),
            Reverse(self.popularity),
            &self.id,
        )
    }

    fn is_irrelevant(&self) -> bool {
        self.etype_cov == Fraction::ZERO
            && self.property_cov.unwrap_or(Fraction::ZERO) == Fraction::ZERO
    }
}

/// Shortlisted resources per category, best first, plus the resources
/// excluded for having no overlap with the queries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRanking {
    pub common: Vec<Candidate>,
    pub core: Vec<Candidate>,
    pub contextual: Vec<Candidate>,
    pub excluded: Vec<Candidate>,
}

impl CandidateRanking {
    pub fn category(&self, category: Category) -> &[Candidate] {
        match category {
            Category::Common => &self.common,
            Category::Core => &self.core,
            Category::Contextual => &self.contextual,
        }
    }

    fn category_mut(&mut self, category: Category) -> &mut Vec<Candidate> {
        match category {
            Category::Common => &mut self.common,
            Category::Core => &mut self.core,
            Category::Contextual => &mut self.contextual,
        }
    }

    /// Shortlisted candidates in processing order: common, core, contextual.
    pub fn shortlist(&self) -> impl Iterator<Item = &Candidate> {
        Category::ALL
            .into_iter()
            .flat_map(|c| self.category(c).iter())
    }

    pub fn shortlisted(&self, kind: ResourceKind) -> impl Iterator<Item = &Candidate> {
        self.shortlist().filter(move |c| c.kind == kind)
    }
}

/// Scores every catalog resource against the queries and ranks it within
/// its declared category by (etype coverage, property coverage,
/// popularity) descending, then id ascending.
pub fn match_resources(cqs: &[CompetencyQuery], catalog: &Catalog) -> CandidateRanking {
    let cq_etypes = cqs.etype_elements();
    let cq_props = cqs.property_elements();
    let mut ranking = CandidateRanking::default();

    for resource in catalog.resources.values() {
        let (etypes, props) = match resource {
            Resource::Dataset(s) => (s.etype_elements(), s.property_elements()),
            Resource::Ontology(g) => (g.etype_elements(), g.property_elements()),
        };
        let meta = resource.meta();
        let etype_cov = coverage(&cq_etypes, &etypes)
            .map(|r| r.value)
            .unwrap_or(Fraction::ZERO);
        let property_cov = coverage(&cq_props, &props).ok().map(|r| r.value);
        let candidate = Candidate {
            id: meta.id.clone(),
            kind: meta.kind,
            category: meta.category,
            etype_cov,
            property_cov,
            popularity: meta.popularity,
        };
        if candidate.is_irrelevant() {
            ranking.excluded.push(candidate);
        } else {
            ranking.category_mut(meta.category).push(candidate);
        }
    }

    for category in Category::ALL {
        ranking
            .category_mut(category)
            .sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    }
    ranking.excluded.sort_by(|a, b| a.id.cmp(&b.id));
    ranking
}

/// Eval(a): every shortlisted dataset must cover at least `cov_min` of the
/// queries' etypes and properties.
pub fn eval_inception(
    cqs: &[CompetencyQuery],
    ranking: &CandidateRanking,
    catalog: &Catalog,
    thresholds: &Thresholds,
) -> Result<GateReport, GateError> {
    let cq_etypes = cqs.etype_elements();
    let cq_props = cqs.property_elements();
    let mut pairs = Vec::new();
    for candidate in ranking.shortlisted(ResourceKind::Dataset) {
        let Some(schema) = catalog.dataset(&candidate.id) else {
            continue;
        };
        pairs.push(GatePair {
            resource: candidate.id.clone(),
            alpha: cq_etypes.clone(),
            beta: schema.elements(ElementKind::Etypes),
        });
        if !cq_props.is_empty() {
            pairs.push(GatePair {
                resource: candidate.id.clone(),
                alpha: cq_props.clone(),
                beta: schema.elements(ElementKind::Properties),
            });
        }
    }
    let mut report = evaluate_gate(GateId::EvalA, pairs, thresholds)?;
    for excluded in ranking
        .excluded
        .iter()
        .filter(|c| c.kind == ResourceKind::Dataset)
    {
        report.push_note(format!(
            "dataset `{}` shares nothing with the competency queries and is not reused",
            excluded.id
        ));
    }
    if report.verdict == Verdict::Fail {
        let flagged: Vec<_> = report
            .failing_rows()
            .map(|r| r.resource.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        if flagged.is_empty() {
            report.push_note("no dataset is reusable for these competency queries");
        } else {
            report.push_note(format!("low coverage: {}", flagged.join(", ")));
        }
        report.push_note(
            "drop the flagged datasets, or refine the competency queries if they are underspecified",
        );
    }
    Ok(report)
}
