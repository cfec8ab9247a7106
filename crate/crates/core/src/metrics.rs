//! Schema-level evaluation metrics over element sets and the gate
//! evaluator shared by all phases.
//!
//! For element sets `α` and `β`:
//!
//! * coverage      `|α ∩ β| / |α|`
//! * extensiveness `|β \ α| / |α ∪ β|`
//! * sparsity      `|α Δ β| / |α ∪ β|`
//!
//! All values are exact fractions in `[0, 1]`. Extensiveness and sparsity
//! of two empty sets are zero; coverage of an empty `α` is an error.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fraction::Fraction;
use crate::model::{ElementKind, ElementSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Coverage,
    Extensiveness,
    Sparsity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricResult {
    pub metric: Metric,
    pub alpha_size: usize,
    pub beta_size: usize,
    pub intersection_size: usize,
    pub value: Fraction,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("coverage is undefined for an empty requirement set")]
    EmptyAlpha,
    #[error("cannot compare a {alpha} set with a {beta} set")]
    KindMismatch {
        alpha: ElementKind,
        beta: ElementKind,
    },
}

fn sizes(alpha: &ElementSet, beta: &ElementSet) -> Result<(usize, usize, usize), MetricError> {
    if alpha.kind() != beta.kind() {
        return Err(MetricError::KindMismatch {
            alpha: alpha.kind(),
            beta: beta.kind(),
        });
    }
    let inter = alpha.members().intersection(beta.members()).count();
    Ok((alpha.len(), beta.len(), inter))
}

fn result(metric: Metric, a: usize, b: usize, i: usize, value: Fraction) -> MetricResult {
    MetricResult {
        metric,
        alpha_size: a,
        beta_size: b,
        intersection_size: i,
        value,
    }
}

pub fn coverage(alpha: &ElementSet, beta: &ElementSet) -> Result<MetricResult, MetricError> {
    let (a, b, i) = sizes(alpha, beta)?;
    if a == 0 {
        return Err(MetricError::EmptyAlpha);
    }
    Ok(result(Metric::Coverage, a, b, i, Fraction::of(i, a)))
}

pub fn extensiveness(alpha: &ElementSet, beta: &ElementSet) -> Result<MetricResult, MetricError> {
    let (a, b, i) = sizes(alpha, beta)?;
    let union = a + b - i;
    let value = if union == 0 {
        Fraction::ZERO
    } else {
        Fraction::of(b - i, union)
    };
    Ok(result(Metric::Extensiveness, a, b, i, value))
}

pub fn sparsity(alpha: &ElementSet, beta: &ElementSet) -> Result<MetricResult, MetricError> {
    let (a, b, i) = sizes(alpha, beta)?;
    let union = a + b - i;
    let value = if union == 0 {
        Fraction::ZERO
    } else {
        Fraction::of(a + b - 2 * i, union)
    };
    Ok(result(Metric::Sparsity, a, b, i, value))
}

pub fn compute(
    metric: Metric,
    alpha: &ElementSet,
    beta: &ElementSet,
) -> Result<MetricResult, MetricError> {
    match metric {
        Metric::Coverage => coverage(alpha, beta),
        Metric::Extensiveness => extensiveness(alpha, beta),
        Metric::Sparsity => sparsity(alpha, beta),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateId {
    EvalA,
    EvalB,
    EvalC,
    EvalD,
}

impl GateId {
    pub fn as_str(self) -> &'static str {
        match self {
            GateId::EvalA => "eval_a",
            GateId::EvalB => "eval_b",
            GateId::EvalC => "eval_c",
            GateId::EvalD => "eval_d",
        }
    }

    /// The metric a gate checks. Eval(d) checks requirement satisfaction,
    /// expressed as coverage of the requirement set by populated elements.
    pub fn metric(self) -> Metric {
        match self {
            GateId::EvalA | GateId::EvalD => Metric::Coverage,
            GateId::EvalB => Metric::Extensiveness,
            GateId::EvalC => Metric::Sparsity,
        }
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered by severity so that the verdict of a report is the maximum of
/// its rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Warn => "warn",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub cov_min: Fraction,
    pub ext_floor: Fraction,
    pub spr_band_min: Fraction,
    pub spr_band_max: Fraction,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            cov_min: Fraction::new(1, 2).unwrap(),
            ext_floor: Fraction::ZERO,
            spr_band_min: Fraction::ZERO,
            spr_band_max: Fraction::new(3, 5).unwrap(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThresholdError {
    #[error("threshold `{0}` must lie in [0, 1]")]
    OutOfRange(&'static str),
    #[error("sparsity band is empty: spr_band_min > spr_band_max")]
    EmptyBand,
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), ThresholdError> {
        for (name, v) in [
            ("cov_min", self.cov_min),
            ("ext_floor", self.ext_floor),
            ("spr_band_min", self.spr_band_min),
            ("spr_band_max", self.spr_band_max),
        ] {
            if !v.is_unit_interval() {
                return Err(ThresholdError::OutOfRange(name));
            }
        }
        if self.spr_band_min > self.spr_band_max {
            return Err(ThresholdError::EmptyBand);
        }
        Ok(())
    }

    fn applied(&self, gate: GateId) -> Vec<(&'static str, Fraction)> {
        match gate {
            GateId::EvalA => vec![("cov_min", self.cov_min)],
            GateId::EvalB => vec![("ext_floor", self.ext_floor)],
            GateId::EvalC => vec![
                ("spr_band_min", self.spr_band_min),
                ("spr_band_max", self.spr_band_max),
            ],
            GateId::EvalD => vec![("required_coverage", Fraction::ONE)],
        }
    }

    fn judge(&self, gate: GateId, value: Fraction) -> Verdict {
        match gate {
            GateId::EvalA if value >= self.cov_min => Verdict::Pass,
            GateId::EvalA => Verdict::Fail,
            // Extensiveness is informational: below the floor warns, never fails.
            GateId::EvalB if value >= self.ext_floor => Verdict::Pass,
            GateId::EvalB => Verdict::Warn,
            GateId::EvalC if value >= self.spr_band_min && value <= self.spr_band_max => {
                Verdict::Pass
            }
            GateId::EvalC => Verdict::Fail,
            GateId::EvalD if value == Fraction::ONE => Verdict::Pass,
            GateId::EvalD => Verdict::Fail,
        }
    }
}

/// One `(α, β)` comparison to be judged by a gate.
#[derive(Debug, Clone)]
pub struct GatePair {
    pub resource: String,
    pub alpha: ElementSet,
    pub beta: ElementSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GateRow {
    pub resource: String,
    pub kind: ElementKind,
    pub result: MetricResult,
    pub verdict: Verdict,
    /// Elements of `α` absent from `β` (reported by Eval(d) only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AppliedThreshold {
    pub name: String,
    pub value: Fraction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GateReport {
    pub gate: GateId,
    pub metric: Metric,
    pub thresholds: Vec<AppliedThreshold>,
    pub rows: Vec<GateRow>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl GateReport {
    pub fn failing_rows(&self) -> impl Iterator<Item = &GateRow> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn push_note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{gate} on `{resource}`: {source}")]
pub struct GateError {
    pub gate: GateId,
    pub resource: String,
    #[source]
    pub source: MetricError,
}

/// Judges every pair with the gate's metric. Rows are sorted by resource id
/// then element kind; an empty pair list fails the gate.
pub fn evaluate_gate(
    gate: GateId,
    pairs: Vec<GatePair>,
    thresholds: &Thresholds,
) -> Result<GateReport, GateError> {
    let metric = gate.metric();
    let mut rows = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let result = compute(metric, &pair.alpha, &pair.beta).map_err(|source| GateError {
            gate,
            resource: pair.resource.clone(),
            source,
        })?;
        let verdict = thresholds.judge(gate, result.value);
        let missing = if gate == GateId::EvalD {
            pair.alpha
                .members()
                .difference(pair.beta.members())
                .cloned()
                .collect()
        } else {
            Vec::new()
        };
        rows.push(GateRow {
            resource: pair.resource,
            kind: pair.alpha.kind(),
            result,
            verdict,
            missing,
        });
    }
    rows.sort_by(|a, b| (&a.resource, a.kind).cmp(&(&b.resource, b.kind)));

    let mut notes = Vec::new();
    let verdict = if rows.is_empty() {
        notes.push("nothing to evaluate".to_string());
        Verdict::Fail
    } else {
        rows.iter()
            .map(|r| r.verdict)
            .max()
            .unwrap_or(Verdict::Pass)
    };
    Ok(GateReport {
        gate,
        metric,
        thresholds: thresholds
            .applied(gate)
            .into_iter()
            .map(|(name, value)| AppliedThreshold {
                name: name.to_string(),
                value,
            })
            .collect(),
        rows,
        verdict,
        notes,
    })
}
