use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};

use itelos_core::alignment::{
    etr_predict, eval_alignment, generate_etg, rank_ontologies, OntologyRanking, PredictionVector,
};
use itelos_core::inception::{
    collect_resources, eval_inception, load_dataset_schema, load_ontology, match_resources,
    CandidateRanking, LoadError, ResourceLocator,
};
use itelos_core::integration::{
    apply_override, eval_purpose, generate_entities, infer_mapping, read_mapping_override,
    render_ntriples, ExportSummary, IntegrationSummary, Integrator, SchemaMapping,
};
use itelos_core::model::{
    read_etg_document, read_json_document, validate_etg, write_etg_document, Etg, Label,
};
use itelos_core::modeling::{build_etg_model, eval_modeling, select_datasets, ModelSidecar};
use itelos_core::{GateReport, Verdict};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::artifacts::{self, remove_if_present, write_json, write_report, write_text};
use crate::config::PipelineConfig;
use crate::manifest::{digest_file, now, PhaseRecord, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Inception,
    Modeling,
    Alignment,
    Integration,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::Inception,
        Phase::Modeling,
        Phase::Alignment,
        Phase::Integration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Inception => "inception",
            Phase::Modeling => "modeling",
            Phase::Alignment => "alignment",
            Phase::Integration => "integration",
        }
    }

    /// Files the phase writes into the output directory.
    pub fn artifacts(self) -> &'static [&'static str] {
        match self {
            Phase::Inception => &[artifacts::INCEPTION, artifacts::EVAL_A],
            Phase::Modeling => &[
                artifacts::MODEL,
                "etg_model.provenance.json",
                artifacts::EVAL_B,
            ],
            Phase::Alignment => &[
                artifacts::FINAL_ETG,
                artifacts::MERGE_PLAN,
                artifacts::RENAME_MAP,
                artifacts::ALIGNMENT,
                artifacts::EVAL_C,
            ],
            Phase::Integration => &[artifacts::EXPORT, artifacts::INTEGRATION, artifacts::EVAL_D],
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
#[error("{phase} phase failed: {message}")]
pub struct PhaseError {
    pub phase: Phase,
    pub message: String,
}

fn fail<E: fmt::Display>(phase: Phase) -> impl Fn(E) -> PhaseError {
    move |e| PhaseError {
        phase,
        message: e.to_string(),
    }
}

/// Bookkeeping shared by every phase: stale downstream artifacts are
/// removed first, and the manifest and summary are rewritten at the end.
struct PhaseRun<'a> {
    phase: Phase,
    cfg: &'a PipelineConfig,
    started_at: String,
    inputs: BTreeMap<String, String>,
}

impl<'a> PhaseRun<'a> {
    fn start(phase: Phase, cfg: &'a PipelineConfig) -> Result<Self, PhaseError> {
        let err = fail(phase);
        std::fs::create_dir_all(&cfg.out_dir).map_err(&err)?;
        let mut manifest = RunManifest::load(&cfg.out_dir);
        for later in Phase::ALL.into_iter().filter(|p| *p >= phase) {
            for name in later.artifacts() {
                remove_if_present(&cfg.artifact(name)).map_err(&err)?;
            }
            manifest.forget(later.as_str());
        }
        if cfg.export_path != cfg.artifact(artifacts::EXPORT) {
            remove_if_present(&cfg.export_path).map_err(&err)?;
        }
        manifest.save(&cfg.out_dir).map_err(&err)?;
        let mut run = PhaseRun {
            phase,
            cfg,
            started_at: now(),
            inputs: BTreeMap::new(),
        };
        run.consume(&cfg.purpose_path)?;
        Ok(run)
    }

    fn consume(&mut self, path: &Path) -> Result<(), PhaseError> {
        let digest = digest_file(path).map_err(|e| PhaseError {
            phase: self.phase,
            message: format!("{}: {e}", path.display()),
        })?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    fn err<E: fmt::Display>(&self) -> impl Fn(E) -> PhaseError {
        fail(self.phase)
    }

    fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<(), PhaseError> {
        write_json(&self.cfg.artifact(name), value).map_err(self.err())
    }

    fn finish(self, gate_file: &str, report: &GateReport) -> Result<Verdict, PhaseError> {
        let err = fail(self.phase);
        write_report(&self.cfg.out_dir, gate_file, report).map_err(&err)?;
        write_text(
            &self.cfg.artifact(artifacts::SUMMARY),
            &artifacts::render_summary(&self.cfg.out_dir),
        )
        .map_err(&err)?;
        let mut manifest = RunManifest::load(&self.cfg.out_dir);
        manifest.record(
            self.phase.as_str(),
            PhaseRecord {
                verdict: report.verdict,
                started_at: self.started_at,
                finished_at: now(),
                inputs: self.inputs,
            },
        );
        manifest.save(&self.cfg.out_dir).map_err(&err)?;
        Ok(report.verdict)
    }
}

fn locator(cfg: &PipelineConfig) -> ResourceLocator {
    ResourceLocator {
        datasets_dir: cfg.datasets_dir.clone(),
        ontologies_dir: cfg.ontologies_dir.clone(),
        ..ResourceLocator::for_purpose(&cfg.purpose)
    }
}

#[derive(Serialize)]
struct InceptionArtifact<'a> {
    title: &'a str,
    ranking: &'a CandidateRanking,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    load_errors: &'a [LoadError],
}

#[derive(Deserialize)]
struct InceptionInput {
    ranking: CandidateRanking,
}

pub fn inception(cfg: &PipelineConfig) -> Result<Verdict, PhaseError> {
    let mut run = PhaseRun::start(Phase::Inception, cfg)?;
    let locator = locator(cfg);
    let catalog = collect_resources(&cfg.purpose, &locator);
    for path in catalog.paths.values() {
        run.consume(path)?;
    }
    let ranking = match_resources(&cfg.purpose.cqs, &catalog);
    let report =
        eval_inception(&cfg.purpose.cqs, &ranking, &catalog, &cfg.thresholds).map_err(run.err())?;
    run.json(
        artifacts::INCEPTION,
        &InceptionArtifact {
            title: &cfg.purpose.title,
            ranking: &ranking,
            load_errors: &catalog.errors,
        },
    )?;
    run.finish(artifacts::EVAL_A, &report)
}

pub fn modeling(cfg: &PipelineConfig, inception_path: &Path) -> Result<Verdict, PhaseError> {
    let mut run = PhaseRun::start(Phase::Modeling, cfg)?;
    run.consume(inception_path)?;
    let input: InceptionInput = read_json_document(inception_path).map_err(run.err())?;
    let selection = select_datasets(&input.ranking, cfg.max_per_category);
    let locator = locator(cfg);
    let mut schemas = Vec::with_capacity(selection.len());
    for candidate in &selection {
        let r = cfg
            .purpose
            .dataset(&candidate.id)
            .ok_or_else(|| PhaseError {
                phase: Phase::Modeling,
                message: format!("selected dataset `{}` is not in the purpose", candidate.id),
            })?;
        let path = locator.dataset_path(r);
        run.consume(&path)?;
        schemas.push(load_dataset_schema(r, &path).map_err(run.err())?);
    }
    let selected: Vec<_> = schemas.iter().collect();
    let model = build_etg_model(
        &cfg.purpose.slug(),
        &cfg.purpose.cqs,
        &selected,
        &cfg.purpose.property_overrides,
    )
    .map_err(run.err())?;
    let report = eval_modeling(&cfg.purpose.cqs, &model, &cfg.thresholds).map_err(run.err())?;
    let model_path = cfg.artifact(artifacts::MODEL);
    write_text(&model_path, &write_etg_document(&model.etg)).map_err(run.err())?;
    write_json(
        &artifacts::sidecar_path(&model_path),
        &ModelSidecar::new(&model, selection),
    )
    .map_err(run.err())?;
    run.finish(artifacts::EVAL_B, &report)
}

#[derive(Serialize)]
struct AlignmentArtifact<'a> {
    ranking: &'a OntologyRanking,
    predictions: &'a BTreeMap<String, PredictionVector>,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    load_errors: &'a [LoadError],
}

pub fn alignment(cfg: &PipelineConfig, model_path: &Path) -> Result<Verdict, PhaseError> {
    let mut run = PhaseRun::start(Phase::Alignment, cfg)?;
    let sidecar_path = artifacts::sidecar_path(model_path);
    run.consume(model_path)?;
    run.consume(&sidecar_path)?;
    let etg = read_etg_document(model_path).map_err(run.err())?;
    let violations = validate_etg(&etg);
    if !violations.is_empty() {
        return Err(PhaseError {
            phase: Phase::Alignment,
            message: format!(
                "{} is not a valid ETG: {violations:?}",
                model_path.display()
            ),
        });
    }
    let sidecar: ModelSidecar = read_json_document(&sidecar_path).map_err(run.err())?;
    let model = sidecar.into_model(etg);

    let locator = locator(cfg);
    let mut loaded = BTreeMap::new();
    let mut load_errors = Vec::new();
    for r in &cfg.purpose.ontology_refs {
        let path = locator.ontology_path(r);
        match load_ontology(r, &path) {
            Ok(onto) => {
                run.consume(&path)?;
                loaded.insert(onto.meta.id.clone(), onto);
            }
            Err(e) => load_errors.push(e),
        }
    }
    let candidates: Vec<&Etg> = loaded.values().collect();
    let ranking = rank_ontologies(&model.etg, &candidates).map_err(run.err())?;
    let predictions: BTreeMap<String, PredictionVector> = ranking
        .entries
        .iter()
        .map(|r| {
            (
                r.id.clone(),
                etr_predict(&model.etg, &loaded[&r.id], &cfg.policy),
            )
        })
        .collect();
    let (final_etg, plan) =
        generate_etg(&model, &predictions, &ranking, &loaded, &cfg.policy).map_err(run.err())?;
    let ranked: Vec<&Etg> = ranking.entries.iter().map(|r| &loaded[&r.id]).collect();
    let report = eval_alignment(&final_etg, &ranked, &cfg.thresholds).map_err(run.err())?;

    write_text(
        &cfg.artifact(artifacts::FINAL_ETG),
        &write_etg_document(&final_etg),
    )
    .map_err(run.err())?;
    run.json(artifacts::MERGE_PLAN, &plan)?;
    run.json(artifacts::RENAME_MAP, &plan.rename_map())?;
    run.json(
        artifacts::ALIGNMENT,
        &AlignmentArtifact {
            ranking: &ranking,
            predictions: &predictions,
            load_errors: &load_errors,
        },
    )?;
    run.finish(artifacts::EVAL_C, &report)
}

#[derive(Serialize)]
struct IntegrationArtifact<'a> {
    mappings: &'a [SchemaMapping],
    summary: &'a IntegrationSummary,
    export: &'a ExportSummary,
}

pub fn integration(
    cfg: &PipelineConfig,
    etg_path: &Path,
    model_path: Option<&Path>,
) -> Result<Verdict, PhaseError> {
    let mut run = PhaseRun::start(Phase::Integration, cfg)?;
    let etg_dir = etg_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let sidecar_path = artifacts::sidecar_path(
        &model_path
            .map(Path::to_path_buf)
            .unwrap_or_else(|| etg_dir.join(artifacts::MODEL)),
    );
    let rename_path = etg_dir.join(artifacts::RENAME_MAP);
    run.consume(etg_path)?;
    run.consume(&sidecar_path)?;

    let etg = read_etg_document(etg_path).map_err(run.err())?;
    let violations = validate_etg(&etg);
    if !violations.is_empty() {
        return Err(PhaseError {
            phase: Phase::Integration,
            message: format!("{} is not a valid ETG: {violations:?}", etg_path.display()),
        });
    }
    let renames: BTreeMap<Label, Label> = if rename_path.is_file() {
        run.consume(&rename_path)?;
        read_json_document(&rename_path).map_err(run.err())?
    } else {
        BTreeMap::new()
    };
    let sidecar: ModelSidecar = read_json_document(&sidecar_path).map_err(run.err())?;

    let locator = locator(cfg);
    let mut integrator = Integrator::new(format!("{}-eg", cfg.purpose.slug()), etg.clone());
    let mut mappings = Vec::new();
    for candidate in &sidecar.selection {
        let r = cfg
            .purpose
            .dataset(&candidate.id)
            .ok_or_else(|| PhaseError {
                phase: Phase::Integration,
                message: format!("selected dataset `{}` is not in the purpose", candidate.id),
            })?;
        let path = locator.dataset_path(r);
        run.consume(&path)?;
        let schema = load_dataset_schema(r, &path).map_err(run.err())?;
        let override_path: Option<PathBuf> = cfg
            .mappings_dir
            .as_ref()
            .map(|d| d.join(format!("{}.json", r.meta.id)))
            .filter(|p| p.is_file());
        let mapping = match override_path {
            Some(p) => {
                run.consume(&p)?;
                let over = read_mapping_override(&p).map_err(run.err())?;
                apply_override(&over, &schema, &etg, &renames).map_err(run.err())?
            }
            None => infer_mapping(&schema, &etg, &renames).map_err(run.err())?,
        };
        let file = File::open(&path).map_err(|e| PhaseError {
            phase: Phase::Integration,
            message: format!("{}: {e}", path.display()),
        })?;
        let fragment = generate_entities(file, &mapping, &etg).map_err(run.err())?;
        integrator.integrate(fragment).map_err(run.err())?;
        mappings.push(mapping);
    }
    let (eg, summary) = integrator.finish();
    let (text, export) = render_ntriples(&eg);
    write_text(&cfg.export_path, &text).map_err(run.err())?;
    let report =
        eval_purpose(&eg, &cfg.purpose.cqs, &renames, &cfg.thresholds).map_err(run.err())?;
    run.json(
        artifacts::INTEGRATION,
        &IntegrationArtifact {
            mappings: &mappings,
            summary: &summary,
            export: &export,
        },
    )?;
    run.finish(artifacts::EVAL_D, &report)
}

/// Outcome of `run`: the verdict of every phase that ran.
#[derive(Debug, Clone, Default)]
pub struct PipelineOutcome {
    pub verdicts: Vec<(Phase, Verdict)>,
    pub skipped: Vec<Phase>,
}

impl PipelineOutcome {
    pub fn failed(&self) -> bool {
        self.verdicts.iter().any(|(_, v)| *v == Verdict::Fail)
    }
}

/// Runs the four phases in order, each reading its predecessor's artifacts
/// from the output directory. With `fail_fast`, a failed gate ends the run.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome, PhaseError> {
    let mut outcome = PipelineOutcome::default();
    for phase in Phase::ALL {
        if cfg.fail_fast && outcome.failed() {
            outcome.skipped.push(phase);
            continue;
        }
        let verdict = match phase {
            Phase::Inception => inception(cfg)?,
            Phase::Modeling => modeling(cfg, &cfg.artifact(artifacts::INCEPTION))?,
            Phase::Alignment => alignment(cfg, &cfg.artifact(artifacts::MODEL))?,
            Phase::Integration => integration(cfg, &cfg.artifact(artifacts::FINAL_ETG), None)?,
        };
        outcome.verdicts.push((phase, verdict));
    }
    Ok(outcome)
}
