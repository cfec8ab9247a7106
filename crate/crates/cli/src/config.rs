use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use itelos_core::alignment::AlignmentPolicy;
use itelos_core::inception::{parse_purpose, Purpose, PurposeError};
use itelos_core::model::{read_json_document, DocumentError};
use itelos_core::{Fraction, Thresholds};
use serde::Deserialize;
use thiserror::Error;

/// Environment variable naming the output directory when neither a flag
/// nor the config file does.
pub const OUT_ENV: &str = "ITELOS_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "itelos",
    version,
    about = "Purpose-driven knowledge graph construction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank candidate datasets and ontologies against the competency queries (gate eval_a).
    Inception(CommonArgs),
    /// Build the ETG model from the queries and the selected datasets (gate eval_b).
    Model(ModelArgs),
    /// Align the model with the reference ontologies (gate eval_c).
    Align(AlignArgs),
    /// Integrate the datasets into an entity graph and export it (gate eval_d).
    Integrate(IntegrateArgs),
    /// Run all four phases in sequence.
    Run(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Purpose document (JSON).
    #[arg(long)]
    pub purpose: Option<PathBuf>,
    /// Output directory. Falls back to the config file, then to $ITELOS_OUT.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory holding the dataset files named by the purpose.
    #[arg(long)]
    pub datasets: Option<PathBuf>,
    /// Directory holding the ontology files named by the purpose.
    #[arg(long)]
    pub ontologies: Option<PathBuf>,
    /// Minimum coverage for a gate to pass [default: 1/2].
    #[arg(long, value_name = "FRACTION")]
    pub cov_min: Option<Fraction>,
    /// Extensiveness at or above which eval_b passes [default: 0].
    #[arg(long, value_name = "FRACTION")]
    pub ext_floor: Option<Fraction>,
    /// Lower bound of the accepted sparsity band [default: 0].
    #[arg(long, value_name = "FRACTION")]
    pub spr_band_min: Option<Fraction>,
    /// Upper bound of the accepted sparsity band [default: 3/5].
    #[arg(long, value_name = "FRACTION")]
    pub spr_band_max: Option<Fraction>,
    /// Minimum score for an ontology etype to be a candidate [default: 7/10].
    #[arg(long, value_name = "FRACTION")]
    pub match_threshold: Option<Fraction>,
    /// Minimum score for a core etype to adopt an ontology etype [default: 3/4].
    #[arg(long, value_name = "FRACTION")]
    pub core_adopt_threshold: Option<Fraction>,
    /// Weight of name similarity in the etype score [default: 1/2].
    #[arg(long, value_name = "FRACTION")]
    pub etr_name_weight: Option<Fraction>,
    /// Datasets kept per category when selecting for modeling.
    #[arg(long)]
    pub max_per_category: Option<usize>,
    /// Stop `run` at the first failed gate.
    #[arg(long, value_name = "BOOL")]
    pub fail_fast: Option<bool>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Inception report; defaults to `<out>/inception.json`.
    #[arg(long)]
    pub inception: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AlignArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// ETG model; defaults to `<out>/etg_model.json`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Final ETG; defaults to `<out>/etg_final.json`.
    #[arg(long)]
    pub etg: Option<PathBuf>,
    /// ETG model whose provenance sidecar lists the selected datasets;
    /// defaults to `etg_model.json` next to the final ETG.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Directory of mapping overrides named `<dataset id>.json`.
    #[arg(long)]
    pub mappings: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Directory of mapping overrides named `<dataset id>.json`.
    #[arg(long)]
    pub mappings: Option<PathBuf>,
}

/// Keys accepted in a `--config` file. Relative paths are resolved against
/// the file's directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub purpose: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub datasets: Option<PathBuf>,
    pub ontologies: Option<PathBuf>,
    pub mappings: Option<PathBuf>,
    pub cov_min: Option<Fraction>,
    pub ext_floor: Option<Fraction>,
    pub spr_band_min: Option<Fraction>,
    pub spr_band_max: Option<Fraction>,
    pub match_threshold: Option<Fraction>,
    pub core_adopt_threshold: Option<Fraction>,
    pub etr_name_weight: Option<Fraction>,
    pub max_per_category: Option<usize>,
    pub fail_fast: Option<bool>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("no purpose file given (use --purpose or the `purpose` config key)")]
    MissingPurpose,
    #[error("no output location given (use --out, the `out` config key or ${OUT_ENV})")]
    MissingOut,
    #[error("purpose file {} does not exist", .0.display())]
    PurposeNotFound(PathBuf),
    #[error("{} does not exist", .0.display())]
    MissingInput(PathBuf),
    #[error("config file: {0}")]
    ConfigFile(#[from] DocumentError),
    #[error(transparent)]
    Purpose(#[from] PurposeError),
    #[error("{0}")]
    Invalid(String),
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub purpose_path: PathBuf,
    pub purpose: Purpose,
    /// Directory receiving reports and intermediate artifacts.
    pub out_dir: PathBuf,
    /// Where the N-Triples export goes.
    pub export_path: PathBuf,
    pub datasets_dir: Option<PathBuf>,
    pub ontologies_dir: Option<PathBuf>,
    pub mappings_dir: Option<PathBuf>,
    pub thresholds: Thresholds,
    pub policy: AlignmentPolicy,
    pub max_per_category: Option<usize>,
    pub fail_fast: bool,
}

impl PipelineConfig {
    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn relative_to(base: &Path, path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        path
    } else {
        base.join(path)
    }
}

/// Merges flags over the config file and defaults, then loads the purpose.
/// `out_env` is the value of [`OUT_ENV`], passed in so callers control it.
pub fn resolve(
    args: &CommonArgs,
    mappings: Option<&PathBuf>,
    out_env: Option<PathBuf>,
) -> Result<PipelineConfig, ConfigError> {
    let file = match &args.config {
        Some(path) => {
            if !path.is_file() {
                return Err(ConfigError::MissingInput(path.clone()));
            }
            let mut file: ConfigFile = read_json_document(path)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            for p in [
                &mut file.purpose,
                &mut file.out,
                &mut file.datasets,
                &mut file.ontologies,
                &mut file.mappings,
            ] {
                *p = p.take().map(|p| relative_to(&base, p));
            }
            file
        }
        None => ConfigFile::default(),
    };

    let purpose_path = args
        .purpose
        .clone()
        .or(file.purpose)
        .ok_or(ConfigError::MissingPurpose)?;
    if !purpose_path.is_file() {
        return Err(ConfigError::PurposeNotFound(purpose_path));
    }
    let out = args
        .out
        .clone()
        .or(file.out)
        .or(out_env)
        .ok_or(ConfigError::MissingOut)?;
    let (out_dir, export_path) = if out.extension().is_some_and(|e| e == "nt") {
        let dir = out
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        (dir, out)
    } else {
        (out.clone(), out.join(crate::artifacts::EXPORT))
    };

    let defaults = Thresholds::default();
    let thresholds = Thresholds {
        cov_min: args.cov_min.or(file.cov_min).unwrap_or(defaults.cov_min),
        ext_floor: args
            .ext_floor
            .or(file.ext_floor)
            .unwrap_or(defaults.ext_floor),
        spr_band_min: args
            .spr_band_min
            .or(file.spr_band_min)
            .unwrap_or(defaults.spr_band_min),
        spr_band_max: args
            .spr_band_max
            .or(file.spr_band_max)
            .unwrap_or(defaults.spr_band_max),
    };
    thresholds
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let default_policy = AlignmentPolicy::default();
    let policy = AlignmentPolicy {
        match_threshold: args
            .match_threshold
            .or(file.match_threshold)
            .unwrap_or(default_policy.match_threshold),
        core_adopt_threshold: args
            .core_adopt_threshold
            .or(file.core_adopt_threshold)
            .unwrap_or(default_policy.core_adopt_threshold),
        etr_name_weight: args
            .etr_name_weight
            .or(file.etr_name_weight)
            .unwrap_or(default_policy.etr_name_weight),
    };
    policy
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let purpose = parse_purpose(&purpose_path)?;
    Ok(PipelineConfig {
        purpose_path,
        purpose,
        out_dir,
        export_path,
        datasets_dir: args.datasets.clone().or(file.datasets),
        ontologies_dir: args.ontologies.clone().or(file.ontologies),
        mappings_dir: mappings.cloned().or(file.mappings),
        thresholds,
        policy,
        max_per_category: args.max_per_category.or(file.max_per_category),
        fail_fast: args.fail_fast.or(file.fail_fast).unwrap_or(true),
    })
}

#[cfg(test)]
mod tests {
    use std::fs;

    use super::*;

    const PURPOSE: &str = r#"{"title": "T", "cqs": [{"id": "q", "etypes": ["a"]}], "datasets": [], "ontologies": []}"#;

    #[test]
    fn flags_beat_config_beats_env() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("p.json"), PURPOSE).unwrap();
        fs::write(
            dir.path().join("c.json"),
            r#"{"purpose": "p.json", "out": "from_config", "cov_min": 0.8, "fail_fast": false}"#,
        )
        .unwrap();
        let args = CommonArgs {
            config: Some(dir.path().join("c.json")),
            cov_min: Some(Fraction::new(9, 10).unwrap()),
            ..Default::default()
        };
        let cfg = resolve(&args, None, Some("from_env".into())).unwrap();
        assert_eq!(cfg.thresholds.cov_min, Fraction::new(9, 10).unwrap());
        assert_eq!(cfg.out_dir, dir.path().join("from_config"));
        assert!(!cfg.fail_fast);

        let args = CommonArgs {
            purpose: Some(dir.path().join("p.json")),
            ..Default::default()
        };
        let cfg = resolve(&args, None, Some("from_env".into())).unwrap();
        assert_eq!(cfg.out_dir, PathBuf::from("from_env"));
        assert!(cfg.fail_fast);
    }

    #[test]
    fn nt_out_names_the_export() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("p.json"), PURPOSE).unwrap();
        let args = CommonArgs {
            purpose: Some(dir.path().join("p.json")),
            out: Some(dir.path().join("reports/eg.nt")),
            ..Default::default()
        };
        let cfg = resolve(&args, None, None).unwrap();
        assert_eq!(cfg.out_dir, dir.path().join("reports"));
        assert_eq!(cfg.export_path, dir.path().join("reports/eg.nt"));
    }

    #[test]
    fn config_errors() {
        let missing = CommonArgs {
            purpose: Some("/nonexistent/p.json".into()),
            out: Some("o".into()),
            ..Default::default()
        };
        assert!(matches!(
            resolve(&missing, None, None),
            Err(ConfigError::PurposeNotFound(_))
        ));
        assert!(matches!(
            resolve(&CommonArgs::default(), None, None),
            Err(ConfigError::MissingPurpose)
        ));

        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("p.json"), PURPOSE).unwrap();
        let inverted = CommonArgs {
            purpose: Some(dir.path().join("p.json")),
            out: Some("o".into()),
            spr_band_min: Some(Fraction::new(9, 10).unwrap()),
            ..Default::default()
        };
        assert!(matches!(
            resolve(&inverted, None, None),
            Err(ConfigError::Invalid(_))
        ));
    }
}
