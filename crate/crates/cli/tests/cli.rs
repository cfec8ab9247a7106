use std::fs;
use std::path::{Path, PathBuf};

use itelos_cli::{run_cli, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/covid")
}

fn purpose() -> String {
    fixture()
        .join("purpose.json")
        .to_string_lossy()
        .into_owned()
}

/// Runs the CLI in-process and returns (exit status, stdout, stderr).
fn itelos(args: &[&str], out_env: Option<&Path>) -> (i32, String, String) {
    let (mut log, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("itelos").chain(args.iter().copied());
    let code = run_cli(argv, out_env.map(Path::to_path_buf), &mut log, &mut err);
    (
        code,
        String::from_utf8(log).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn verdict(dir: &Path, report: &str) -> String {
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.join(report)).unwrap()).unwrap();
    v["verdict"].as_str().unwrap().to_string()
}

#[test]
fn missing_purpose_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, err) = itelos(&["run", "--out", out], None);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("purpose"), "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(itelos(&["run", "--no-such-flag"], None).0, EXIT_USAGE);
    assert_eq!(itelos(&["frobnicate"], None).0, EXIT_USAGE);
}

#[test]
fn help_exits_cleanly() {
    let (code, log, _) = itelos(&["--help"], None);
    assert_eq!(code, EXIT_OK);
    assert!(log.contains("inception"));
}

#[test]
fn malformed_purpose_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("purpose.json");
    fs::write(&bad, "{ not json").unwrap();
    let out = dir.path().join("out");
    let (code, _, _) = itelos(
        &[
            "run",
            "--purpose",
            bad.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn out_of_range_threshold_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, _) = itelos(
        &[
            "run",
            "--purpose",
            &purpose(),
            "--out",
            out,
            "--cov-min",
            "2",
        ],
        None,
    );
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn missing_out_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = itelos(&["inception", "--purpose", &purpose()], Some(dir.path()));
    assert_eq!(code, EXIT_OK);
    assert!(dir.path().join("inception.json").is_file());

    let (code, _, _) = itelos(&["inception", "--purpose", &purpose()], None);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn flags_override_config_file_which_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(
        fixture().join("purpose.json"),
        dir.path().join("purpose.json"),
    )
    .unwrap();
    for sub in ["datasets", "ontologies"] {
        fs::create_dir(dir.path().join(sub)).unwrap();
        for entry in fs::read_dir(fixture().join(sub)).unwrap() {
            let entry = entry.unwrap();
            fs::copy(entry.path(), dir.path().join(sub).join(entry.file_name())).unwrap();
        }
    }
    let config = dir.path().join("itelos.json");
    fs::write(
        &config,
        r#"{"purpose": "purpose.json", "out": "reports", "cov_min": "0.99"}"#,
    )
    .unwrap();
    let reports = dir.path().join("reports");

    let (code, _, _) = itelos(&["inception", "--config", config.to_str().unwrap()], None);
    assert_eq!(code, EXIT_FAIL);
    assert_eq!(verdict(&reports, "eval_a.json"), "fail");

    let (code, _, _) = itelos(
        &[
            "inception",
            "--config",
            config.to_str().unwrap(),
            "--cov-min",
            "1/2",
        ],
        None,
    );
    assert_eq!(code, EXIT_OK);
    assert_eq!(verdict(&reports, "eval_a.json"), "pass");
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("itelos.json");
    fs::write(&config, r#"{"cov_minimum": "0.5"}"#).unwrap();
    let (code, _, _) = itelos(
        &[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--purpose",
            &purpose(),
        ],
        None,
    );
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn integrate_writes_export_to_named_file() {
    let dir = tempfile::tempdir().unwrap();
    let reports = dir.path().join("r");
    let r = reports.to_str().unwrap();
    assert_eq!(
        itelos(&["run", "--purpose", &purpose(), "--out", r], None).0,
        EXIT_OK
    );

    let export = dir.path().join("graph").join("covid.nt");
    let etg = reports.join("etg_final.json");
    let model = reports.join("etg_model.json");
    let (code, _, err) = itelos(
        &[
            "integrate",
            "--purpose",
            &purpose(),
            "--etg",
            etg.to_str().unwrap(),
            "--model",
            model.to_str().unwrap(),
            "--out",
            export.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(
        fs::read(&export).unwrap(),
        fs::read(reports.join("eg.nt")).unwrap()
    );
    assert_eq!(verdict(&dir.path().join("graph"), "eval_d.json"), "pass");
}

#[test]
fn rerunning_a_phase_invalidates_downstream_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        itelos(&["run", "--purpose", &purpose(), "--out", out], None).0,
        EXIT_OK
    );
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("eval_d: PASS"), "{summary}");
    assert!(summary.ends_with("overall: PASS\n"), "{summary}");

    assert_eq!(
        itelos(&["inception", "--purpose", &purpose(), "--out", out], None).0,
        EXIT_OK
    );
    for gone in [
        "etg_model.json",
        "etg_final.json",
        "eg.nt",
        "eval_b.json",
        "eval_d.json",
    ] {
        assert!(!dir.path().join(gone).exists(), "{gone} survived");
    }
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    let phases: Vec<&String> = manifest["phases"].as_object().unwrap().keys().collect();
    assert_eq!(phases, ["inception"]);
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(!summary.contains("eval_b"), "{summary}");
}

#[test]
fn fail_fast_off_runs_every_phase() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "run",
        "--purpose",
        &purpose(),
        "--out",
        out,
        "--cov-min",
        "0.99",
        "--fail-fast",
        "false",
    ];
    assert_eq!(itelos(&args, None).0, EXIT_FAIL);
    assert_eq!(verdict(dir.path(), "eval_a.json"), "fail");
    assert!(dir.path().join("eval_d.json").is_file());
}
