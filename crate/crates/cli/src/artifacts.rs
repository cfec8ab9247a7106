use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use itelos_core::GateReport;
use serde::Serialize;
use serde_json::Value;

pub const INCEPTION: &str = "inception.json";
pub const EVAL_A: &str = "eval_a.json";
pub const MODEL: &str = "etg_model.json";
pub const EVAL_B: &str = "eval_b.json";
pub const FINAL_ETG: &str = "etg_final.json";
pub const MERGE_PLAN: &str = "merge_plan.json";
pub const RENAME_MAP: &str = "rename_map.json";
pub const ALIGNMENT: &str = "alignment.json";
pub const EVAL_C: &str = "eval_c.json";
pub const EXPORT: &str = "eg.nt";
pub const INTEGRATION: &str = "integration.json";
pub const EVAL_D: &str = "eval_d.json";
pub const SUMMARY: &str = "summary.txt";
pub const MANIFEST: &str = "manifest.json";

pub const GATE_REPORTS: [&str; 4] = [EVAL_A, EVAL_B, EVAL_C, EVAL_D];

/// Provenance sidecar of a model document: `x.json` → `x.provenance.json`.
pub fn sidecar_path(model: &Path) -> PathBuf {
    let stem = model
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("etg_model");
    model.with_file_name(format!("{stem}.provenance.json"))
}

pub fn write_text(path: &Path, text: &str) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn remove_if_present(path: &Path) -> io::Result<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != io::ErrorKind::NotFound => Err(e),
        _ => Ok(()),
    }
}

fn fraction_text(v: &Value) -> String {
    match (v["num"].as_u64(), v["den"].as_u64()) {
        (Some(n), Some(1)) => n.to_string(),
        (Some(n), Some(d)) => format!("{n}/{d}"),
        _ => "?".into(),
    }
}

fn render_gate(out: &mut String, name: &str, report: &Value) {
    let s = |v: &Value| v.as_str().unwrap_or("?").to_string();
    let _ = writeln!(
        out,
        "{name}: {} ({})",
        s(&report["verdict"]).to_uppercase(),
        s(&report["metric"])
    );
    if let Some(thresholds) = report["thresholds"].as_array() {
        let applied: Vec<String> = thresholds
            .iter()
            .map(|t| format!("{}={}", s(&t["name"]), fraction_text(&t["value"])))
            .collect();
        let _ = writeln!(out, "  thresholds: {}", applied.join(", "));
    }
    for row in report["rows"].as_array().into_iter().flatten() {
        let _ = writeln!(
            out,
            "  {} {}: {} {}",
            s(&row["resource"]),
            s(&row["kind"]),
            fraction_text(&row["result"]["value"]),
            s(&row["verdict"])
        );
        if let Some(missing) = row["missing"].as_array() {
            let names: Vec<String> = missing.iter().map(s).collect();
            let _ = writeln!(out, "    missing: {}", names.join(", "));
        }
    }
    for note in report["notes"].as_array().into_iter().flatten() {
        let _ = writeln!(out, "  note: {}", s(note));
    }
}

/// Plain-text digest of every gate report present in `dir`.
pub fn render_summary(dir: &Path) -> String {
    let mut out = String::new();
    let mut worst = None;
    for name in GATE_REPORTS {
        let Ok(text) = fs::read_to_string(dir.join(name)) else {
            continue;
        };
        let Ok(report) = serde_json::from_str::<Value>(&text) else {
            let _ = writeln!(out, "{}: unreadable report", name.trim_end_matches(".json"));
            continue;
        };
        render_gate(&mut out, name.trim_end_matches(".json"), &report);
        let verdict = report["verdict"].as_str().unwrap_or("fail").to_string();
        let rank = ["pass", "warn", "fail"]
            .iter()
            .position(|v| *v == verdict)
            .unwrap_or(2);
        worst = worst.max(Some(rank));
    }
    match worst {
        Some(rank) => {
            let _ = writeln!(out, "overall: {}", ["PASS", "WARN", "FAIL"][rank]);
        }
        None => out.push_str("no gate has run\n"),
    }
    out
}

pub fn write_report(dir: &Path, name: &str, report: &GateReport) -> io::Result<()> {
    write_json(&dir.join(name), report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_name() {
        assert_eq!(
            sidecar_path(Path::new("r/etg_model.json")),
            PathBuf::from("r/etg_model.provenance.json")
        );
    }

    #[test]
    fn summary_of_nothing() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(render_summary(dir.path()), "no gate has run\n");
    }
}
