use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use itelos_core::Verdict;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::artifacts::{write_json, MANIFEST};

/// Record of what each phase consumed and decided. The only artifact that
/// carries timestamps, so it is excluded from byte-identity comparisons.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub phases: BTreeMap<String, PhaseRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub verdict: Verdict,
    pub started_at: String,
    pub finished_at: String,
    /// File path → SHA-256 of its content.
    pub inputs: BTreeMap<String, String>,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn digest_file(path: &Path) -> io::Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    /// Loads the manifest in `dir`, or starts a fresh one when it is absent
    /// or unreadable.
    pub fn load(dir: &Path) -> Self {
        let fresh = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            phases: BTreeMap::new(),
        };
        fs::read_to_string(dir.join(MANIFEST))
            .ok()
            .and_then(|t| serde_json::from_str::<RunManifest>(&t).ok())
            .map(|m| RunManifest {
                phases: m.phases,
                ..fresh.clone()
            })
            .unwrap_or(fresh)
    }

    pub fn save(&self, dir: &Path) -> io::Result<()> {
        write_json(&dir.join(MANIFEST), self)
    }

    pub fn forget(&mut self, phase: &str) {
        self.phases.remove(phase);
    }

    pub fn record(&mut self, phase: &str, record: PhaseRecord) {
        self.phases.insert(phase.to_string(), record);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_sha256() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f");
        fs::write(&p, "abc").unwrap();
        assert_eq!(
            digest_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::load(dir.path());
        m.record(
            "inception",
            PhaseRecord {
                verdict: Verdict::Pass,
                started_at: now(),
                finished_at: now(),
                inputs: BTreeMap::from([("p.json".into(), "00".into())]),
            },
        );
        m.save(dir.path()).unwrap();
        assert_eq!(RunManifest::load(dir.path()), m);
    }
}
