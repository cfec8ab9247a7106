use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

/// A name for an etype or property.
///
/// Two labels are equal when their normalized forms are equal: lowercase,
/// trimmed, every run of non-alphanumeric characters collapsed to one
/// underscore, no leading or trailing underscore. The raw spelling is kept
/// for display only.
#[derive(Clone)]
pub struct Label {
    raw: String,
    normalized: String,
}

impl Label {
    pub fn new(raw: &str) -> Result<Self, ModelError> {
        normalize_label(raw)
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn as_str(&self) -> &str {
        &self.normalized
    }
}

/// Normalizes `raw` into a [`Label`].
pub fn normalize_label(raw: &str) -> Result<Label, ModelError> {
    let mut normalized = String::with_capacity(raw.len());
    let mut pending_sep = false;
    for c in raw.trim().to_lowercase().chars() {
        if c.is_alphanumeric() {
            if pending_sep && !normalized.is_empty() {
                normalized.push('_');
            }
            pending_sep = false;
            normalized.push(c);
        } else {
            pending_sep = true;
        }
    }
    if normalized.is_empty() {
        return Err(ModelError::EmptyLabel(raw.to_string()));
    }
    Ok(Label {
        raw: raw.to_string(),
        normalized,
    })
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.normalized == other.normalized
    }
}

impl Eq for Label {}

impl Hash for Label {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.normalized.hash(state)
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.normalized.cmp(&other.normalized)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Label({:?})", self.normalized)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.normalized)
    }
}

impl std::str::FromStr for Label {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_label(s)
    }
}

// Documents always carry the normalized form.
impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.normalized)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        normalize_label(&raw).map_err(serde::de::Error::custom)
    }
}
