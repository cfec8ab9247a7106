use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::purpose::{DatasetRef, OntologyRef, Purpose};
use crate::model::{
    read_etg_document, validate_etg, Column, ColumnRole, DatasetSchema, DocumentError, Etg,
    EtgViolation, Label, ResourceMeta, SchemaViolation,
};

/// Where resource files are looked up. A directory override replaces the
/// directory part of every referenced path of that kind.
#[derive(Debug, Clone, Default)]
pub struct ResourceLocator {
    pub base_dir: PathBuf,
    pub datasets_dir: Option<PathBuf>,
    pub ontologies_dir: Option<PathBuf>,
}

impl ResourceLocator {
    pub fn for_purpose(purpose: &Purpose) -> Self {
        ResourceLocator {
            base_dir: purpose.base_dir.clone(),
            ..Default::default()
        }
    }

    fn resolve(&self, path: &Path, dir: Option<&PathBuf>) -> PathBuf {
        match (dir, path.file_name()) {
            (Some(dir), Some(name)) => dir.join(name),
            _ if path.is_absolute() => path.to_path_buf(),
            _ => self.base_dir.join(path),
        }
    }

    pub fn dataset_path(&self, r: &DatasetRef) -> PathBuf {
        self.resolve(&r.path, self.datasets_dir.as_ref())
    }

    pub fn ontology_path(&self, r: &OntologyRef) -> PathBuf {
        self.resolve(&r.path, self.ontologies_dir.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Resource {
    Dataset(DatasetSchema),
    Ontology(Etg),
}

impl Resource {
    pub fn meta(&self) -> &ResourceMeta {
        match self {
            Resource::Dataset(s) => &s.meta,
            Resource::Ontology(g) => &g.meta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum LoadProblem {
    Unreadable { message: String },
    Malformed { message: String },
    InvalidOntology { violations: Vec<EtgViolation> },
    InvalidSchema { violations: Vec<SchemaViolation> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoadError {
    pub resource: String,
    pub path: PathBuf,
    #[serde(flatten)]
    pub problem: LoadProblem,
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({}): ", self.resource, self.path.display())?;
        match &self.problem {
            LoadProblem::Unreadable { message } | LoadProblem::Malformed { message } => {
                f.write_str(message)
            }
            LoadProblem::InvalidOntology { violations } => {
                let v: Vec<_> = violations.iter().map(ToString::to_string).collect();
                write!(f, "invalid ontology: {}", v.join("; "))
            }
            LoadProblem::InvalidSchema { violations } => {
                let v: Vec<_> = violations.iter().map(ToString::to_string).collect();
                write!(f, "invalid dataset schema: {}", v.join("; "))
            }
        }
    }
}

/// Loaded resources keyed by id, plus whatever failed to load.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub resources: BTreeMap<String, Resource>,
    pub paths: BTreeMap<String, PathBuf>,
    pub errors: Vec<LoadError>,
}

impl Catalog {
    pub fn datasets(&self) -> impl Iterator<Item = &DatasetSchema> {
        self.resources.values().filter_map(|r| match r {
            Resource::Dataset(s) => Some(s),
            Resource::Ontology(_) => None,
        })
    }

    pub fn ontologies(&self) -> impl Iterator<Item = &Etg> {
        self.resources.values().filter_map(|r| match r {
            Resource::Ontology(g) => Some(g),
            Resource::Dataset(_) => None,
        })
    }

    pub fn dataset(&self, id: &str) -> Option<&DatasetSchema> {
        match self.resources.get(id) {
            Some(Resource::Dataset(s)) => Some(s),
            _ => None,
        }
    }

    pub fn ontology(&self, id: &str) -> Option<&Etg> {
        match self.resources.get(id) {
            Some(Resource::Ontology(g)) => Some(g),
            _ => None,
        }
    }
}

/// Reads the header of a CSV file and derives the dataset schema from it
/// and from the purpose entry.
pub fn load_dataset_schema(r: &DatasetRef, path: &Path) -> Result<DatasetSchema, LoadError> {
    let fail = |problem| LoadError {
        resource: r.meta.id.clone(),
        path: path.to_path_buf(),
        problem,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| {
            fail(LoadProblem::Unreadable {
                message: e.to_string(),
            })
        })?;
    let headers = reader
        .headers()
        .map_err(|e| {
            fail(LoadProblem::Malformed {
                message: e.to_string(),
            })
        })?
        .clone();
    schema_from_headers(r, headers.iter()).map_err(fail)
}

pub fn schema_from_headers<'a>(
    r: &DatasetRef,
    headers: impl IntoIterator<Item = &'a str>,
) -> Result<DatasetSchema, LoadProblem> {
    let mut columns = Vec::new();
    for header in headers {
        let name = Label::new(header).map_err(|e| LoadProblem::Malformed {
            message: format!("header: {e}"),
        })?;
        let link_target = r.links.get(&name).cloned();
        let role = if r.identity.as_ref() == Some(&name) {
            ColumnRole::Identity
        } else if link_target.is_some() {
            ColumnRole::Link
        } else {
            ColumnRole::Attribute
        };
        let property = (!r.ignore.contains(&name)).then(|| name.clone());
        columns.push(Column {
            name,
            header: header.to_string(),
            property,
            role,
            link_target,
        });
    }
    let schema = DatasetSchema {
        dataset_id: r.meta.id.clone(),
        assigned_etype: r.etype.clone(),
        columns,
        meta: r.meta.clone(),
    };
    let mut violations = schema.validate();
    for name in r.identity.iter().chain(r.links.keys()) {
        if !schema.columns.iter().any(|c| &c.name == name) {
            violations.push(SchemaViolation::MissingColumn {
                column: name.clone(),
            });
        }
    }
    if violations.is_empty() {
        Ok(schema)
    } else {
        violations.sort();
        Err(LoadProblem::InvalidSchema { violations })
    }
}

/// Loads an ontology document; the purpose entry's metadata wins over the
/// document's own.
pub fn load_ontology(r: &OntologyRef, path: &Path) -> Result<Etg, LoadError> {
    let fail = |problem| LoadError {
        resource: r.meta.id.clone(),
        path: path.to_path_buf(),
        problem,
    };
    let mut g = read_etg_document(path).map_err(|e| match e {
        DocumentError::Io { source, .. } => fail(LoadProblem::Unreadable {
            message: source.to_string(),
        }),
        other => fail(LoadProblem::Malformed {
            message: other.to_string(),
        }),
    })?;
    let violations = validate_etg(&g);
    if !violations.is_empty() {
        return Err(fail(LoadProblem::InvalidOntology { violations }));
    }
    let origin = if r.meta.origin.is_empty() {
        std::mem::take(&mut g.meta.origin)
    } else {
        r.meta.origin.clone()
    };
    g.meta = ResourceMeta {
        origin,
        ..r.meta.clone()
    };
    Ok(g)
}

/// Loads every referenced resource. Failures are collected; everything
/// loadable is still returned.
pub fn collect_resources(purpose: &Purpose, locator: &ResourceLocator) -> Catalog {
    let mut catalog = Catalog::default();
    for r in &purpose.dataset_refs {
        let path = locator.dataset_path(r);
        catalog.paths.insert(r.meta.id.clone(), path.clone());
        match load_dataset_schema(r, &path) {
            Ok(schema) => {
                catalog
                    .resources
                    .insert(r.meta.id.clone(), Resource::Dataset(schema));
            }
            Err(e) => catalog.errors.push(e),
        }
    }
    for r in &purpose.ontology_refs {
        let path = locator.ontology_path(r);
        catalog.paths.insert(r.meta.id.clone(), path.clone());
        match load_ontology(r, &path) {
            Ok(g) => {
                catalog
                    .resources
                    .insert(r.meta.id.clone(), Resource::Ontology(g));
            }
            Err(e) => catalog.errors.push(e),
        }
    }
    catalog.errors.sort_by(|a, b| a.resource.cmp(&b.resource));
    catalog
}
