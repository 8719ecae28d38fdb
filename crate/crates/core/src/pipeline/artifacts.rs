//! Factor and weight models on disk, and the shipped fixture tables.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::schema::SchemaName;
use crate::behavioral::{FactorModel, WeightModel};
use crate::error::{Error, Result};
use crate::eval::BehavioralModels;
use crate::fit::FitDiagnostics;

pub const ARTIFACT_VERSION: u32 = 1;
pub const FACTORS_FILE: &str = "factors.json";
pub const WEIGHTS_FILE: &str = "weights.json";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifacts {
    pub factors: FactorModel,
    pub weights: WeightModel,
}

impl From<ModelArtifacts> for BehavioralModels {
    fn from(a: ModelArtifacts) -> Self {
        BehavioralModels {
            factors: a.factors,
            weights: a.weights,
        }
    }
}

#[derive(Deserialize)]
struct FixtureFile {
    schema_version: u32,
    factors: FactorModel,
    weights: WeightModel,
}

/// The published factor and weight tables for a dataset.
pub fn fixture(schema: SchemaName) -> Result<ModelArtifacts> {
    let text = match schema {
        SchemaName::HaloSlayer => include_str!("../../fixtures/halo_slayer.json"),
        SchemaName::HaloCtf => include_str!("../../fixtures/halo_ctf.json"),
        SchemaName::Csgo => include_str!("../../fixtures/csgo.json"),
        SchemaName::PubgDuo => include_str!("../../fixtures/pubg_duo.json"),
        SchemaName::Synthetic => {
            return Err(Error::InvalidInput("no fixture tables exist for synthetic data".into()))
        }
    };
    let file: FixtureFile = serde_json::from_str(text)?;
    if file.schema_version != ARTIFACT_VERSION {
        return Err(Error::SchemaVersion(format!("fixture version {}", file.schema_version)));
    }
    file.factors.validate()?;
    file.weights.validate()?;
    Ok(ModelArtifacts {
        factors: file.factors,
        weights: file.weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    FactorModel,
    WeightModel,
}

/// Factor-fit details kept next to the model for inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorDiagnostics {
    pub features: Vec<String>,
    pub dropped: Vec<String>,
    pub eigenvalues: Vec<f64>,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDiagnostics {
    pub columns: Vec<String>,
    pub rows: usize,
    pub fit: FitDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<M, D> {
    pub schema_version: u32,
    pub kind: ArtifactKind,
    pub dataset: SchemaName,
    pub model: M,
    pub diagnostics: Option<D>,
}

pub type FactorArtifact = Artifact<FactorModel, FactorDiagnostics>;
pub type WeightArtifact = Artifact<WeightModel, WeightDiagnostics>;

impl<M, D> Artifact<M, D> {
    pub fn new(kind: ArtifactKind, dataset: SchemaName, model: M, diagnostics: Option<D>) -> Self {
        Artifact {
            schema_version: ARTIFACT_VERSION,
            kind,
            dataset,
            model,
            diagnostics,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn read_artifact<M: DeserializeOwned, D: DeserializeOwned>(path: &Path, kind: ArtifactKind) -> Result<Artifact<M, D>> {
    let header: serde_json::Value = read_json(path)?;
    match header.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == ARTIFACT_VERSION as u64 => {}
        other => {
            return Err(Error::SchemaVersion(format!("{}: {other:?}", path.display())));
        }
    }
    let artifact: Artifact<M, D> = serde_json::from_value(header)?;
    if artifact.kind != kind {
        return Err(Error::InvalidInput(format!(
            "{} holds a {:?}, expected {kind:?}",
            path.display(),
            artifact.kind
        )));
    }
    Ok(artifact)
}

pub fn read_factors(path: &Path) -> Result<FactorArtifact> {
    let a: FactorArtifact = read_artifact(path, ArtifactKind::FactorModel)?;
    a.model.validate()?;
    Ok(a)
}

pub fn read_weights(path: &Path) -> Result<WeightArtifact> {
    let a: WeightArtifact = read_artifact(path, ArtifactKind::WeightModel)?;
    a.model.validate()?;
    Ok(a)
}

pub fn factors_path(dir: &Path) -> PathBuf {
    dir.join(FACTORS_FILE)
}

pub fn weights_path(dir: &Path) -> PathBuf {
    dir.join(WEIGHTS_FILE)
}

/// Loads both models from an artifact directory.
pub fn load_models(dir: &Path) -> Result<ModelArtifacts> {
    Ok(ModelArtifacts {
        factors: read_factors(&factors_path(dir))?.model,
        weights: read_weights(&weights_path(dir))?.model,
    })
}
