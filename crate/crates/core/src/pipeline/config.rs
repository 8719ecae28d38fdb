use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::schema::SchemaName;
use super::synth::SynthConfig;
use crate::error::{Error, Result};
use crate::eval::{ReplayConfig, SetupSpec, SourceId, ZscoreMode};
use crate::fit::FitConfig;
use crate::ratings::SystemConfig;

/// Where the weighted hybrid's factor and weight models come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    /// The shipped tables for the dataset.
    #[default]
    Fixture,
    /// `factors.json` and `weights.json` in the artifact directory.
    Artifacts,
    /// Fitted on the log before the replay.
    Fit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: SchemaName,
    #[serde(default)]
    pub systems: SystemConfig,
    #[serde(default)]
    pub zscore: ZscoreMode,
    /// Seed of the tie-break streams.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "SetupSpec::standard")]
    pub setups: Vec<SetupSpec>,
    #[serde(default = "SourceId::standard")]
    pub sources: Vec<SourceId>,
    #[serde(default)]
    pub models: ModelSource,
    /// Penalty grid, folds and factor overrides for the fit stage.
    #[serde(default)]
    pub fit: FitConfig,
    /// Generator settings for `synth`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,
}

impl RunConfig {
    pub fn new(schema: SchemaName) -> Self {
        RunConfig {
            schema,
            systems: SystemConfig::default(),
            zscore: ZscoreMode::default(),
            seed: 0,
            setups: SetupSpec::standard(),
            sources: SourceId::standard(),
            models: ModelSource::default(),
            fit: FitConfig::default(),
            synth: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.systems.validate()?;
        for s in &self.setups {
            s.validate()?;
        }
        if self.sources.is_empty() {
            return Err(Error::InvalidInput("no rating sources requested".into()));
        }
        if let ZscoreMode::Snapshot { every: 0 } = self.zscore {
            return Err(Error::InvalidInput("snapshot interval must be positive".into()));
        }
        if let Some(s) = &self.synth {
            s.validate()?;
        }
        Ok(())
    }

    pub fn replay(&self) -> ReplayConfig {
        ReplayConfig {
            systems: self.systems.clone(),
            zscore: self.zscore,
            seed: self.seed,
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
