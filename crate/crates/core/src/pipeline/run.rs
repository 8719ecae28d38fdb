//! End-to-end run: resolve models (fixture, artifacts or fit), replay the log
//! and assemble the report. Errors carry the stage they came from.

use std::path::Path;

use super::artifacts::{fixture, load_models, FactorArtifact, ModelArtifacts, WeightArtifact};
use super::config::{ModelSource, RunConfig};
use super::fitting::{fit_factor_artifact, fit_weight_artifact};
use super::ingest::player_count;
use super::log::MatchLog;
use super::report::{Report, REPORT_FORMAT, REPORT_VERSION};
use crate::error::{Error, Result, StageExt};
use crate::eval::{evaluate, SourceId};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    /// Models fitted during the run, to be saved next to the report.
    pub fitted: Option<(FactorArtifact, WeightArtifact)>,
}

pub fn run(config: &RunConfig, log: &MatchLog, artifacts: Option<&Path>) -> Result<RunOutput> {
    config.validate().stage("config")?;
    if log.schema != config.schema {
        return Err(Error::InvalidInput(format!(
            "config is for {} but the log holds {}",
            config.schema, log.schema
        ))
        .in_stage("config"));
    }
    let catalog = config.schema.schema().catalog();
    let needs_models = config.sources.contains(&SourceId::Weighted);

    let mut fitted = None;
    let models: Option<ModelArtifacts> = if !needs_models {
        None
    } else {
        match config.models {
            ModelSource::Fixture => Some(fixture(config.schema).stage("models")?),
            ModelSource::Artifacts => {
                let dir = artifacts
                    .ok_or_else(|| Error::InvalidInput("no artifact directory given".into()))
                    .stage("models")?;
                Some(load_models(dir).stage("models")?)
            }
            ModelSource::Fit => {
                let factors = fit_factor_artifact(log, &catalog, &config.fit).stage("fit factors")?;
                let weights = fit_weight_artifact(log, &catalog, &factors.model, &config.replay(), &config.fit)
                    .stage("fit weights")?;
                let models = ModelArtifacts {
                    factors: factors.model.clone(),
                    weights: weights.model.clone(),
                };
                fitted = Some((factors, weights));
                Some(models)
            }
        }
    };
    let model_provenance = models.as_ref().map(|m| m.weights.provenance);

    let setups = evaluate(
        &log.matches,
        &config.replay(),
        &catalog,
        &config.sources,
        models.map(Into::into),
        &config.setups,
    )
    .stage("replay")?;

    Ok(RunOutput {
        report: Report {
            format: REPORT_FORMAT.into(),
            version: REPORT_VERSION,
            config_hash: config.hash(),
            config: config.clone(),
            schema: config.schema,
            matches: log.matches.len(),
            players: player_count(log),
            models: config.models,
            model_provenance,
            setups,
        },
        fitted,
    })
}
