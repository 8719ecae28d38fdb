//! Builds design matrices from a match log and fits the factor and weight
//! models.
//!
//! Factors are extracted from every player's final feature vector. Weights
//! are fitted on one row per player per match, holding the player's Z-scored
//! regression terms as they stood before that match, labeled with the team's
//! observed rank.

use std::collections::HashMap;

use super::artifacts::{ArtifactKind, FactorArtifact, FactorDiagnostics, WeightArtifact, WeightDiagnostics};
use super::log::MatchLog;
use crate::behavioral::{term_values, FactorModel};
use crate::error::{Error, Result};
use crate::eval::{Replay, ReplayConfig, SourceId};
use crate::features::{FeatureCatalog, FeatureVector, MatchContext, Normalization, PlayerProfile};
use crate::fit::{fit_factors, fit_with_cv, normalize_weights, DesignMatrix, Family, FitConfig};
use crate::model::{Mode, PlayerId};

/// One row per player with at least one game, in player id order.
pub fn factor_matrix(log: &MatchLog, catalog: &FeatureCatalog) -> Result<DesignMatrix> {
    let mut profiles: HashMap<&PlayerId, PlayerProfile> = HashMap::new();
    for m in &log.matches {
        let ranks = m.ranks();
        let winners = ranks.iter().filter(|&&r| r == 1).count();
        for (team, &rank) in m.teams.iter().zip(&ranks) {
            let ctx = MatchContext {
                rank,
                team_count: m.team_count() as u32,
                won: rank == 1 && winners == 1,
                mode: m.mode,
            };
            for member in &team.members {
                profiles.entry(&member.player).or_default().update(&member.stats, ctx)?;
            }
        }
    }
    let mut ids: Vec<&&PlayerId> = profiles.keys().collect();
    ids.sort();
    let mut x = DesignMatrix::new(catalog.iter().map(|f| f.name().to_string()).collect());
    for (i, id) in ids.into_iter().enumerate() {
        let v = profiles[*id].derive_features(catalog);
        let row: Vec<f64> = catalog.iter().map(|f| v.values[&f]).collect();
        x.push_row(&row, i as u64, 0, 1);
    }
    Ok(x)
}

pub fn fit_factor_artifact(log: &MatchLog, catalog: &FeatureCatalog, cfg: &FitConfig) -> Result<FactorArtifact> {
    let x = factor_matrix(log, catalog)?;
    let fit = fit_factors(&x, &cfg.factors)?;
    let diagnostics = FactorDiagnostics {
        features: fit.features.iter().map(|f| f.name().to_string()).collect(),
        dropped: fit.dropped.iter().map(|f| f.name().to_string()).collect(),
        eigenvalues: fit.eigenvalues.clone(),
        rows: x.n_rows(),
    };
    Ok(FactorArtifact::new(ArtifactKind::FactorModel, log.schema, fit.model, Some(diagnostics)))
}

/// Pre-match regression terms of every player in every match. Drawn
/// head-to-head matches carry no winner and are left out.
pub fn weight_matrix(
    log: &MatchLog,
    catalog: &FeatureCatalog,
    factors: &FactorModel,
    replay: &ReplayConfig,
) -> Result<DesignMatrix> {
    let columns: Vec<String> = term_values(&FeatureVector::zeros(catalog, Normalization::Zscored), factors)?
        .into_keys()
        .collect();
    let mut x = DesignMatrix::new(columns);
    let mut state = Replay::new(replay.clone(), catalog.clone(), vec![SourceId::Naive], None)?;
    for (k, m) in log.matches.iter().enumerate() {
        if !(m.mode == Mode::HeadToHead && m.is_tied()) {
            for (ti, team) in m.teams.iter().enumerate() {
                for member in &team.members {
                    let terms = term_values(&state.zscored(&member.player)?, factors)?;
                    let row: Vec<f64> = terms.into_values().collect();
                    x.push_row(&row, k as u64, team.slot, m.rank_of(ti));
                }
            }
        }
        state.update(m)?;
    }
    Ok(x)
}

pub fn fit_weight_artifact(
    log: &MatchLog,
    catalog: &FeatureCatalog,
    factors: &FactorModel,
    replay: &ReplayConfig,
    cfg: &FitConfig,
) -> Result<WeightArtifact> {
    let mode = log
        .matches
        .first()
        .map(|m| m.mode)
        .ok_or_else(|| Error::InvalidInput("cannot fit weights on an empty log".into()))?;
    let x = weight_matrix(log, catalog, factors, replay)?;
    let family = match mode {
        Mode::HeadToHead => Family::Binary,
        Mode::FreeForAll => Family::Ordinal,
    };
    let model = fit_with_cv(&x, family, cfg)?;
    let weights = normalize_weights(&model)?;
    let diagnostics = WeightDiagnostics {
        columns: model.columns.clone(),
        rows: x.n_rows(),
        fit: model.diagnostics.clone(),
    };
    Ok(WeightArtifact::new(ArtifactKind::WeightModel, log.schema, weights, Some(diagnostics)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::schema::SchemaName;
    use crate::pipeline::synth::{synth, SynthConfig};

    fn log() -> MatchLog {
        synth(&SynthConfig {
            players: 60,
            matches: 600,
            seed: 11,
            ..SynthConfig::default()
        })
        .unwrap()
        .log
    }

    #[test]
    fn factor_rows_are_players() {
        let log = log();
        let catalog = SchemaName::Synthetic.schema().catalog();
        let x = factor_matrix(&log, &catalog).unwrap();
        assert_eq!(x.n_rows(), 60);
        assert_eq!(x.n_cols(), catalog.len());
    }

    #[test]
    fn weight_rows_precede_each_match() {
        let log = log();
        let catalog = SchemaName::Synthetic.schema().catalog();
        let factors = FactorModel::empty(crate::behavioral::Provenance::Fitted);
        let x = weight_matrix(&log, &catalog, &factors, &ReplayConfig::default()).unwrap();
        assert_eq!(x.n_rows(), 2 * log.matches.len());
        // Nobody has played before the first match.
        assert!(x.row(0).iter().chain(x.row(1)).all(|v| *v == 0.0));
    }

    #[test]
    fn fitted_weights_favor_skill_terms() {
        let log = log();
        let catalog = SchemaName::Synthetic.schema().catalog();
        let cfg = FitConfig::default();
        let factors = fit_factor_artifact(&log, &catalog, &cfg).unwrap().model;
        let w = fit_weight_artifact(&log, &catalog, &factors, &ReplayConfig::default(), &cfg).unwrap();
        assert!((w.model.abs_sum() - 1.0).abs() < 1e-9);
        assert!(w.diagnostics.unwrap().fit.cv_score.unwrap() > 0.55);
    }
}
