//! Grouped k-fold cross-validation.
//!
//! Whole matches (row groups) are shuffled with a fixed seed and cut into `k`
//! contiguous folds, so the sides of one match never straddle train and test.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::logit::{fit_binary, fit_ordinal};
use super::{DesignMatrix, FitConfig, ModelKind, RegressionModel, SolverConfig};
use crate::error::{Error, Result};
use crate::eval::metrics::ndcg_from_order;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Binary,
    Ordinal,
}

/// Fold index for every row.
pub fn fold_assignment(groups: &[u64], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || groups.len() < k {
        return Err(Error::InvalidInput(format!(
            "{} rows cannot be split into {k} folds",
            groups.len()
        )));
    }
    let mut distinct: Vec<u64> = groups.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < k {
        return Err(Error::InvalidInput(format!(
            "{} matches cannot be split into {k} folds",
            distinct.len()
        )));
    }
    distinct.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = distinct.len();
    let fold_of: BTreeMap<u64, usize> = distinct
        .iter()
        .enumerate()
        .map(|(pos, g)| (*g, pos * k / n))
        .collect();
    Ok(groups.iter().map(|g| fold_of[g]).collect())
}

fn fit(x: &DesignMatrix, family: Family, lambda: f64, solver: &SolverConfig) -> Result<RegressionModel> {
    match family {
        Family::Binary => fit_binary(x, lambda, solver),
        Family::Ordinal => fit_ordinal(x, lambda, solver),
    }
}

/// Accuracy of the win/loss call (binary models) or mean NDCG of the team
/// ordering per match (ordinal models) on `test`.
pub fn score(model: &RegressionModel, test: &DesignMatrix) -> f64 {
    match model.kind {
        ModelKind::Binary => {
            let correct = (0..test.n_rows())
                .filter(|&i| {
                    let predicted = model.intercepts[0] + model.linear_predictor(test.row(i)) > 0.0;
                    predicted == (test.ranks[i] == 1)
                })
                .count();
            correct as f64 / test.n_rows().max(1) as f64
        }
        ModelKind::Ordinal => mean_group_ndcg(model, test),
    }
}

fn mean_group_ndcg(model: &RegressionModel, test: &DesignMatrix) -> f64 {
    // group -> team -> (best member score, observed rank)
    let mut by_group: BTreeMap<u64, BTreeMap<u32, (f64, u32)>> = BTreeMap::new();
    for i in 0..test.n_rows() {
        let s = model.linear_predictor(test.row(i));
        let entry = by_group
            .entry(test.groups[i])
            .or_default()
            .entry(test.teams[i])
            .or_insert((f64::NEG_INFINITY, test.ranks[i]));
        entry.0 = entry.0.max(s);
    }
    let scores: Vec<f64> = by_group
        .values()
        .filter(|teams| teams.len() >= 2)
        .map(|teams| {
            let teams: Vec<(f64, u32)> = teams.values().copied().collect();
            let mut order: Vec<usize> = (0..teams.len()).collect();
            order.sort_by(|&a, &b| teams[b].0.total_cmp(&teams[a].0));
            let observed: Vec<u32> = teams.iter().map(|t| t.1).collect();
            ndcg_from_order(&order, &observed)
        })
        .collect();
    if scores.is_empty() {
        0.0
    } else {
        scores.iter().sum::<f64>() / scores.len() as f64
    }
}

/// Mean held-out score over `k` folds at a fixed penalty.
pub fn cross_validate(
    x: &DesignMatrix,
    family: Family,
    k: usize,
    lambda: f64,
    solver: &SolverConfig,
    seed: u64,
) -> Result<f64> {
    let folds = fold_assignment(&x.groups, k, seed)?;
    let scores = (0..k)
        .into_par_iter()
        .map(|f| {
            let train = x.subset(|i| folds[i] != f);
            let test = x.subset(|i| folds[i] == f);
            let model = fit(&train, family, lambda, solver)?;
            Ok(score(&model, &test))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(scores.iter().sum::<f64>() / k as f64)
}

/// Picks the penalty with the best CV score (ties go to the larger penalty)
/// and refits on all rows.
pub fn fit_with_cv(x: &DesignMatrix, family: Family, cfg: &FitConfig) -> Result<RegressionModel> {
    if cfg.lambda_grid.is_empty() || cfg.lambda_grid.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::InvalidInput("penalty grid must be nonempty and nonnegative".into()));
    }
    let scored = cfg
        .lambda_grid
        .par_iter()
        .map(|&lambda| Ok((lambda, cross_validate(x, family, cfg.folds, lambda, &cfg.solver, cfg.seed)?)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (lambda, cv) = scored
        .iter()
        .copied()
        .reduce(|best, cand| {
            if cand.1 > best.1 || (cand.1 == best.1 && cand.0 > best.0) {
                cand
            } else {
                best
            }
        })
        .expect("nonempty grid");
    log::info!("selected lambda {lambda} with cv score {cv:.4}");
    let mut model = fit(x, family, lambda, &cfg.solver)?;
    model.diagnostics.cv_score = Some(cv);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::logit::tests::{binary_data, ordinal_data};

    #[test]
    fn folds_are_balanced_and_grouped() {
        let groups: Vec<u64> = (0..100).map(|i| i / 2).collect();
        let folds = fold_assignment(&groups, 5, 1).unwrap();
        for pair in folds.chunks(2) {
            assert_eq!(pair[0], pair[1]);
        }
        for f in 0..5 {
            assert_eq!(folds.iter().filter(|&&x| x == f).count(), 20);
        }
        assert_eq!(folds, fold_assignment(&groups, 5, 1).unwrap());
        assert_ne!(folds, fold_assignment(&groups, 5, 2).unwrap());
    }

    #[test]
    fn too_few_rows_is_an_error() {
        assert!(fold_assignment(&[0, 1, 2], 5, 0).is_err());
        assert!(fold_assignment(&[0, 0, 0, 0, 0, 1], 5, 0).is_err());
    }

    #[test]
    fn separable_data_scores_perfectly() {
        let mut m = DesignMatrix::new(vec!["x".into()]);
        for i in 0..100 {
            let x = if i % 2 == 0 { 1.0 + i as f64 / 100.0 } else { -1.0 - i as f64 / 100.0 };
            m.push_row(&[x], i, 0, if x > 0.0 { 1 } else { 2 });
        }
        let acc = cross_validate(&m, Family::Binary, 5, 0.01, &SolverConfig::default(), 3).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn shuffled_labels_score_near_chance() {
        use rand::seq::SliceRandom;
        let mut m = binary_data(2000, &[1.5, -1.0], 4);
        let mut labels: Vec<u32> = (0..m.n_rows()).map(|i| if i % 2 == 0 { 1 } else { 2 }).collect();
        labels.shuffle(&mut ChaCha8Rng::seed_from_u64(99));
        m.ranks = labels;
        let acc = cross_validate(&m, Family::Binary, 5, 0.001, &SolverConfig::default(), 3).unwrap();
        assert!((acc - 0.5).abs() <= 0.05, "{acc}");
    }

    #[test]
    fn ordinal_cv_uses_ndcg() {
        let m = ordinal_data(800, 3, 4, 1.5, 8);
        let good = cross_validate(&m, Family::Ordinal, 5, 0.001, &SolverConfig::default(), 1).unwrap();
        assert!(good > 0.9 && good <= 1.0, "{good}");
    }

    #[test]
    fn grid_selection_records_cv_score() {
        let m = binary_data(500, &[2.0, 0.0, 0.0], 6);
        let model = fit_with_cv(&m, Family::Binary, &FitConfig::default()).unwrap();
        let cv = model.diagnostics.cv_score.unwrap();
        assert!(cv > 0.7);
        assert!(FitConfig::default().lambda_grid.contains(&model.diagnostics.lambda));
        assert!(model.weights[0] > 0.5);
    }
}
