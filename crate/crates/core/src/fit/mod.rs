//! Fitting the statistical models behind the behavioral ratings.
//!
//! - [`factors`]: PCA extraction on the feature correlation matrix with
//!   direct-oblimin rotation, producing a [`FactorModel`](crate::behavioral::FactorModel).
//! - [`logit`]: L1-penalized binary and proportional-odds ordinal logistic
//!   regression, solved by proximal gradient descent.
//! - [`cv`]: grouped k-fold cross-validation and penalty selection.

pub mod cv;
pub mod factors;
pub mod logit;
pub mod prox;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::behavioral::{Provenance, WeightModel};
use crate::error::{Error, Result};

pub use cv::{cross_validate, fit_with_cv, Family};
pub use factors::{fit_factors, FactorConfig, FactorFit};
pub use logit::{fit_binary_logit, fit_ordinal_logit};

/// Observations by columns, row-major. Each row also carries the match it
/// came from (`group`, the cross-validation unit), the team slot and that
/// team's observed rank.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub columns: Vec<String>,
    pub values: Vec<f64>,
    pub groups: Vec<u64>,
    pub teams: Vec<u32>,
    pub ranks: Vec<u32>,
}

impl DesignMatrix {
    pub fn new(columns: Vec<String>) -> Self {
        DesignMatrix {
            columns,
            values: Vec::new(),
            groups: Vec::new(),
            teams: Vec::new(),
            ranks: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: &[f64], group: u64, team: u32, rank: u32) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.values.extend_from_slice(row);
        self.groups.push(group);
        self.teams.push(team);
        self.ranks.push(rank);
    }

    pub fn n_rows(&self) -> usize {
        self.groups.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.row(i)[j]).collect()
    }

    /// Rows whose index satisfies `keep`, in order.
    pub fn subset(&self, keep: impl Fn(usize) -> bool) -> DesignMatrix {
        let mut out = DesignMatrix::new(self.columns.clone());
        for i in (0..self.n_rows()).filter(|&i| keep(i)) {
            out.push_row(self.row(i), self.groups[i], self.teams[i], self.ranks[i]);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c) {
                return Err(Error::InvalidInput(format!("duplicate column `{c}`")));
            }
        }
        if self.values.len() != self.n_rows() * self.n_cols() {
            return Err(Error::InvalidInput("ragged design matrix".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite design matrix cell".into()));
        }
        Ok(())
    }

    /// 1.0 where the row's team won (rank 1), else 0.0.
    pub fn binary_target(&self) -> Vec<f64> {
        self.ranks.iter().map(|&r| if r == 1 { 1.0 } else { 0.0 }).collect()
    }

    /// Ordinal levels with higher = better finish: the best observed rank maps
    /// to the top level.
    pub fn ordinal_target(&self) -> (Vec<usize>, usize) {
        let mut distinct: Vec<u32> = self.ranks.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let k = distinct.len();
        let levels = self
            .ranks
            .iter()
            .map(|r| k - 1 - distinct.binary_search(r).expect("present"))
            .collect();
        (levels, k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Stop when the proximal gradient-mapping norm falls below this.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 10_000,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub lambda_grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub factors: FactorConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lambda_grid: vec![0.001, 0.01, 0.1, 1.0],
            folds: 5,
            seed: 7,
            solver: SolverConfig::default(),
            factors: FactorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub log_likelihood: f64,
    pub iterations: usize,
    pub lambda: f64,
    pub cv_score: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Binary,
    Ordinal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub kind: ModelKind,
    pub columns: Vec<String>,
    /// One weight per column; L1 leaves irrelevant columns at exactly zero.
    pub weights: Vec<f64>,
    /// Single intercept (binary) or strictly increasing cutpoints (ordinal).
    pub intercepts: Vec<f64>,
    pub diagnostics: FitDiagnostics,
}

impl RegressionModel {
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        row.iter().zip(&self.weights).map(|(x, w)| x * w).sum()
    }

    /// Columns the penalty kept.
    pub fn selected(&self) -> BTreeMap<String, f64> {
        self.columns
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w != 0.0)
            .map(|(c, w)| (c.clone(), *w))
            .collect()
    }
}

/// Scales weights so their absolute values sum to one, keeping signs. The
/// intercept / cutpoints are not part of the result.
pub fn normalize_weights(model: &RegressionModel) -> Result<WeightModel> {
    let selected = model.selected();
    let total: f64 = selected.values().map(|w| w.abs()).sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::AllZeroWeights);
    }
    Ok(WeightModel {
        provenance: Provenance::Fitted,
        weights: selected.into_iter().map(|(c, w)| (c, w / total)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::artifacts::fixture;
    use crate::pipeline::schema::SchemaName;
    use proptest::prelude::*;

    fn model(weights: &[f64]) -> RegressionModel {
        RegressionModel {
            kind: ModelKind::Binary,
            columns: (0..weights.len()).map(|i| format!("c{i}")).collect(),
            weights: weights.to_vec(),
            intercepts: vec![0.3],
            diagnostics: FitDiagnostics {
                log_likelihood: 0.0,
                iterations: 0,
                lambda: 0.0,
                cv_score: None,
            },
        }
    }

    #[test]
    fn normalize_examples() {
        let w = normalize_weights(&model(&[2.0, -1.0, 1.0])).unwrap();
        assert_eq!(w.weights["c0"], 0.5);
        assert_eq!(w.weights["c1"], -0.25);
        assert_eq!(w.weights["c2"], 0.25);
        assert!(!w.weights.contains_key("intercept"));

        assert_eq!(normalize_weights(&model(&[-3.5])).unwrap().weights["c0"], -1.0);
        assert_eq!(normalize_weights(&model(&[0.0, 4.0])).unwrap().weights.len(), 1);
        assert!(matches!(normalize_weights(&model(&[0.0, 0.0])), Err(Error::AllZeroWeights)));
    }

    #[test]
    fn halo_slayer_table_sums_to_one() {
        let w = fixture(SchemaName::HaloSlayer).unwrap().weights;
        let s: f64 = [0.330654, 0.320160, 0.249425, 0.065018, 0.034743].iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!((w.abs_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ordinal_levels_put_winner_on_top() {
        let mut m = DesignMatrix::new(vec!["x".into()]);
        for (i, r) in [3u32, 1, 2, 1].into_iter().enumerate() {
            m.push_row(&[i as f64], 0, i as u32, r);
        }
        let (levels, k) = m.ordinal_target();
        assert_eq!(k, 3);
        assert_eq!(levels, vec![0, 2, 1, 2]);
        assert_eq!(m.binary_target(), vec![0.0, 1.0, 0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn normalized_abs_sum_is_one(ws in prop::collection::vec(-10f64..10.0, 1..12)) {
            prop_assume!(ws.iter().any(|w| *w != 0.0));
            let m = model(&ws);
            let n = normalize_weights(&m).unwrap();
            prop_assert!((n.abs_sum() - 1.0).abs() < 1e-9);
            for (c, w) in m.columns.iter().zip(&ws) {
                if *w != 0.0 {
                    prop_assert_eq!(n.weights[c].signum(), w.signum());
                }
            }
        }
    }
}
