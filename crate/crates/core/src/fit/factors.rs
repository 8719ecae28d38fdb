//! Factor extraction: principal components of the feature correlation
//! matrix, Kaiser retention, direct-oblimin rotation by gradient projection,
//! then assignment of each feature to the factor carrying its largest
//! absolute loading (when that loading clears the threshold).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::DesignMatrix;
use crate::behavioral::{Factor, FactorModel, Provenance};
use crate::error::{Error, Result};
use crate::features::FeatureId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FactorConfig {
    /// Fixed number of factors instead of the eigenvalue > 1 rule.
    pub count: Option<usize>,
    pub loading_threshold: f64,
    pub oblimin_gamma: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            count: None,
            loading_threshold: 0.4,
            oblimin_gamma: 0.0,
            max_iter: 1000,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FactorFit {
    pub model: FactorModel,
    /// Features that entered the analysis, in matrix column order.
    pub features: Vec<FeatureId>,
    /// Constant columns left out of the correlation matrix.
    pub dropped: Vec<FeatureId>,
    /// Correlation-matrix eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Principal-component loadings of the retained factors (features × factors).
    pub unrotated: DMatrix<f64>,
    /// Rotated pattern loadings (features × factors).
    pub pattern: DMatrix<f64>,
    /// Correlations among the rotated factors.
    pub factor_correlation: DMatrix<f64>,
}

impl FactorFit {
    /// Per-feature variance explained by the retained factors, before rotation.
    pub fn communalities_unrotated(&self) -> Vec<f64> {
        let a = &self.unrotated;
        (0..a.nrows()).map(|i| a.row(i).iter().map(|v| v * v).sum()).collect()
    }

    /// Same quantity after rotation: `diag(L Phi L')`.
    pub fn communalities_rotated(&self) -> Vec<f64> {
        let h = &self.pattern * &self.factor_correlation * self.pattern.transpose();
        (0..h.nrows()).map(|i| h[(i, i)]).collect()
    }
}

fn correlation(columns: &[Vec<f64>]) -> DMatrix<f64> {
    let n = columns[0].len() as f64;
    let standardized: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n;
            let sd = (c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            c.iter().map(|v| (v - mean) / sd).collect()
        })
        .collect();
    let p = columns.len();
    DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            let r = standardized[i].iter().zip(&standardized[j]).map(|(a, b)| a * b).sum::<f64>() / n;
            r.clamp(-1.0, 1.0)
        }
    })
}

/// Oblimin criterion value and its gradient with respect to the loadings.
fn oblimin(l: &DMatrix<f64>, gamma: f64) -> (f64, DMatrix<f64>) {
    let (p, k) = l.shape();
    let l2 = l.component_mul(l);
    let off_diag = DMatrix::from_fn(k, k, |i, j| if i == j { 0.0 } else { 1.0 });
    let x = if gamma == 0.0 {
        &l2 * &off_diag
    } else {
        let centering = DMatrix::identity(p, p) - DMatrix::from_element(p, p, gamma / p as f64);
        centering * &l2 * &off_diag
    };
    let f = l2.component_mul(&x).sum() / 4.0;
    (f, l.component_mul(&x))
}

/// Gradient-projection oblique rotation. Returns rotated loadings and the
/// rotation matrix `T` (unit-length columns), with `L = A (T')^-1`.
fn rotate_oblimin(a: &DMatrix<f64>, cfg: &FactorConfig) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let k = a.ncols();
    let inv = |t: &DMatrix<f64>| {
        t.clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularCorrelation("rotation matrix became singular".into()))
    };
    let mut t = DMatrix::<f64>::identity(k, k);
    let mut l = a.clone();
    let (mut f, gq) = oblimin(&l, cfg.oblimin_gamma);
    let mut g = -(l.transpose() * gq * inv(&t)?).transpose();
    let mut step = 1.0;

    for _ in 0..cfg.max_iter {
        let tg = t.component_mul(&g);
        let col_sums = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            k,
            (0..k).map(|j| tg.column(j).sum()),
        ));
        let gp = &g - &t * col_sums;
        let s = gp.norm();
        if s < cfg.tol {
            return Ok((l, t));
        }
        step *= 2.0;
        let mut accepted = None;
        for _ in 0..=10 {
            let x = &t - step * &gp;
            let mut tt = x.clone();
            for j in 0..k {
                let norm = x.column(j).norm();
                tt.column_mut(j).scale_mut(1.0 / norm);
            }
            let lt = a * inv(&tt)?.transpose();
            let (ft, gqt) = oblimin(&lt, cfg.oblimin_gamma);
            let done = ft < f - 0.5 * s * s * step;
            accepted = Some((tt, lt, ft, gqt));
            if done {
                break;
            }
            step /= 2.0;
        }
        let (tt, lt, ft, gqt) = accepted.expect("at least one trial step");
        g = -(lt.transpose() * gqt * inv(&tt)?).transpose();
        t = tt;
        l = lt;
        f = ft;
    }
    Err(Error::NonConvergence {
        what: "oblimin rotation",
        iterations: cfg.max_iter,
    })
}

/// Fits a factor model on a features-only design matrix whose columns are
/// feature ids.
pub fn fit_factors(x: &DesignMatrix, cfg: &FactorConfig) -> Result<FactorFit> {
    x.validate()?;
    let all: Vec<FeatureId> = x
        .columns
        .iter()
        .map(|c| c.parse())
        .collect::<Result<_>>()?;

    let mut features = Vec::new();
    let mut dropped = Vec::new();
    let mut columns = Vec::new();
    for (j, f) in all.iter().enumerate() {
        let col = x.column(j);
        let first = col.first().copied().unwrap_or(0.0);
        if col.iter().all(|v| *v == first) {
            log::warn!("feature {f} is constant; left out of the factor analysis");
            dropped.push(*f);
        } else {
            features.push(*f);
            columns.push(col);
        }
    }
    let p = features.len();
    if p < 2 {
        return Err(Error::InvalidInput(format!("factor analysis needs at least 2 varying features, found {p}")));
    }
    if x.n_rows() <= p {
        return Err(Error::InvalidInput(format!(
            "factor analysis needs more rows ({}) than features ({p})",
            x.n_rows()
        )));
    }
    for i in 0..p {
        for j in i + 1..p {
            if columns[i] == columns[j] {
                return Err(Error::SingularCorrelation(format!(
                    "duplicate columns {} and {}",
                    features[i], features[j]
                )));
            }
        }
    }

    let corr = correlation(&columns);
    let eig = SymmetricEigen::new(corr);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let k = match cfg.count {
        Some(c) => c.clamp(1, p),
        None => eigenvalues.iter().filter(|&&e| e > 1.0).count().max(1),
    };
    let unrotated = DMatrix::from_fn(p, k, |i, j| {
        let col = order[j];
        eig.eigenvectors[(i, col)] * eigenvalues[j].max(0.0).sqrt()
    });

    let (pattern, factor_correlation) = if k == 1 {
        (unrotated.clone(), DMatrix::identity(1, 1))
    } else {
        let (l, t) = rotate_oblimin(&unrotated, cfg)?;
        let phi = t.transpose() * &t;
        (l, phi)
    };

    // Feature -> factor with the largest absolute loading, if above threshold.
    let mut members: BTreeMap<usize, Vec<(FeatureId, f64)>> = BTreeMap::new();
    for (i, f) in features.iter().enumerate() {
        let (best, loading) = (0..k)
            .map(|j| (j, pattern[(i, j)]))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("k >= 1");
        if loading.abs() >= cfg.loading_threshold {
            members.entry(best).or_default().push((*f, loading));
        }
    }

    let factors = members
        .into_values()
        .enumerate()
        .map(|(idx, loads)| {
            let signed_sum: f64 = loads.iter().map(|(_, l)| l).sum();
            let sign = if signed_sum < 0.0 { -1.0 } else { 1.0 };
            let total: f64 = loads.iter().map(|(_, l)| l.abs()).sum();
            Factor {
                name: format!("factor_{}", idx + 1),
                loadings: loads.into_iter().map(|(f, l)| (f, sign * l / total)).collect(),
            }
        })
        .collect();

    let model = FactorModel {
        provenance: Provenance::Fitted,
        loading_threshold: Some(cfg.loading_threshold),
        factors,
    };
    model.validate()?;
    Ok(FactorFit {
        model,
        features,
        dropped,
        eigenvalues,
        unrotated,
        pattern,
        factor_correlation,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Two latent blocks; columns 0..3 load on the first, 3..6 on the second.
    pub fn block_data(rows: usize, seed: u64) -> DesignMatrix {
        let features = [
            FeatureId::KdRatio,
            FeatureId::Accuracy,
            FeatureId::DamageDealt,
            FeatureId::Survival,
            FeatureId::WalkingDistance,
            FeatureId::RidingDistance,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DesignMatrix::new(features.iter().map(|f| f.name().to_string()).collect());
        for i in 0..rows {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let row: Vec<f64> = (0..6)
                .map(|j| {
                    let latent = if j < 3 { a } else { b };
                    let e: f64 = StandardNormal.sample(&mut rng);
                    0.8 * latent + 0.6 * e
                })
                .collect();
            m.push_row(&row, i as u64, 0, 1);
        }
        m
    }

    #[test]
    fn perfectly_correlated_pair_gives_one_even_factor() {
        let mut m = DesignMatrix::new(vec!["kd_ratio".into(), "accuracy".into()]);
        for i in 0..20 {
            let v = i as f64 * 0.37 - 2.0;
            m.push_row(&[v, 2.0 * v + 1.0], i, 0, 1);
        }
        let fit = fit_factors(&m, &FactorConfig::default()).unwrap();
        assert_eq!(fit.model.factors.len(), 1);
        let l = &fit.model.factors[0].loadings;
        assert!((l[&FeatureId::KdRatio] - 0.5).abs() < 1e-9);
        assert!((l[&FeatureId::Accuracy] - 0.5).abs() < 1e-9);
        assert!((fit.eigenvalues[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn recovers_two_blocks() {
        let fit = fit_factors(&block_data(2000, 1), &FactorConfig::default()).unwrap();
        assert_eq!(fit.model.factors.len(), 2);
        let sets: Vec<Vec<FeatureId>> = fit
            .model
            .factors
            .iter()
            .map(|f| f.loadings.keys().copied().collect())
            .collect();
        let block_a = vec![FeatureId::KdRatio, FeatureId::Accuracy, FeatureId::DamageDealt];
        let mut block_b = vec![FeatureId::Survival, FeatureId::WalkingDistance, FeatureId::RidingDistance];
        block_b.sort();
        let mut block_a_sorted = block_a.clone();
        block_a_sorted.sort();
        assert!(sets.contains(&block_a_sorted) && sets.contains(&block_b), "{sets:?}");
        for f in &fit.model.factors {
            assert!((f.abs_sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_preserves_communality() {
        let fit = fit_factors(&block_data(1000, 2), &FactorConfig::default()).unwrap();
        let before: f64 = fit.communalities_unrotated().iter().sum();
        let after: f64 = fit.communalities_rotated().iter().sum();
        assert!((before - after).abs() < 1e-6);
        for (a, b) in fit.communalities_unrotated().iter().zip(fit.communalities_rotated()) {
            assert!((a - b).abs() < 1e-6);
        }
        // Rotation actually happened: the factors are no longer orthogonal PCs.
        assert!(fit.factor_correlation[(0, 1)].abs() < 0.2);
        assert!((&fit.pattern - &fit.unrotated).norm() > 1e-3);
    }

    #[test]
    fn duplicate_and_unknown_columns_rejected() {
        let mut m = DesignMatrix::new(vec!["kd_ratio".into(), "accuracy".into(), "dbno".into()]);
        for i in 0..10 {
            let v = (i * i) as f64;
            m.push_row(&[v, v, i as f64], i, 0, 1);
        }
        assert!(matches!(fit_factors(&m, &FactorConfig::default()), Err(Error::SingularCorrelation(_))));

        let mut m = DesignMatrix::new(vec!["kd_ratio".into(), "bogus".into()]);
        m.push_row(&[1.0, 2.0], 0, 0, 1);
        assert!(fit_factors(&m, &FactorConfig::default()).is_err());
    }

    #[test]
    fn constant_columns_are_dropped() {
        let base = block_data(300, 3);
        let mut columns = base.columns.clone();
        columns.push("experience".into());
        let mut m = DesignMatrix::new(columns);
        for i in 0..base.n_rows() {
            let mut row = base.row(i).to_vec();
            row.push(5.0);
            m.push_row(&row, i as u64, 0, 1);
        }
        let fit = fit_factors(&m, &FactorConfig::default()).unwrap();
        assert_eq!(fit.dropped, vec![FeatureId::Experience]);
    }

    #[test]
    fn rotation_non_convergence_is_reported() {
        let cfg = FactorConfig {
            max_iter: 0,
            ..FactorConfig::default()
        };
        assert!(matches!(
            fit_factors(&block_data(500, 4), &cfg),
            Err(Error::NonConvergence { .. })
        ));
    }
}
