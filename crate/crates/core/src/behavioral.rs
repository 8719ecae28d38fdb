//! Behavioral ratings built from Z-scored feature vectors: single-factor
//! values, the unweighted (naive) hybrid, factor scores from loadings, and the
//! weighted hybrid.
//!
//! All of them are linear in the feature values, so a new player (all-zero
//! vector) is rated exactly 0 by every family.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureId, FeatureVector};

/// Allowed deviation of Σ|loading| or Σ|weight| from 1. The printed fixture
/// tables carry six decimals, so a few ulps of summation roundoff are added on
/// top of the 1e-6 band.
pub const SUM_TOLERANCE: f64 = 1e-6 + 8.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Fitted,
    PaperFixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub loadings: BTreeMap<FeatureId, f64>,
}

impl Factor {
    pub fn abs_sum(&self) -> f64 {
        self.loadings.values().map(|l| l.abs()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorModel {
    pub provenance: Provenance,
    /// Minimum absolute rotated loading for a feature to join a factor, when fitted.
    pub loading_threshold: Option<f64>,
    pub factors: Vec<Factor>,
}

impl FactorModel {
    pub fn empty(provenance: Provenance) -> Self {
        FactorModel {
            provenance,
            loading_threshold: None,
            factors: Vec::new(),
        }
    }

    pub fn factor(&self, name: &str) -> Option<&Factor> {
        self.factors.iter().find(|f| f.name == name)
    }

    /// Features that belong to some factor.
    pub fn absorbed(&self) -> BTreeSet<FeatureId> {
        self.factors
            .iter()
            .flat_map(|f| f.loadings.keys().copied())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        let mut names = BTreeSet::new();
        for factor in &self.factors {
            if factor.name.is_empty() || !names.insert(factor.name.as_str()) {
                return Err(Error::InvalidInput(format!("bad or duplicate factor name `{}`", factor.name)));
            }
            if FeatureId::ALL.iter().any(|f| f.name() == factor.name) {
                return Err(Error::InvalidInput(format!("factor name `{}` shadows a feature", factor.name)));
            }
            if (factor.abs_sum() - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "factor `{}` loadings sum to {} in absolute value",
                    factor.name,
                    factor.abs_sum()
                )));
            }
            for f in factor.loadings.keys() {
                if !seen.insert(*f) {
                    return Err(Error::InvalidInput(format!("feature {f} appears in more than one factor")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightModel {
    pub provenance: Provenance,
    /// Term id (factor name or feature id) to normalized signed weight.
    pub weights: BTreeMap<String, f64>,
}

impl WeightModel {
    pub fn abs_sum(&self) -> f64 {
        self.weights.values().map(|w| w.abs()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() || (self.abs_sum() - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "weights sum to {} in absolute value",
                self.abs_sum()
            )));
        }
        Ok(())
    }
}

/// A single feature used directly as a rating.
pub fn single_factor(vector: &FeatureVector, feature: FeatureId) -> Result<f64> {
    vector
        .get(feature)
        .ok_or_else(|| Error::UnknownFeature(feature.to_string()))
}

/// Unweighted sum of every present feature.
pub fn naive_hybrid(vector: &FeatureVector) -> f64 {
    vector.values.values().sum()
}

pub fn factor_score(vector: &FeatureVector, model: &FactorModel, name: &str) -> Result<f64> {
    let factor = model.factor(name).ok_or_else(|| Error::MissingTerm {
        kind: "factor",
        id: name.to_string(),
    })?;
    factor
        .loadings
        .iter()
        .map(|(&f, &l)| {
            vector.get(f).map(|v| l * v).ok_or_else(|| Error::MissingTerm {
                kind: "feature",
                id: f.to_string(),
            })
        })
        .sum()
}

/// Regression terms for one player: every factor score plus every present
/// feature that no factor absorbed.
pub fn term_values(vector: &FeatureVector, model: &FactorModel) -> Result<BTreeMap<String, f64>> {
    let absorbed = model.absorbed();
    let mut terms = BTreeMap::new();
    for factor in &model.factors {
        terms.insert(factor.name.clone(), factor_score(vector, model, &factor.name)?);
    }
    for (&f, &v) in &vector.values {
        if !absorbed.contains(&f) {
            terms.insert(f.name().to_string(), v);
        }
    }
    Ok(terms)
}

pub fn weighted_hybrid(terms: &BTreeMap<String, f64>, model: &WeightModel) -> Result<f64> {
    model
        .weights
        .iter()
        .map(|(id, w)| {
            terms.get(id).map(|t| w * t).ok_or_else(|| Error::MissingTerm {
                kind: "term",
                id: id.clone(),
            })
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Normalization;
    use crate::pipeline::artifacts::fixture;
    use crate::pipeline::schema::SchemaName;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn vector(pairs: &[(FeatureId, f64)]) -> FeatureVector {
        FeatureVector {
            values: pairs.iter().copied().collect(),
            normalization: Normalization::Zscored,
        }
    }

    fn terms(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn single_factor_projection() {
        let v = vector(&[(FeatureId::KdRatio, 1.3), (FeatureId::Dbno, 0.0)]);
        assert_eq!(single_factor(&v, FeatureId::KdRatio).unwrap(), 1.3);
        assert_eq!(single_factor(&v, FeatureId::Dbno).unwrap(), 0.0);
        assert!(matches!(single_factor(&v, FeatureId::Steal), Err(Error::UnknownFeature(_))));
    }

    #[test]
    fn naive_hybrid_sums() {
        assert_eq!(naive_hybrid(&vector(&[(FeatureId::KdRatio, 0.0), (FeatureId::Steal, 0.0)])), 0.0);
        let v = vector(&[(FeatureId::KdRatio, 0.5), (FeatureId::Steal, -0.2), (FeatureId::Dbno, 0.1)]);
        assert_abs_diff_eq!(naive_hybrid(&v), 0.4, epsilon = 1e-15);
        assert_eq!(naive_hybrid(&vector(&[(FeatureId::Suicide, -2.5)])), -2.5);
    }

    #[test]
    fn csgo_support_score() {
        let arts = fixture(SchemaName::Csgo).unwrap();
        let v = vector(&[(FeatureId::KillAssist, 1.0), (FeatureId::FlashAssist, 0.0)]);
        assert_eq!(factor_score(&v, &arts.factors, "support").unwrap(), 0.669590);
        let zero = vector(&[(FeatureId::KillAssist, 0.0), (FeatureId::FlashAssist, 0.0)]);
        assert_eq!(factor_score(&zero, &arts.factors, "support").unwrap(), 0.0);
        assert!(factor_score(&zero, &arts.factors, "skill").is_err());
        assert!(factor_score(&zero, &arts.factors, "nope").is_err());
    }

    #[test]
    fn halo_slayer_skill_of_ones() {
        let arts = fixture(SchemaName::HaloSlayer).unwrap();
        let skill = arts.factors.factor("skill").unwrap();
        let v = vector(&skill.loadings.keys().map(|&f| (f, 1.0)).collect::<Vec<_>>());
        // Table loadings: 0.200283 + 0.188712 + 0.178849 + 0.171211 + 0.099063 + 0.082214 + 0.079668
        assert_abs_diff_eq!(factor_score(&v, &arts.factors, "skill").unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn weighted_hybrid_examples() {
        let cs = fixture(SchemaName::Csgo).unwrap().weights;
        let t = terms(&[("skill", 1.0), ("experience", 0.5), ("support", 0.2)]);
        let expected = 0.552309 + 0.276699 * 0.5 + 0.170992 * 0.2;
        assert_abs_diff_eq!(weighted_hybrid(&t, &cs).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(weighted_hybrid(&t, &cs).unwrap(), 0.724857, epsilon = 1e-6);

        let zero = terms(&[("skill", 0.0), ("experience", 0.0), ("support", 0.0)]);
        assert_eq!(weighted_hybrid(&zero, &cs).unwrap(), 0.0);

        let halo = fixture(SchemaName::HaloSlayer).unwrap().weights;
        let t = terms(&[
            ("skill", 0.0),
            ("experience", 0.0),
            ("kill_assist", 0.0),
            ("betrayal", 1.0),
            ("suicide", 0.0),
        ]);
        assert_eq!(weighted_hybrid(&t, &halo).unwrap(), -0.065018);
        assert!(matches!(
            weighted_hybrid(&terms(&[("skill", 1.0)]), &halo),
            Err(Error::MissingTerm { .. })
        ));
    }

    #[test]
    fn term_values_keep_unabsorbed_features() {
        let arts = fixture(SchemaName::HaloSlayer).unwrap();
        let mut pairs: Vec<(FeatureId, f64)> = arts.factors.absorbed().into_iter().map(|f| (f, 0.5)).collect();
        pairs.extend([
            (FeatureId::Experience, 2.0),
            (FeatureId::KillAssist, 1.0),
            (FeatureId::Betrayal, 0.0),
            (FeatureId::Suicide, 0.0),
        ]);
        let t = term_values(&vector(&pairs), &arts.factors).unwrap();
        assert_eq!(t.len(), 5);
        assert_abs_diff_eq!(t["skill"], 0.5, epsilon = 1e-9);
        assert_eq!(t["experience"], 2.0);
        let omega = weighted_hybrid(&t, &arts.weights).unwrap();
        assert_abs_diff_eq!(omega, 0.330654 * 0.5 + 0.320160 * 2.0 + 0.249425, epsilon = 1e-9);
    }

    #[test]
    fn model_validation() {
        let mut m = fixture(SchemaName::Csgo).unwrap().factors;
        m.validate().unwrap();
        m.factors[1].loadings.insert(FeatureId::KdRatio, 0.0);
        assert!(m.validate().is_err());

        let w = WeightModel {
            provenance: Provenance::Fitted,
            weights: terms(&[("skill", 0.7)]),
        };
        assert!(w.validate().is_err());
    }

    fn arb_terms() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5f64..5.0, 3)
    }

    proptest! {
        #[test]
        fn ratings_are_linear(x in arb_terms(), y in arb_terms(), alpha in -3f64..3.0) {
            let ids = ["skill", "experience", "support"];
            let cs = fixture(SchemaName::Csgo).unwrap().weights;
            let mk = |v: &[f64]| ids.iter().zip(v).map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>();
            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let scaled: Vec<f64> = x.iter().map(|a| alpha * a).collect();
            let om = |v: &[f64]| weighted_hybrid(&mk(v), &cs).unwrap();
            prop_assert!((om(&sum) - om(&x) - om(&y)).abs() < 1e-9);
            prop_assert!((om(&scaled) - alpha * om(&x)).abs() < 1e-9);

            let fx = vector(&[(FeatureId::KillAssist, x[0]), (FeatureId::FlashAssist, x[1]), (FeatureId::Dbno, x[2])]);
            let fy = vector(&[(FeatureId::KillAssist, y[0]), (FeatureId::FlashAssist, y[1]), (FeatureId::Dbno, y[2])]);
            let fs = vector(&[(FeatureId::KillAssist, sum[0]), (FeatureId::FlashAssist, sum[1]), (FeatureId::Dbno, sum[2])]);
            prop_assert!((naive_hybrid(&fs) - naive_hybrid(&fx) - naive_hybrid(&fy)).abs() < 1e-9);
            let fm = fixture(SchemaName::Csgo).unwrap().factors;
            let s = |v: &FeatureVector| factor_score(v, &fm, "support").unwrap();
            prop_assert!((s(&fs) - s(&fx) - s(&fy)).abs() < 1e-9);
        }

        #[test]
        fn unit_weight_equals_single_factor(v in -10f64..10.0) {
            let w = WeightModel { provenance: Provenance::Fitted, weights: terms(&[("kd_ratio", 1.0)]) };
            let fv = vector(&[(FeatureId::KdRatio, v), (FeatureId::Dbno, 3.0)]);
            let t = term_values(&fv, &FactorModel::empty(Provenance::Fitted)).unwrap();
            prop_assert_eq!(weighted_hybrid(&t, &w).unwrap(), single_factor(&fv, FeatureId::KdRatio).unwrap());
        }
    }
}
