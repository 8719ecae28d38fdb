//! Classical rating systems used as baselines and for top-tier selection.
//!
//! Teams are represented by their best member (see [`team_rating`]). Each
//! system exposes a pure update function on one match plus a small store that
//! applies those updates in replay order.

pub mod elo;
pub mod glicko;
pub mod trueskill;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use elo::{EloRatings, EloState};
pub use glicko::{GlickoRatings, GlickoState};
pub use trueskill::{TrueSkillRatings, TrueSkillState};

/// Update constants for the three systems. Only initial ratings are fixed by
/// the method; everything here is the systems' customary default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    pub elo_k: f64,
    pub glicko_q: f64,
    /// RD growth per idle rating period. The default brings RD 50 back to the
    /// 350 cap after 100 idle periods.
    pub glicko_c: f64,
    pub glicko_rd_cap: f64,
    pub trueskill_beta: f64,
    pub trueskill_tau: f64,
    pub draw_probability: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            elo_k: 32.0,
            glicko_q: std::f64::consts::LN_10 / 400.0,
            glicko_c: ((350.0f64 * 350.0 - 50.0 * 50.0) / 100.0).sqrt(),
            glicko_rd_cap: 350.0,
            trueskill_beta: 25.0 / 6.0,
            trueskill_tau: 25.0 / 300.0,
            draw_probability: 0.10,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [
            self.elo_k,
            self.glicko_q,
            self.glicko_c,
            self.glicko_rd_cap,
            self.trueskill_beta,
            self.trueskill_tau,
            self.draw_probability,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
        if !all_positive || self.draw_probability >= 1.0 {
            return Err(Error::InvalidInput(
                "rating system constants must be positive (draw probability below 1)".into(),
            ));
        }
        Ok(())
    }
}

/// A team is as strong as its best member.
pub fn team_rating(member_values: &[f64]) -> Result<f64> {
    member_values
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(Error::EmptyRoster)
}

/// Score of a team with rank `own` against one with rank `other`.
pub(crate) fn pairwise_score(own: u32, other: u32) -> f64 {
    match own.cmp(&other) {
        std::cmp::Ordering::Less => 1.0,
        std::cmp::Ordering::Equal => 0.5,
        std::cmp::Ordering::Greater => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn team_rating_is_max() {
        assert_eq!(team_rating(&[25.0, 30.0, 28.1]).unwrap(), 30.0);
        assert_eq!(team_rating(&[17.5]).unwrap(), 17.5);
        assert_eq!(team_rating(&[-0.5, -1.2]).unwrap(), -0.5);
        assert!(matches!(team_rating(&[]), Err(Error::EmptyRoster)));
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = SystemConfig::default();
        cfg.validate().unwrap();
        // RD 50 inflates back to the cap in 100 idle periods.
        let rd = (50.0f64.powi(2) + 100.0 * cfg.glicko_c.powi(2)).sqrt();
        assert!((rd - 350.0).abs() < 1e-9);
        let bad = SystemConfig {
            elo_k: 0.0,
            ..SystemConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
