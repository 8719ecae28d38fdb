//! TrueSkill for teams.
//!
//! Team performance is the sum of member performances. Two-team matches use
//! the exact truncated-Gaussian update; matches with more teams are
//! approximated by applying the two-team update to every adjacent pair of the
//! rank-sorted team sequence, all from the same prior.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::SystemConfig;
use crate::model::{MatchRecord, PlayerId};

pub const SIGMA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueSkillState {
    pub mean: f64,
    pub sigma: f64,
}

impl Default for TrueSkillState {
    fn default() -> Self {
        TrueSkillState {
            mean: 25.0,
            sigma: 25.0 / 3.0,
        }
    }
}

impl TrueSkillState {
    /// Leaderboard scalar `mean - 3 sigma`.
    pub fn conservative(&self) -> f64 {
        self.mean - 3.0 * self.sigma
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

// Below this the CDF has no useful precision and the asymptotes take over.
const CDF_TINY: f64 = 2.222758749e-162;

fn v_win(t: f64, eps: f64) -> f64 {
    let n = std_normal();
    let x = t - eps;
    let denom = n.cdf(x);
    if denom > CDF_TINY {
        n.pdf(x) / denom
    } else {
        -x
    }
}

fn w_win(t: f64, eps: f64) -> f64 {
    let n = std_normal();
    let x = t - eps;
    let denom = n.cdf(x);
    if denom > CDF_TINY {
        let v = v_win(t, eps);
        v * (v + x)
    } else if x < 0.0 {
        1.0
    } else {
        0.0
    }
}

fn v_draw(t: f64, eps: f64) -> f64 {
    let n = std_normal();
    let abs = t.abs();
    let (a, b) = (eps - abs, -eps - abs);
    let denom = n.cdf(a) - n.cdf(b);
    let v = if denom > CDF_TINY {
        (n.pdf(b) - n.pdf(a)) / denom
    } else {
        a
    };
    if t < 0.0 {
        -v
    } else {
        v
    }
}

fn w_draw(t: f64, eps: f64) -> f64 {
    let n = std_normal();
    let abs = t.abs();
    let (a, b) = (eps - abs, -eps - abs);
    let denom = n.cdf(a) - n.cdf(b);
    if denom <= CDF_TINY {
        return 1.0;
    }
    let v = v_draw(abs, eps);
    v * v + (a * n.pdf(a) - b * n.pdf(b)) / denom
}

/// Draw margin for a pairing with `players` participants in total.
fn draw_margin(players: usize, cfg: &SystemConfig) -> f64 {
    std_normal().inverse_cdf((cfg.draw_probability + 1.0) / 2.0) * (players as f64).sqrt() * cfg.trueskill_beta
}

/// Updates teams given observed ranks (aligned with `teams`). Lower rank is
/// better; equal ranks are draws.
pub fn rate_teams(teams: &[Vec<TrueSkillState>], ranks: &[u32], cfg: &SystemConfig) -> Vec<Vec<TrueSkillState>> {
    // Dynamics: widen every prior by tau before the match.
    let priors: Vec<Vec<(f64, f64)>> = teams
        .iter()
        .map(|t| {
            t.iter()
                .map(|s| (s.mean, s.sigma * s.sigma + cfg.trueskill_tau * cfg.trueskill_tau))
                .collect()
        })
        .collect();
    let mut mean_delta: Vec<Vec<f64>> = priors.iter().map(|t| vec![0.0; t.len()]).collect();
    let mut var_factor: Vec<Vec<f64>> = priors.iter().map(|t| vec![1.0; t.len()]).collect();

    let mut order: Vec<usize> = (0..teams.len()).collect();
    order.sort_by_key(|&i| (ranks[i], i));

    for pair in order.windows(2) {
        let (hi, lo) = (pair[0], pair[1]);
        let drawn = ranks[hi] == ranks[lo];
        let mean = |i: usize| priors[i].iter().map(|m| m.0).sum::<f64>();
        let var = |i: usize| priors[i].iter().map(|m| m.1).sum::<f64>();
        let n = priors[hi].len() + priors[lo].len();
        let c2 = var(hi) + var(lo) + n as f64 * cfg.trueskill_beta.powi(2);
        let c = c2.sqrt();
        let t = (mean(hi) - mean(lo)) / c;
        let eps = draw_margin(n, cfg) / c;
        let (v, w) = if drawn {
            (v_draw(t, eps), w_draw(t, eps))
        } else {
            (v_win(t, eps), w_win(t, eps))
        };
        for (idx, sign) in [(hi, 1.0), (lo, -1.0)] {
            for (k, &(_, s2)) in priors[idx].iter().enumerate() {
                mean_delta[idx][k] += sign * s2 / c * v;
                var_factor[idx][k] *= 1.0 - s2 / c2 * w;
            }
        }
    }

    priors
        .iter()
        .enumerate()
        .map(|(i, team)| {
            team.iter()
                .enumerate()
                .map(|(k, &(mu, s2))| {
                    let mut sigma = (s2 * var_factor[i][k]).max(0.0).sqrt();
                    if !(sigma >= SIGMA_FLOOR) {
                        log::warn!("trueskill sigma underflow ({sigma:e}), clamped to {SIGMA_FLOOR:e}");
                        sigma = SIGMA_FLOOR;
                    }
                    TrueSkillState {
                        mean: mu + mean_delta[i][k],
                        sigma,
                    }
                })
                .collect()
        })
        .collect()
}

pub fn trueskill_update(
    record: &MatchRecord,
    states: &HashMap<PlayerId, TrueSkillState>,
    cfg: &SystemConfig,
) -> Vec<(PlayerId, TrueSkillState)> {
    let teams: Vec<Vec<TrueSkillState>> = record
        .teams
        .iter()
        .map(|t| {
            t.members
                .iter()
                .map(|m| states.get(&m.player).copied().unwrap_or_default())
                .collect()
        })
        .collect();
    let rated = rate_teams(&teams, &record.ranks(), cfg);
    record
        .teams
        .iter()
        .zip(rated)
        .flat_map(|(t, r)| t.members.iter().map(|m| m.player.clone()).zip(r))
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct TrueSkillRatings {
    pub cfg: SystemConfig,
    pub states: HashMap<PlayerId, TrueSkillState>,
}

impl TrueSkillRatings {
    pub fn new(cfg: SystemConfig) -> Self {
        TrueSkillRatings {
            cfg,
            states: HashMap::new(),
        }
    }

    pub fn state(&self, player: &PlayerId) -> TrueSkillState {
        self.states.get(player).copied().unwrap_or_default()
    }

    /// Ordering value: the conservative estimate.
    pub fn value(&self, player: &PlayerId) -> f64 {
        self.state(player).conservative()
    }

    pub fn apply(&mut self, record: &MatchRecord) {
        for (p, s) in trueskill_update(record, &self.states, &self.cfg) {
            self.states.insert(p, s);
        }
    }
}
