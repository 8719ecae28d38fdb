//! Glicko-1, with every match treated as its own rating period.
//!
//! At the start of a match each participant's RD is inflated by one idle
//! period. Each member is then rated individually against the best member of
//! every opposing team; in free-for-all matches every pairing counts as one
//! game of the period.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{pairwise_score, SystemConfig};
use crate::model::{MatchRecord, PlayerId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlickoState {
    pub rating: f64,
    pub deviation: f64,
}

impl Default for GlickoState {
    fn default() -> Self {
        GlickoState {
            rating: 1500.0,
            deviation: 350.0,
        }
    }
}

fn g(q: f64, rd: f64) -> f64 {
    1.0 / (1.0 + 3.0 * q * q * rd * rd / (std::f64::consts::PI * std::f64::consts::PI)).sqrt()
}

/// Expected score of `player` against `opponent`.
pub fn expected(player: GlickoState, opponent: GlickoState, cfg: &SystemConfig) -> f64 {
    let gj = g(cfg.glicko_q, opponent.deviation);
    1.0 / (1.0 + 10f64.powf(-gj * (player.rating - opponent.rating) / 400.0))
}

/// RD growth over `periods` idle rating periods, bounded by the cap.
pub fn inflate(state: GlickoState, periods: u32, cfg: &SystemConfig) -> GlickoState {
    let rd = (state.deviation.powi(2) + cfg.glicko_c.powi(2) * periods as f64).sqrt();
    GlickoState {
        rating: state.rating,
        deviation: rd.min(cfg.glicko_rd_cap),
    }
}

/// One rating period against `games` = (opponent, score). `state.deviation`
/// must already be the RD at the onset of the period.
pub fn rate(state: GlickoState, games: &[(GlickoState, f64)], cfg: &SystemConfig) -> GlickoState {
    if games.is_empty() {
        return state;
    }
    let q = cfg.glicko_q;
    let mut d2_inv = 0.0;
    let mut score_sum = 0.0;
    for &(opp, s) in games {
        let gj = g(q, opp.deviation);
        let e = expected(state, opp, cfg);
        d2_inv += q * q * gj * gj * e * (1.0 - e);
        score_sum += gj * (s - e);
    }
    let denom = 1.0 / state.deviation.powi(2) + d2_inv;
    GlickoState {
        rating: state.rating + q / denom * score_sum,
        deviation: (1.0 / denom).sqrt().min(cfg.glicko_rd_cap),
    }
}

/// New states for every participant of one match.
pub fn glicko_update(
    record: &MatchRecord,
    states: &HashMap<PlayerId, GlickoState>,
    cfg: &SystemConfig,
) -> Vec<(PlayerId, GlickoState)> {
    let onset = |p: &PlayerId| inflate(states.get(p).copied().unwrap_or_default(), 1, cfg);
    let reps: Vec<GlickoState> = record
        .teams
        .iter()
        .map(|t| {
            t.members
                .iter()
                .map(|m| onset(&m.player))
                .reduce(|best, s| if s.rating > best.rating { s } else { best })
                .expect("validated roster")
        })
        .collect();
    let ranks = record.ranks();

    let mut out = Vec::new();
    for (i, team) in record.teams.iter().enumerate() {
        let games: Vec<(GlickoState, f64)> = (0..reps.len())
            .filter(|&j| j != i)
            .map(|j| (reps[j], pairwise_score(ranks[i], ranks[j])))
            .collect();
        for m in &team.members {
            out.push((m.player.clone(), rate(onset(&m.player), &games, cfg)));
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct GlickoRatings {
    pub cfg: SystemConfig,
    pub states: HashMap<PlayerId, GlickoState>,
}

impl GlickoRatings {
    pub fn new(cfg: SystemConfig) -> Self {
        GlickoRatings {
            cfg,
            states: HashMap::new(),
        }
    }

    pub fn state(&self, player: &PlayerId) -> GlickoState {
        self.states.get(player).copied().unwrap_or_default()
    }

    pub fn value(&self, player: &PlayerId) -> f64 {
        self.state(player).rating
    }

    pub fn apply(&mut self, record: &MatchRecord) {
        for (p, s) in glicko_update(record, &self.states, &self.cfg) {
            self.states.insert(p, s);
        }
    }
}
