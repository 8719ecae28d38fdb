use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Mode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub match_id: String,
    pub source: String,
    pub mode: Mode,
    pub slots: Vec<u32>,
    /// Aligned with `slots`; always a permutation of 1..=T.
    pub predicted_ranks: Vec<u32>,
    pub observed_ranks: Vec<u32>,
    pub team_ratings: Vec<f64>,
    pub tie_break_seed: u64,
}

impl PredictionRecord {
    pub fn is_drawn(&self) -> bool {
        let mut r = self.observed_ranks.clone();
        r.sort_unstable();
        r.windows(2).any(|w| w[0] == w[1])
    }
}

/// NDCG of a predicted team order (`order[i]` = team placed at position i+1)
/// against observed ranks. Relevance of a team observed at rank r is `T - r`.
pub fn ndcg_from_order(order: &[usize], observed_ranks: &[u32]) -> f64 {
    let t = observed_ranks.len() as f64;
    let rel = |team: usize| t - observed_ranks[team] as f64;
    let discount = |pos: usize| (pos as f64 + 2.0).log2();
    let dcg: f64 = order.iter().enumerate().map(|(pos, &team)| rel(team) / discount(pos)).sum();
    let mut ideal: Vec<f64> = (0..observed_ranks.len()).map(rel).collect();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg: f64 = ideal.iter().enumerate().map(|(pos, r)| r / discount(pos)).sum();
    if idcg == 0.0 {
        1.0
    } else {
        dcg / idcg
    }
}

pub fn ndcg(record: &PredictionRecord) -> f64 {
    let mut order: Vec<usize> = (0..record.predicted_ranks.len()).collect();
    order.sort_by_key(|&i| record.predicted_ranks[i]);
    ndcg_from_order(&order, &record.observed_ranks)
}

/// Share of head-to-head matches whose observed winner was predicted first.
/// Drawn matches are skipped.
pub fn accuracy(records: &[PredictionRecord]) -> Result<f64> {
    let mut scored = 0usize;
    let mut correct = 0usize;
    for r in records {
        if r.mode != Mode::HeadToHead {
            return Err(Error::NotHeadToHead(r.match_id.clone()));
        }
        if r.is_drawn() {
            continue;
        }
        scored += 1;
        let predicted = r.predicted_ranks.iter().position(|&x| x == 1);
        let observed = r.observed_ranks.iter().position(|&x| x == 1);
        if predicted == observed {
            correct += 1;
        }
    }
    if scored == 0 {
        return Err(Error::NoEvaluableMatches);
    }
    Ok(correct as f64 / scored as f64)
}
