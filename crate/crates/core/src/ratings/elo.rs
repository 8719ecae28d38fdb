//! Elo with team and free-for-all extensions.
//!
//! The expected score of a team comes from its max-member rating, and the
//! resulting delta is applied to every member. Free-for-all matches are split
//! into all pairings and the per-pairing deltas are averaged over `T - 1`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{pairwise_score, team_rating, SystemConfig};
use crate::error::Result;
use crate::model::{MatchRecord, PlayerId};

pub const DEFAULT_RATING: f64 = 1500.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EloState {
    pub rating: f64,
}

impl Default for EloState {
    fn default() -> Self {
        EloState {
            rating: DEFAULT_RATING,
        }
    }
}

/// Expected score of `a` against `b`.
pub fn expected(a: f64, b: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((b - a) / 400.0))
}

/// Per-team deltas from team ratings and observed ranks (aligned slices).
pub fn team_deltas(team_ratings: &[f64], ranks: &[u32], k: f64) -> Vec<f64> {
    let t = team_ratings.len();
    (0..t)
        .map(|i| {
            let sum: f64 = (0..t)
                .filter(|&j| j != i)
                .map(|j| pairwise_score(ranks[i], ranks[j]) - expected(team_ratings[i], team_ratings[j]))
                .sum();
            k * sum / (t - 1) as f64
        })
        .collect()
}

/// Per-player rating deltas for one match.
pub fn elo_update(
    record: &MatchRecord,
    states: &HashMap<PlayerId, EloState>,
    cfg: &SystemConfig,
) -> Result<Vec<(PlayerId, f64)>> {
    let rating = |p: &PlayerId| states.get(p).copied().unwrap_or_default().rating;
    let team_ratings = record
        .teams
        .iter()
        .map(|t| team_rating(&t.members.iter().map(|m| rating(&m.player)).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let deltas = team_deltas(&team_ratings, &record.ranks(), cfg.elo_k);
    Ok(record
        .teams
        .iter()
        .zip(deltas)
        .flat_map(|(t, d)| t.members.iter().map(move |m| (m.player.clone(), d)))
        .collect())
}

#[derive(Debug, Clone, Default)]
pub struct EloRatings {
    pub cfg: SystemConfig,
    pub states: HashMap<PlayerId, EloState>,
}

impl EloRatings {
    pub fn new(cfg: SystemConfig) -> Self {
        EloRatings {
            cfg,
            states: HashMap::new(),
        }
    }

    pub fn value(&self, player: &PlayerId) -> f64 {
        self.states.get(player).copied().unwrap_or_default().rating
    }

    pub fn apply(&mut self, record: &MatchRecord) -> Result<()> {
        for (p, d) in elo_update(record, &self.states, &self.cfg)? {
            self.states.entry(p).or_default().rating += d;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::two_team;
    use crate::model::{Mode, Team};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn expected_examples() {
        assert_eq!(expected(1500.0, 1500.0), 0.5);
        assert_abs_diff_eq!(expected(1700.0, 1500.0), 0.7597, epsilon = 1e-4);
        assert_abs_diff_eq!(expected(1234.0, 1610.0) + expected(1610.0, 1234.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn equal_teams_split_sixteen() {
        let m = two_team("m", &["a", "b"], &["c", "d"], (1, 2));
        let deltas: HashMap<_, _> = elo_update(&m, &HashMap::new(), &SystemConfig::default())
            .unwrap()
            .into_iter()
            .collect();
        for p in ["a", "b"] {
            assert_eq!(deltas[&PlayerId::from(p)], 16.0);
        }
        for p in ["c", "d"] {
            assert_eq!(deltas[&PlayerId::from(p)], -16.0);
        }
    }

    #[test]
    fn favourite_win_gains_little() {
        let d = team_deltas(&[1700.0, 1500.0], &[1, 2], 32.0);
        // 32 * (1 - 0.7597469...)
        assert_abs_diff_eq!(d[0], 7.688098, epsilon = 1e-5);
        assert_abs_diff_eq!(d[0], 7.69, epsilon = 5e-3);
        assert_abs_diff_eq!(d[1], -d[0], epsilon = 1e-12);
    }

    /// Enumerates all pairings directly and averages, independent of `team_deltas`.
    fn brute_ffa(ratings: &[f64], ranks: &[u32], k: f64) -> Vec<f64> {
        let mut out = vec![0.0; ratings.len()];
        let mut pairings = vec![0usize; ratings.len()];
        for i in 0..ratings.len() {
            for j in 0..ratings.len() {
                if i == j {
                    continue;
                }
                let s = if ranks[i] < ranks[j] {
                    1.0
                } else if ranks[i] == ranks[j] {
                    0.5
                } else {
                    0.0
                };
                let e = 1.0 / (1.0 + 10f64.powf((ratings[j] - ratings[i]) / 400.0));
                out[i] += k * (s - e);
                pairings[i] += 1;
            }
        }
        out.iter().zip(pairings).map(|(d, n)| d / n as f64).collect()
    }

    #[test]
    fn three_team_ffa_equal_ratings() {
        let d = team_deltas(&[1500.0; 3], &[1, 2, 3], 32.0);
        assert_eq!(d, vec![16.0, 0.0, -16.0]);
        assert_eq!(brute_ffa(&[1500.0; 3], &[1, 2, 3], 32.0), d);
    }

    #[test]
    fn store_applies_to_members() {
        let mut elo = EloRatings::new(SystemConfig::default());
        let mut m = two_team("m", &["a"], &["b"], (1, 2));
        m.mode = Mode::FreeForAll;
        m.teams.push(Team {
            slot: 2,
            members: vec![crate::model::tests::member("c")],
        });
        m.observed_ranks.insert(2, 3);
        elo.apply(&m).unwrap();
        assert_eq!(elo.value(&"a".into()), 1516.0);
        assert_eq!(elo.value(&"b".into()), 1500.0);
        assert_eq!(elo.value(&"c".into()), 1484.0);
        assert_eq!(elo.value(&"zz".into()), 1500.0);
    }

    proptest! {
        #[test]
        fn head_to_head_zero_sum(ra in 800f64..2600.0, rb in 800f64..2600.0, a_wins in any::<bool>()) {
            let ranks = if a_wins { [1, 2] } else { [2, 1] };
            let d = team_deltas(&[ra, rb], &ranks, 32.0);
            prop_assert!((d[0] + d[1]).abs() < 1e-9);
        }

        #[test]
        fn expected_monotone_and_translation_invariant(a in -3000f64..3000.0, b in -3000f64..3000.0, c in -1000f64..1000.0, step in 1f64..100.0) {
            prop_assert!(expected(a + step, b) > expected(a, b));
            prop_assert!((expected(a + c, b + c) - expected(a, b)).abs() < 1e-9);
        }

        #[test]
        fn ffa_matches_brute_force(ratings in prop::collection::vec(1000f64..2000.0, 2..8), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<u32> = ratings.iter().map(|_| rng.random_range(0..3)).collect();
            let ranks: Vec<u32> = raw.iter().map(|r| 1 + raw.iter().filter(|o| *o < r).count() as u32).collect();
            let got = team_deltas(&ratings, &ranks, 32.0);
            let want = brute_ffa(&ratings, &ranks, 32.0);
            for (g, w) in got.iter().zip(want) {
                prop_assert!((g - w).abs() < 1e-9);
            }
        }

        #[test]
        fn two_team_ffa_equals_head_to_head(ra in 1000f64..2000.0, rb in 1000f64..2000.0) {
            let mut m = two_team("m", &["a"], &["b"], (1, 2));
            let mut states = HashMap::new();
            states.insert(PlayerId::from("a"), EloState { rating: ra });
            states.insert(PlayerId::from("b"), EloState { rating: rb });
            let h2h = elo_update(&m, &states, &SystemConfig::default()).unwrap();
            m.mode = Mode::FreeForAll;
            let ffa = elo_update(&m, &states, &SystemConfig::default()).unwrap();
            prop_assert_eq!(h2h, ffa);
        }
    }
}
