use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::PlayerProfile;
use crate::model::{MatchRecord, PlayerId};
use crate::ratings::TrueSkillRatings;

/// An evaluation population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetupSpec {
    AllPlayers,
    /// Best `top` players by final conservative TrueSkill among those with
    /// more than `min_games` games, scored on their first `window` games.
    TopTier { top: usize, min_games: u64, window: u64 },
    /// Players with more than `min_games` games, scored on their first `window` games.
    Frequent { min_games: u64, window: u64 },
}

impl SetupSpec {
    pub fn top_tier() -> Self {
        SetupSpec::TopTier {
            top: 50,
            min_games: 10,
            window: 10,
        }
    }

    pub fn frequent() -> Self {
        SetupSpec::Frequent {
            min_games: 100,
            window: 100,
        }
    }

    pub fn standard() -> Vec<SetupSpec> {
        vec![SetupSpec::AllPlayers, Self::top_tier(), Self::frequent()]
    }

    pub fn name(&self) -> &'static str {
        match self {
            SetupSpec::AllPlayers => "all_players",
            SetupSpec::TopTier { .. } => "top_tier",
            SetupSpec::Frequent { .. } => "frequent",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SetupSpec::AllPlayers => true,
            SetupSpec::TopTier { top, window, .. } => top > 0 && window > 0,
            SetupSpec::Frequent { window, .. } => window > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("setup {} needs positive parameters", self.name())))
        }
    }
}

/// Selected players and how many of each player's first games are scored.
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    All,
    Windowed { players: BTreeSet<PlayerId>, window: u64 },
}

impl Selection {
    /// Per-match flag: does the match fall inside the window of at least one
    /// selected player?
    pub fn qualifying(&self, matches: &[MatchRecord]) -> Vec<bool> {
        match self {
            Selection::All => vec![true; matches.len()],
            Selection::Windowed { players, window } => {
                let mut seen: HashMap<&PlayerId, u64> = HashMap::new();
                matches
                    .iter()
                    .map(|m| {
                        let mut hit = false;
                        for p in m.players() {
                            let n = seen.entry(p).or_insert(0);
                            if *n < *window && players.contains(p) {
                                hit = true;
                            }
                            *n += 1;
                        }
                        hit
                    })
                    .collect()
            }
        }
    }

    pub fn player_count(&self) -> Option<usize> {
        match self {
            Selection::All => None,
            Selection::Windowed { players, .. } => Some(players.len()),
        }
    }
}

fn warn_if_empty(players: &BTreeSet<PlayerId>, setup: &str) {
    if players.is_empty() {
        log::warn!("setup {setup}: no players qualify, evaluation will be empty");
    }
}

pub fn select_top_tier(
    trueskill: &TrueSkillRatings,
    profiles: &HashMap<PlayerId, PlayerProfile>,
    top: usize,
    min_games: u64,
    window: u64,
) -> Selection {
    let mut ranked: Vec<(f64, &PlayerId)> = profiles
        .iter()
        .filter(|(_, p)| p.games_played > min_games)
        .map(|(id, _)| (trueskill.value(id), id))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    let players: BTreeSet<PlayerId> = ranked.into_iter().take(top).map(|(_, id)| id.clone()).collect();
    warn_if_empty(&players, "top_tier");
    Selection::Windowed { players, window }
}

pub fn select_frequent(profiles: &HashMap<PlayerId, PlayerProfile>, min_games: u64, window: u64) -> Selection {
    let players: BTreeSet<PlayerId> = profiles
        .iter()
        .filter(|(_, p)| p.games_played > min_games)
        .map(|(id, _)| id.clone())
        .collect();
    warn_if_empty(&players, "frequent");
    Selection::Windowed { players, window }
}

/// Resolves a setup against the final state of a full replay.
pub fn select(
    setup: &SetupSpec,
    trueskill: &TrueSkillRatings,
    profiles: &HashMap<PlayerId, PlayerProfile>,
) -> Selection {
    match *setup {
        SetupSpec::AllPlayers => Selection::All,
        SetupSpec::TopTier { top, min_games, window } => select_top_tier(trueskill, profiles, top, min_games, window),
        SetupSpec::Frequent { min_games, window } => select_frequent(profiles, min_games, window),
    }
}
