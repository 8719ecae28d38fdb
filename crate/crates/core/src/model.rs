//! Match, team and player data shared by every other module.
//!
//! A [`MatchRecord`] is immutable once it has passed [`validate_match`]; the
//! replay engine and the fitting code rely on the invariants checked there.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(String);

impl PlayerId {
    pub fn new(id: impl Into<String>) -> Self {
        PlayerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlayerId {
    fn from(s: &str) -> Self {
        PlayerId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    HeadToHead,
    FreeForAll,
}

/// Raw per-match statistics a dataset can record for one player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stat {
    Kills,
    Deaths,
    Headshots,
    DamageDealt,
    Dbno,
    MeleeKills,
    GrenadeKills,
    LongestSpree,
    TimeAlive,
    WalkDistance,
    RideDistance,
    KillAssists,
    FlashAssists,
    FlagSteals,
    Betrayals,
    Suicides,
}

impl Stat {
    pub const ALL: [Stat; 16] = [
        Stat::Kills,
        Stat::Deaths,
        Stat::Headshots,
        Stat::DamageDealt,
        Stat::Dbno,
        Stat::MeleeKills,
        Stat::GrenadeKills,
        Stat::LongestSpree,
        Stat::TimeAlive,
        Stat::WalkDistance,
        Stat::RideDistance,
        Stat::KillAssists,
        Stat::FlashAssists,
        Stat::FlagSteals,
        Stat::Betrayals,
        Stat::Suicides,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stat::Kills => "kills",
            Stat::Deaths => "deaths",
            Stat::Headshots => "headshots",
            Stat::DamageDealt => "damage_dealt",
            Stat::Dbno => "dbno",
            Stat::MeleeKills => "melee_kills",
            Stat::GrenadeKills => "grenade_kills",
            Stat::LongestSpree => "longest_spree",
            Stat::TimeAlive => "time_alive",
            Stat::WalkDistance => "walk_distance",
            Stat::RideDistance => "ride_distance",
            Stat::KillAssists => "kill_assists",
            Stat::FlashAssists => "flash_assists",
            Stat::FlagSteals => "flag_steals",
            Stat::Betrayals => "betrayals",
            Stat::Suicides => "suicides",
        }
    }

    pub fn from_name(name: &str) -> Option<Stat> {
        Stat::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Counts are integers; the remaining stats are nonnegative reals.
    pub fn is_count(self) -> bool {
        !matches!(
            self,
            Stat::DamageDealt | Stat::TimeAlive | Stat::WalkDistance | Stat::RideDistance
        )
    }
}

/// Per-player statistics for one match. A missing entry means the dataset
/// does not record that statistic, which is not the same as zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RawMatchStats(BTreeMap<Stat, f64>);

impl RawMatchStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, stat: Stat, value: f64) -> Self {
        self.set(stat, value);
        self
    }

    pub fn set(&mut self, stat: Stat, value: f64) {
        self.0.insert(stat, value);
    }

    pub fn get(&self, stat: Stat) -> Option<f64> {
        self.0.get(&stat).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Stat, f64)> + '_ {
        self.0.iter().map(|(s, v)| (*s, *v))
    }

    fn check(&self) -> std::result::Result<(), String> {
        for (stat, v) in self.iter() {
            if !v.is_finite() {
                return Err(format!("non-finite statistic {}", stat.name()));
            }
            if v < 0.0 {
                return Err(format!("negative statistic {}", stat.name()));
            }
            if stat.is_count() && v.fract() != 0.0 {
                return Err(format!("non-integer count {}", stat.name()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub player: PlayerId,
    pub stats: RawMatchStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Team {
    pub slot: u32,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub match_id: String,
    pub timestamp_ms: i64,
    pub mode: Mode,
    pub teams: Vec<Team>,
    /// Team slot to observed rank (1 = winner). Tied teams share a rank.
    pub observed_ranks: BTreeMap<u32, u32>,
}

impl MatchRecord {
    pub fn team_count(&self) -> usize {
        self.teams.len()
    }

    /// Observed rank of the team at position `idx` in `teams`.
    pub fn rank_of(&self, idx: usize) -> u32 {
        self.observed_ranks[&self.teams[idx].slot]
    }

    /// Observed ranks aligned with `teams`.
    pub fn ranks(&self) -> Vec<u32> {
        (0..self.teams.len()).map(|i| self.rank_of(i)).collect()
    }

    pub fn is_tied(&self) -> bool {
        let ranks = self.ranks();
        let unique: HashSet<u32> = ranks.iter().copied().collect();
        unique.len() < ranks.len()
    }

    pub fn players(&self) -> impl Iterator<Item = &PlayerId> {
        self.teams
            .iter()
            .flat_map(|t| t.members.iter().map(|m| &m.player))
    }
}

/// Returns the record if every match invariant holds.
///
/// Ranks must follow competition ranking: each team's rank is one plus the
/// number of teams that finished strictly ahead of it, so a two-team draw is
/// `{1, 1}` and a three-team tie for second is `{1, 2, 2}`.
pub fn validate_match(record: MatchRecord) -> Result<MatchRecord> {
    let id = record.match_id.as_str();
    let fail = |rule: String| Err(Error::invalid_match(id, rule));

    if id.is_empty() {
        return fail("empty match id".into());
    }
    let t = record.teams.len();
    if t < 2 {
        return fail(format!("needs at least 2 teams, found {t}"));
    }
    if record.mode == Mode::HeadToHead && t != 2 {
        return fail(format!("head-to-head match has {t} teams"));
    }

    let mut slots = HashSet::new();
    let mut seen = HashSet::new();
    for team in &record.teams {
        if !slots.insert(team.slot) {
            return fail(format!("duplicate team slot {}", team.slot));
        }
        if team.members.is_empty() {
            return fail(format!("empty roster for team {}", team.slot));
        }
        for m in &team.members {
            if m.player.as_str().is_empty() {
                return fail("empty player id".into());
            }
            if !seen.insert(&m.player) {
                return fail(format!("duplicate player {}", m.player));
            }
            if let Err(msg) = m.stats.check() {
                return fail(format!("{msg} for player {}", m.player));
            }
        }
    }

    if record.observed_ranks.len() != t || !slots.iter().all(|s| record.observed_ranks.contains_key(s)) {
        return fail("observed ranks do not match team slots".into());
    }
    let ranks: Vec<u32> = record.observed_ranks.values().copied().collect();
    for &r in &ranks {
        let ahead = ranks.iter().filter(|&&o| o < r).count() as u32;
        if r < 1 || r as usize > t || r != ahead + 1 {
            return fail(format!("rank set {ranks:?} does not cover 1..{t}"));
        }
    }

    Ok(record)
}
