//! Streaming player profiles and the engineered behavioral features.
//!
//! Every "average X" feature is the running total of X divided by
//! `max(1, games)`, and the KD ratio divides by `max(1, deaths)`, so a player
//! with no games has an all-zero vector.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Mode, RawMatchStats, Stat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureId {
    KdRatio,
    KillingSpree,
    DamageDealt,
    Accuracy,
    Dbno,
    MeleeKills,
    GrenadeKills,
    WinningRate,
    RankRatio,
    Survival,
    WalkingDistance,
    RidingDistance,
    KillAssist,
    FlashAssist,
    Steal,
    Betrayal,
    Suicide,
    Experience,
}

impl FeatureId {
    pub const ALL: [FeatureId; 18] = [
        FeatureId::KdRatio,
        FeatureId::KillingSpree,
        FeatureId::DamageDealt,
        FeatureId::Accuracy,
        FeatureId::Dbno,
        FeatureId::MeleeKills,
        FeatureId::GrenadeKills,
        FeatureId::WinningRate,
        FeatureId::RankRatio,
        FeatureId::Survival,
        FeatureId::WalkingDistance,
        FeatureId::RidingDistance,
        FeatureId::KillAssist,
        FeatureId::FlashAssist,
        FeatureId::Steal,
        FeatureId::Betrayal,
        FeatureId::Suicide,
        FeatureId::Experience,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureId::KdRatio => "kd_ratio",
            FeatureId::KillingSpree => "killing_spree",
            FeatureId::DamageDealt => "damage_dealt",
            FeatureId::Accuracy => "accuracy",
            FeatureId::Dbno => "dbno",
            FeatureId::MeleeKills => "melee_kills",
            FeatureId::GrenadeKills => "grenade_kills",
            FeatureId::WinningRate => "winning_rate",
            FeatureId::RankRatio => "rank_ratio",
            FeatureId::Survival => "survival",
            FeatureId::WalkingDistance => "walking_distance",
            FeatureId::RidingDistance => "riding_distance",
            FeatureId::KillAssist => "kill_assist",
            FeatureId::FlashAssist => "flash_assist",
            FeatureId::Steal => "steal",
            FeatureId::Betrayal => "betrayal",
            FeatureId::Suicide => "suicide",
            FeatureId::Experience => "experience",
        }
    }

    /// The raw statistic averaged per game, for the plain "average X" features.
    fn averaged_stat(self) -> Option<Stat> {
        Some(match self {
            FeatureId::KillingSpree => Stat::LongestSpree,
            FeatureId::DamageDealt => Stat::DamageDealt,
            FeatureId::Accuracy => Stat::Headshots,
            FeatureId::Dbno => Stat::Dbno,
            FeatureId::MeleeKills => Stat::MeleeKills,
            FeatureId::GrenadeKills => Stat::GrenadeKills,
            FeatureId::Survival => Stat::TimeAlive,
            FeatureId::WalkingDistance => Stat::WalkDistance,
            FeatureId::RidingDistance => Stat::RideDistance,
            FeatureId::KillAssist => Stat::KillAssists,
            FeatureId::FlashAssist => Stat::FlashAssists,
            FeatureId::Steal => Stat::FlagSteals,
            FeatureId::Betrayal => Stat::Betrayals,
            FeatureId::Suicide => Stat::Suicides,
            _ => return None,
        })
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFeature(s.to_string()))
    }
}

/// Which features a dataset can produce, given the statistics it records and
/// the game mode it covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureCatalog {
    features: BTreeSet<FeatureId>,
}

impl FeatureCatalog {
    pub fn new(stats: &BTreeSet<Stat>, mode: Mode) -> Self {
        let features = FeatureId::ALL
            .into_iter()
            .filter(|f| match f {
                FeatureId::KdRatio => stats.contains(&Stat::Kills) && stats.contains(&Stat::Deaths),
                FeatureId::WinningRate => mode == Mode::HeadToHead,
                FeatureId::RankRatio => mode == Mode::FreeForAll,
                FeatureId::Experience => true,
                other => other.averaged_stat().is_some_and(|s| stats.contains(&s)),
            })
            .collect();
        FeatureCatalog { features }
    }

    pub fn from_features(features: impl IntoIterator<Item = FeatureId>) -> Self {
        FeatureCatalog {
            features: features.into_iter().collect(),
        }
    }

    pub fn contains(&self, f: FeatureId) -> bool {
        self.features.contains(&f)
    }

    pub fn iter(&self) -> impl Iterator<Item = FeatureId> + '_ {
        self.features.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    Zscored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: BTreeMap<FeatureId, f64>,
    pub normalization: Normalization,
}

impl FeatureVector {
    pub fn zeros(catalog: &FeatureCatalog, normalization: Normalization) -> Self {
        FeatureVector {
            values: catalog.iter().map(|f| (f, 0.0)).collect(),
            normalization,
        }
    }

    pub fn get(&self, f: FeatureId) -> Option<f64> {
        self.values.get(&f).copied()
    }
}

/// Outcome context a profile needs from one match.
#[derive(Debug, Clone, Copy)]
pub struct MatchContext {
    pub rank: u32,
    pub team_count: u32,
    pub won: bool,
    pub mode: Mode,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlayerProfile {
    pub games_played: u64,
    pub wins: u64,
    pub totals: BTreeMap<Stat, f64>,
    pub rank_percentile_sum: f64,
}

impl PlayerProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, stats: &RawMatchStats, ctx: MatchContext) -> Result<()> {
        let pct = match ctx.mode {
            Mode::FreeForAll => Some(rank_percentile(ctx.rank, ctx.team_count)?),
            Mode::HeadToHead => None,
        };
        self.games_played += 1;
        if ctx.won {
            self.wins += 1;
        }
        for (stat, v) in stats.iter() {
            *self.totals.entry(stat).or_insert(0.0) += v;
        }
        if let Some(p) = pct {
            self.rank_percentile_sum += p;
        }
        Ok(())
    }

    fn total(&self, stat: Stat) -> f64 {
        self.totals.get(&stat).copied().unwrap_or(0.0)
    }

    pub fn derive_features(&self, catalog: &FeatureCatalog) -> FeatureVector {
        let games = self.games_played.max(1) as f64;
        let values = catalog
            .iter()
            .map(|f| {
                let v = match f {
                    FeatureId::KdRatio => self.total(Stat::Kills) / self.total(Stat::Deaths).max(1.0),
                    FeatureId::WinningRate => self.wins as f64 / games,
                    FeatureId::RankRatio => self.rank_percentile_sum / games,
                    FeatureId::Experience => self.games_played as f64,
                    other => {
                        let stat = other.averaged_stat().expect("averaged feature");
                        self.total(stat) / games
                    }
                };
                (f, v)
            })
            .collect();
        FeatureVector {
            values,
            normalization: Normalization::Raw,
        }
    }
}

/// Rank percentile with higher = better: `1 - (rank - 1) / (T - 1)`.
pub fn rank_percentile(rank: u32, team_count: u32) -> Result<f64> {
    if team_count < 2 || rank < 1 || rank > team_count {
        return Err(Error::RankOutOfRange { rank, team_count });
    }
    Ok(1.0 - (rank - 1) as f64 / (team_count - 1) as f64)
}

/// Welford accumulator that also supports removing an observation, so a
/// player's old vector can be swapped for the updated one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningMoments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn remove(&mut self, x: f64) {
        match self.count {
            0 => {}
            1 => *self = Self::default(),
            n => {
                let n1 = (n - 1) as f64;
                let old_mean = (self.mean * n as f64 - x) / n1;
                self.m2 -= (x - self.mean) * (x - old_mean);
                self.m2 = self.m2.max(0.0);
                self.mean = old_mean;
                self.count = n - 1;
            }
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0)
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Population statistics used for Z-score normalization, one accumulator per
/// feature.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PopulationMoments {
    pub features: BTreeMap<FeatureId, RunningMoments>,
}

impl PopulationMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, vector: &FeatureVector) {
        for (&f, &v) in &vector.values {
            self.features.entry(f).or_default().push(v);
        }
    }

    pub fn remove(&mut self, vector: &FeatureVector) {
        for (&f, &v) in &vector.values {
            if let Some(m) = self.features.get_mut(&f) {
                m.remove(v);
            }
        }
    }

    /// Swaps one observation for another, e.g. a player's pre- and post-match vectors.
    pub fn replace(&mut self, old: &FeatureVector, new: &FeatureVector) {
        self.remove(old);
        self.update(new);
    }

    pub fn get(&self, f: FeatureId) -> Option<&RunningMoments> {
        self.features.get(&f)
    }
}

const STD_EPS: f64 = 1e-12;

pub fn zscore(vector: &FeatureVector, moments: &PopulationMoments) -> Result<FeatureVector> {
    let values = vector
        .values
        .iter()
        .map(|(&f, &x)| {
            let m = moments
                .get(f)
                .ok_or_else(|| Error::MissingTerm {
                    kind: "feature moments",
                    id: f.to_string(),
                })?;
            let std = m.std_dev();
            let z = if m.count < 2 || std < STD_EPS {
                0.0
            } else {
                (x - m.mean) / std
            };
            Ok((f, z))
        })
        .collect::<Result<_>>()?;
    Ok(FeatureVector {
        values,
        normalization: Normalization::Zscored,
    })
}
