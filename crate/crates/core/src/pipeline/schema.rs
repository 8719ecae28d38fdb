//! Dataset schemas: game mode, roster size, recorded statistics and the CSV
//! column each statistic is read from.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureCatalog;
use crate::model::{Mode, Stat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaName {
    HaloSlayer,
    HaloCtf,
    Csgo,
    PubgDuo,
    Synthetic,
}

impl SchemaName {
    pub const ALL: [SchemaName; 5] = [
        SchemaName::HaloSlayer,
        SchemaName::HaloCtf,
        SchemaName::Csgo,
        SchemaName::PubgDuo,
        SchemaName::Synthetic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemaName::HaloSlayer => "halo_slayer",
            SchemaName::HaloCtf => "halo_ctf",
            SchemaName::Csgo => "csgo",
            SchemaName::PubgDuo => "pubg_duo",
            SchemaName::Synthetic => "synthetic",
        }
    }

    pub fn schema(self) -> Schema {
        use Stat::*;
        let generic = |mode, team_size, stats: &[Stat]| Schema {
            name: self,
            mode,
            team_size,
            layout: Layout::Generic,
            stats: stats.iter().copied().collect(),
        };
        match self {
            SchemaName::HaloSlayer => generic(
                Mode::HeadToHead,
                Some(4),
                &[
                    Kills,
                    Deaths,
                    Headshots,
                    LongestSpree,
                    TimeAlive,
                    GrenadeKills,
                    MeleeKills,
                    KillAssists,
                    Betrayals,
                    Suicides,
                ],
            ),
            SchemaName::HaloCtf => generic(
                Mode::HeadToHead,
                Some(4),
                &[
                    Kills,
                    Deaths,
                    Headshots,
                    GrenadeKills,
                    MeleeKills,
                    KillAssists,
                    FlagSteals,
                    Betrayals,
                    Suicides,
                ],
            ),
            SchemaName::Csgo => generic(
                Mode::HeadToHead,
                Some(5),
                &[Kills, Deaths, Headshots, DamageDealt, KillAssists, FlashAssists],
            ),
            SchemaName::PubgDuo => Schema {
                name: self,
                mode: Mode::FreeForAll,
                team_size: Some(2),
                layout: Layout::PubgAggregate,
                stats: [
                    Kills,
                    Deaths,
                    DamageDealt,
                    Dbno,
                    TimeAlive,
                    WalkDistance,
                    RideDistance,
                    KillAssists,
                ]
                .into_iter()
                .collect(),
            },
            SchemaName::Synthetic => generic(
                Mode::HeadToHead,
                None,
                &[Kills, Deaths, Headshots, DamageDealt, KillAssists, FlashAssists, Suicides],
            ),
        }
    }
}

impl fmt::Display for SchemaName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemaName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemaName::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| Error::UnknownSchema(s.to_string()))
    }
}

/// How a schema's CSV rows are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// One row per player per match with columns `match_id`, `timestamp`,
    /// `team`, `player`, `rank` and one column per recorded statistic, named
    /// after the statistic.
    Generic,
    /// The per-player aggregate table of the public PUBG match dump.
    PubgAggregate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub name: SchemaName,
    pub mode: Mode,
    /// Maximum roster size, when the game mode fixes one.
    pub team_size: Option<usize>,
    pub layout: Layout,
    /// Statistics the dataset records; everything else is absent.
    pub stats: BTreeSet<Stat>,
}

impl Schema {
    pub fn catalog(&self) -> FeatureCatalog {
        FeatureCatalog::new(&self.stats, self.mode)
    }
}
