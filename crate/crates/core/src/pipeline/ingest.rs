//! CSV ingestion into the canonical match log.
//!
//! Every layout has one row per player per match. Rows of a match are grouped
//! by match id; teams are numbered in order of first appearance. The rank
//! column only needs to order teams (lower is better): it is converted to
//! competition ranks within each match, which also closes gaps left by teams
//! missing from the dump.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDate};

use super::log::MatchLog;
use super::schema::{Layout, Schema, SchemaName};
use crate::error::{Error, Result};
use crate::model::{validate_match, MatchRecord, Member, PlayerId, RawMatchStats, Stat, Team};

struct Columns {
    match_id: usize,
    timestamp: usize,
    team: usize,
    player: usize,
    rank: usize,
    party_size: Option<usize>,
    stats: Vec<(usize, Stat)>,
}

const PUBG_STATS: [(&str, Stat); 7] = [
    ("player_kills", Stat::Kills),
    ("player_dmg", Stat::DamageDealt),
    ("player_dbno", Stat::Dbno),
    ("player_survive_time", Stat::TimeAlive),
    ("player_dist_walk", Stat::WalkDistance),
    ("player_dist_ride", Stat::RideDistance),
    ("player_assists", Stat::KillAssists),
];

fn resolve_columns(headers: &csv::StringRecord, schema: &Schema) -> Result<Columns> {
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let require = |name: &str| find(name).ok_or_else(|| Error::MissingColumn(name.to_string()));
    match schema.layout {
        Layout::Generic => {
            let mut stats = Vec::new();
            for &stat in &schema.stats {
                match find(stat.name()) {
                    Some(i) => stats.push((i, stat)),
                    None => log::warn!("column `{}` absent, statistic left unrecorded", stat.name()),
                }
            }
            Ok(Columns {
                match_id: require("match_id")?,
                timestamp: require("timestamp")?,
                team: require("team")?,
                player: require("player")?,
                rank: require("rank")?,
                party_size: None,
                stats,
            })
        }
        Layout::PubgAggregate => Ok(Columns {
            match_id: require("match_id")?,
            timestamp: require("date")?,
            team: require("team_id")?,
            player: require("player_name")?,
            rank: require("team_placement")?,
            party_size: Some(require("party_size")?),
            stats: PUBG_STATS
                .iter()
                .map(|(col, stat)| Ok((require(col)?, *stat)))
                .collect::<Result<_>>()?,
        }),
    }
}

/// Milliseconds since the epoch from an integer, an RFC 3339 / ISO 8601
/// timestamp with offset, or a plain date (midnight UTC).
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(ms) = s.parse::<i64>() {
        return Some(ms);
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.timestamp_millis());
    }
    if let Ok(t) = DateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%z") {
        return Some(t.timestamp_millis());
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|t| t.and_utc().timestamp_millis())
}

struct PendingTeam {
    label: String,
    rank_key: f64,
    members: Vec<Member>,
}

struct PendingMatch {
    timestamp_ms: i64,
    teams: Vec<PendingTeam>,
}

/// Competition ranks from "lower is better" keys.
fn competition_ranks(keys: &[f64]) -> Vec<u32> {
    keys.iter()
        .map(|k| 1 + keys.iter().filter(|o| *o < k).count() as u32)
        .collect()
}

pub fn ingest_reader<R: Read>(reader: R, origin: &str, schema_name: SchemaName) -> Result<MatchLog> {
    let schema = schema_name.schema();
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedRow {
            path: origin.to_string(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let cols = resolve_columns(&headers, &schema)?;

    let mut pending: BTreeMap<String, PendingMatch> = BTreeMap::new();
    let mut skipped = 0u64;
    for row in rdr.records() {
        let row = row.map_err(|e| Error::MalformedRow {
            path: origin.to_string(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let fail = |message: String| Error::MalformedRow {
            path: origin.to_string(),
            line,
            message,
        };
        let field = |i: usize| row.get(i).unwrap_or("").trim();
        let number = |i: usize, what: &str| -> Result<f64> {
            field(i)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| fail(format!("{what}: `{}` is not a number", field(i))))
        };

        if let Some(p) = cols.party_size {
            let size = number(p, "party_size")?;
            if Some(size as usize) != schema.team_size || size.fract() != 0.0 {
                skipped += 1;
                continue;
            }
        }
        let match_id = field(cols.match_id);
        let player = field(cols.player);
        let team = field(cols.team);
        if match_id.is_empty() || player.is_empty() || team.is_empty() {
            return Err(fail("empty match id, team or player".into()));
        }
        let timestamp_ms = parse_timestamp(field(cols.timestamp))
            .ok_or_else(|| fail(format!("unreadable timestamp `{}`", field(cols.timestamp))))?;
        let rank_key = number(cols.rank, "rank")?;

        let mut stats = RawMatchStats::new();
        for &(i, stat) in &cols.stats {
            if field(i).is_empty() {
                continue;
            }
            let v = number(i, stat.name())?;
            if v < 0.0 || (stat.is_count() && v.fract() != 0.0) {
                return Err(fail(format!("{}: `{}` is not a valid {}", stat.name(), field(i), stat.name())));
            }
            stats.set(stat, v);
        }
        if schema.layout == Layout::PubgAggregate {
            // The dump has no death counter; only the winning team can have survived.
            stats.set(Stat::Deaths, if rank_key == 1.0 { 0.0 } else { 1.0 });
        }

        let m = pending.entry(match_id.to_string()).or_insert_with(|| PendingMatch {
            timestamp_ms,
            teams: Vec::new(),
        });
        if m.timestamp_ms != timestamp_ms {
            return Err(fail(format!("match {match_id} has conflicting timestamps")));
        }
        let member = Member {
            player: PlayerId::new(player),
            stats,
        };
        match m.teams.iter_mut().find(|t| t.label == team) {
            Some(t) => {
                if t.rank_key != rank_key {
                    return Err(fail(format!("team {team} of match {match_id} has conflicting ranks")));
                }
                t.members.push(member);
            }
            None => m.teams.push(PendingTeam {
                label: team.to_string(),
                rank_key,
                members: vec![member],
            }),
        }
    }
    if skipped > 0 {
        log::warn!("{origin}: skipped {skipped} rows with a different party size");
    }

    let matches = pending
        .into_iter()
        .map(|(match_id, m)| {
            if let Some(size) = schema.team_size {
                if let Some(t) = m.teams.iter().find(|t| t.members.len() > size) {
                    return Err(Error::invalid_match(
                        &match_id,
                        format!("team {} has {} players, at most {size} allowed", t.label, t.members.len()),
                    ));
                }
            }
            let keys: Vec<f64> = m.teams.iter().map(|t| t.rank_key).collect();
            let ranks = competition_ranks(&keys);
            let observed_ranks = (0..m.teams.len() as u32).zip(ranks).collect();
            let teams = m
                .teams
                .into_iter()
                .enumerate()
                .map(|(i, t)| Team {
                    slot: i as u32,
                    members: t.members,
                })
                .collect();
            validate_match(MatchRecord {
                match_id,
                timestamp_ms: m.timestamp_ms,
                mode: schema.mode,
                teams,
                observed_ranks,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MatchLog::new(schema_name, matches))
}

pub fn ingest(path: &Path, schema: SchemaName) -> Result<MatchLog> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(std::io::BufReader::new(file), &path.display().to_string(), schema)
}

/// Counts distinct players, for progress messages.
pub fn player_count(log: &MatchLog) -> usize {
    let seen: HashSet<&PlayerId> = log.matches.iter().flat_map(|m| m.players()).collect();
    seen.len()
}
