//! Canonical match log: a JSON header line followed by one match per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::schema::SchemaName;
use crate::error::{Error, Result};
use crate::model::{validate_match, MatchRecord};

pub const LOG_FORMAT: &str = "behavrank-match-log";
pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format: String,
    pub version: u32,
    pub schema: SchemaName,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchLog {
    pub schema: SchemaName,
    /// Ordered by timestamp, then match id.
    pub matches: Vec<MatchRecord>,
}

impl MatchLog {
    /// Sorts the matches into replay order.
    pub fn new(schema: SchemaName, mut matches: Vec<MatchRecord>) -> Self {
        sort_matches(&mut matches);
        MatchLog { schema, matches }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = LogHeader {
            format: LOG_FORMAT.into(),
            version: LOG_VERSION,
            schema: self.schema,
        };
        let io = |e| Error::io("<log output>", e);
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n").map_err(io)?;
        for m in &self.matches {
            serde_json::to_writer(&mut w, m)?;
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn render(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    /// Parses and validates a log. Matches must already be in replay order.
    pub fn read_from<R: BufRead>(reader: R, origin: &str) -> Result<Self> {
        let malformed = |line: u64, message: String| Error::MalformedRow {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = reader.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::SchemaVersion(format!("{origin}: empty log")))?
            .map_err(|e| Error::io(origin, e))?;
        let header: LogHeader =
            serde_json::from_str(&first).map_err(|e| Error::SchemaVersion(format!("{origin}: {e}")))?;
        if header.format != LOG_FORMAT || header.version != LOG_VERSION {
            return Err(Error::SchemaVersion(format!(
                "{origin}: {} version {}",
                header.format, header.version
            )));
        }
        let mut matches: Vec<MatchRecord> = Vec::new();
        for (i, line) in lines.enumerate() {
            let line_no = i as u64 + 2;
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: MatchRecord = serde_json::from_str(&line).map_err(|e| malformed(line_no, e.to_string()))?;
            let record = validate_match(record).map_err(|e| malformed(line_no, e.to_string()))?;
            if let Some(prev) = matches.last() {
                if replay_key(prev) >= replay_key(&record) {
                    return Err(Error::UnsortedMatches(record.match_id));
                }
            }
            matches.push(record);
        }
        Ok(MatchLog {
            schema: header.schema,
            matches,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), &path.display().to_string())
    }
}

fn replay_key(m: &MatchRecord) -> (i64, &str) {
    (m.timestamp_ms, m.match_id.as_str())
}

/// Replay order: timestamp, then match id.
pub fn sort_matches(matches: &mut [MatchRecord]) {
    matches.sort_by(|a, b| replay_key(a).cmp(&replay_key(b)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::two_team;
    use crate::model::{RawMatchStats, Stat};

    fn sample() -> MatchLog {
        let mut a = two_team("b", &["p1", "p2"], &["p3", "p4"], (1, 2));
        a.timestamp_ms = 20;
        a.teams[0].members[0].stats = RawMatchStats::new().with(Stat::Kills, 3.0).with(Stat::DamageDealt, 0.1);
        let mut b = two_team("a", &["p1"], &["p3"], (1, 1));
        b.timestamp_ms = 20;
        let mut c = two_team("z", &["p1"], &["p2"], (2, 1));
        c.timestamp_ms = 5;
        MatchLog::new(SchemaName::Csgo, vec![a, b, c])
    }

    #[test]
    fn new_sorts_by_time_then_id() {
        let log = sample();
        let ids: Vec<&str> = log.matches.iter().map(|m| m.match_id.as_str()).collect();
        assert_eq!(ids, ["z", "a", "b"]);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let log = sample();
        let text = log.render();
        assert!(text.starts_with(r#"{"format":"behavrank-match-log","version":1,"schema":"csgo"}"#));
        let back = MatchLog::read_from(text.as_bytes(), "mem").unwrap();
        assert_eq!(back, log);
        assert_eq!(back.render(), text);
    }

    #[test]
    fn bad_lines_are_located() {
        let text = sample().render();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[2] = "{not json";
        let err = MatchLog::read_from(lines.join("\n").as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 3, .. }), "{err}");

        let mut lines: Vec<&str> = text.lines().collect();
        lines.swap(1, 2);
        let err = MatchLog::read_from(lines.join("\n").as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, Error::UnsortedMatches(_)));

        let err = MatchLog::read_from(&b"{\"format\":\"x\",\"version\":1,\"schema\":\"csgo\"}\n"[..], "mem").unwrap_err();
        assert!(matches!(err, Error::SchemaVersion(_)));
    }
}
