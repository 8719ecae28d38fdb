use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("match {match_id}: {rule}")]
    InvalidMatch { match_id: String, rule: String },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("missing {kind} `{id}`")]
    MissingTerm { kind: &'static str, id: String },

    #[error("empty roster")]
    EmptyRoster,

    #[error("rank {rank} outside 1..={team_count}")]
    RankOutOfRange { rank: u32, team_count: u32 },

    #[error("non-finite rating for team {0}")]
    NonFiniteRating(usize),

    #[error("no evaluable matches")]
    NoEvaluableMatches,

    #[error("free-for-all record `{0}` passed to head-to-head accuracy")]
    NotHeadToHead(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular correlation matrix: {0}")]
    SingularCorrelation(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("all weights are zero")]
    AllZeroWeights,

    #[error("unsorted match stream at `{0}`")]
    UnsortedMatches(String),

    #[error("unknown rating source `{0}`")]
    UnknownSource(String),

    #[error("unknown schema `{0}`")]
    UnknownSchema(String),

    #[error("{path}:{line}: {message}")]
    MalformedRow {
        path: String,
        line: u64,
        message: String,
    },

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("unsupported schema version header: {0}")]
    SchemaVersion(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid_match(match_id: &str, rule: impl Into<String>) -> Self {
        Error::InvalidMatch {
            match_id: match_id.to_string(),
            rule: rule.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Tags an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code for the CLI: 2 validation, 3 fit non-convergence, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::NonConvergence { .. } | Error::AllZeroWeights => 3,
            Error::Io { .. } => 4,
            _ => 2,
        }
    }
}

pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
