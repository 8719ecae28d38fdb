//! Chronological evaluation: rank prediction, metrics, setups and replay.

pub mod metrics;
pub mod predict;
pub mod replay;
pub mod setup;

pub use metrics::{accuracy, ndcg, PredictionRecord};
pub use predict::predict_ranks;
pub use replay::{
    evaluate, run_replay, BehavioralModels, Metric, Replay, ReplayConfig, SetupReport, SourceId, SourceScore,
    ZscoreMode,
};
pub use setup::{select_frequent, select_top_tier, Selection, SetupSpec};
