//! Behavioral player ratings for competitive shooter games.
//!
//! Players are rated from engineered in-game features (kill/death ratio,
//! accuracy, assists, ...) instead of match outcomes alone, and compared with
//! Elo, Glicko and TrueSkill by replaying match logs in time order.
//!
//! - [`model`]: matches, teams and raw per-player statistics.
//! - [`features`]: per-player profiles, derived features and Z-scoring.
//! - [`ratings`]: Elo, Glicko and TrueSkill.
//! - [`behavioral`]: single-factor, naive hybrid and weighted hybrid ratings.
//! - [`fit`]: factor extraction and penalized logistic regression.
//! - [`eval`]: rank prediction, metrics and chronological replay.
//! - [`pipeline`]: ingestion, artifacts, runs and reports.

pub mod behavioral;
pub mod error;
pub mod eval;
pub mod features;
pub mod fit;
pub mod model;
pub mod pipeline;
pub mod ratings;

pub use error::{Error, Result};
