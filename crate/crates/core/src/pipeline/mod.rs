//! Ingestion, configuration, model artifacts, runs and reports.

pub mod artifacts;
pub mod config;
pub mod fitting;
pub mod ingest;
pub mod log;
pub mod report;
pub mod run;
pub mod schema;
pub mod synth;

pub use artifacts::{fixture, load_models, ModelArtifacts};
pub use config::{ModelSource, RunConfig};
pub use ingest::ingest;
pub use log::MatchLog;
pub use report::{render_table, Report};
pub use run::{run, RunOutput};
pub use schema::{Schema, SchemaName};
pub use synth::{synth, SynthConfig};
