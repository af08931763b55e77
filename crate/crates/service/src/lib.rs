//! Submission ingestion, per-problem distance matrices, periodic clustering
//! and the correction lookup, behind an HTTP API.

pub mod api;
pub mod config;
pub mod engine;
pub mod store;

pub use api::{router, serve, spawn_scheduler};
pub use config::ServiceConfig;
pub use engine::{Correction, Engine, EngineError, NewSubmission, Receipt, SnapshotSummary, UpdateStats};
