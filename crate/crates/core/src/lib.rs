//! Program-similarity engine for introductory C submissions.
//!
//! The pipeline is: [`cparse`] turns source text into an AST, [`normalize`]
//! flattens it into a [`normalize::LinearProgram`], [`distance`] compares two
//! linear programs and produces an edit script, [`cluster`] groups a problem's
//! correct submissions, and [`hints`] turns edit scripts into non-spoiling
//! feedback.

pub mod cparse;
pub mod normalize;
pub mod distance;
pub mod cluster;
pub mod hints;
pub mod synth;
pub mod variance;
