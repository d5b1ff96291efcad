//! Manifest-driven experiment runs, result rows and the curated verification suite.

pub mod manifest;
pub mod rows;
pub mod run;
pub mod verify;

pub use manifest::{Experiment, Format, Manifest, ManifestError};
pub use rows::{ResultRow, SCHEMA_VERSION};
pub use run::{execute, render, ExecOpts, RunError, RunOutcome};
