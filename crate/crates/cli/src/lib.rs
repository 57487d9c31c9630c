//! Library behind the `statfidelity` command: corpus ingestion, run
//! bundles, and the report renderers.

pub mod bundle;
pub mod compare;
pub mod corpus;
pub mod document;
pub mod error;
pub mod input;
pub mod model;
pub mod report;
pub mod validate;

pub use error::{CliError, Result};
