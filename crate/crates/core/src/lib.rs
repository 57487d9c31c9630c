//! Consistency checking for reported null-hypothesis significance tests.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] recomputes p-values from reported test statistics.
//! * [`extract`] finds test-statistic reports and bare p-values in plain text.
//! * [`consistency`] classifies every report (and every paper) as
//!   `CorrectNHST`, `Inconsistency`, `DecisionError` or `Incomplete`.
//! * [`analysis`] cross-tabulates outcomes and runs the association tests,
//!   effect sizes and confusion-matrix metrics used for corpus studies.
//! * [`mlr`] fits multinomial logistic regressions of outcomes on venue and
//!   year.
//!
//! ```
//! use statfidelity_core::consistency::{evaluate_test, Config, TestOutcome};
//! use statfidelity_core::extract::scan_document;
//!
//! let (reports, incompletes) = scan_document("as expected, t(24) = 2.52, p = .019.");
//! assert!(incompletes.is_empty());
//! let evaluated = evaluate_test(&reports[0], &Config::default()).unwrap();
//! assert_eq!(evaluated.outcome, TestOutcome::CorrectNHST);
//! ```

pub mod analysis;
pub mod consistency;
mod error;
pub mod extract;
pub mod kernel;
pub mod mlr;

pub use error::{Error, Result};
