use std::fmt;

use serde::{Deserialize, Serialize};

use super::{EvaluatedTest, TestOutcome};
use crate::extract::IncompletePValue;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PaperCategory {
    CorrectNHST,
    Inconsistency,
    DecisionError,
    Incomplete,
}

impl PaperCategory {
    pub const ALL: [PaperCategory; 4] = [
        PaperCategory::CorrectNHST,
        PaperCategory::Inconsistency,
        PaperCategory::DecisionError,
        PaperCategory::Incomplete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PaperCategory::CorrectNHST => "CorrectNHST",
            PaperCategory::Inconsistency => "Inconsistency",
            PaperCategory::DecisionError => "DecisionError",
            PaperCategory::Incomplete => "Incomplete",
        }
    }

    pub fn parse(name: &str) -> Option<PaperCategory> {
        PaperCategory::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(name.trim()))
    }
}

impl From<TestOutcome> for PaperCategory {
    fn from(o: TestOutcome) -> Self {
        match o {
            TestOutcome::CorrectNHST => PaperCategory::CorrectNHST,
            TestOutcome::Inconsistency => PaperCategory::Inconsistency,
            TestOutcome::DecisionError => PaperCategory::DecisionError,
        }
    }
}

impl fmt::Display for PaperCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperOutcome {
    pub paper_id: String,
    pub outcome: PaperCategory,
    pub n_complete: usize,
    pub n_incomplete: usize,
    /// Tests classified `Inconsistency` (decision errors not included).
    pub n_inconsistent: usize,
    pub n_decision_errors: usize,
}

impl PaperOutcome {
    /// Builds the outcome from counters. The category follows from them:
    /// any decision error wins, then any inconsistency, and a paper with
    /// only bare p-values is `Incomplete`.
    pub fn from_counts(
        paper_id: &str,
        n_complete: usize,
        n_incomplete: usize,
        n_inconsistent: usize,
        n_decision_errors: usize,
    ) -> Result<Self> {
        if n_complete == 0 && n_incomplete == 0 {
            return Err(Error::UndefinedPaper(paper_id.to_string()));
        }
        if n_inconsistent + n_decision_errors > n_complete {
            return Err(Error::Domain(format!(
                "{paper_id}: {n_inconsistent} inconsistencies and {n_decision_errors} decision errors exceed {n_complete} complete tests"
            )));
        }
        let outcome = if n_complete == 0 {
            PaperCategory::Incomplete
        } else if n_decision_errors > 0 {
            PaperCategory::DecisionError
        } else if n_inconsistent > 0 {
            PaperCategory::Inconsistency
        } else {
            PaperCategory::CorrectNHST
        };
        Ok(PaperOutcome {
            paper_id: paper_id.to_string(),
            outcome,
            n_complete,
            n_incomplete,
            n_inconsistent,
            n_decision_errors,
        })
    }

    /// Combines two partial outcomes of the same paper.
    pub fn merge(&self, other: &PaperOutcome) -> Result<PaperOutcome> {
        if self.paper_id != other.paper_id {
            return Err(Error::Domain(format!(
                "cannot merge papers {} and {}",
                self.paper_id, other.paper_id
            )));
        }
        PaperOutcome::from_counts(
            &self.paper_id,
            self.n_complete + other.n_complete,
            self.n_incomplete + other.n_incomplete,
            self.n_inconsistent + other.n_inconsistent,
            self.n_decision_errors + other.n_decision_errors,
        )
    }
}

/// Aggregates a paper's tests and bare p-values into one category.
pub fn aggregate_paper(
    paper_id: &str,
    tests: &[EvaluatedTest],
    incompletes: &[IncompletePValue],
) -> Result<PaperOutcome> {
    let count = |o: TestOutcome| tests.iter().filter(|t| t.outcome == o).count();
    PaperOutcome::from_counts(
        paper_id,
        tests.len(),
        incompletes.len(),
        count(TestOutcome::Inconsistency),
        count(TestOutcome::DecisionError),
    )
}
