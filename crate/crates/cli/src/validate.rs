use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statfidelity_core::analysis::{confusion_metrics, ConfusionMetrics};
use statfidelity_core::consistency::{EvaluatedTest, PaperCategory, TestOutcome};

use crate::bundle::Bundle;
use crate::error::{CliError, Result};
use crate::input::GroundTruthRow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub matched: usize,
    /// Positive: the checker flags an error. Reference: the human coding.
    pub error_detection: ConfusionMetrics,
    /// Positive: significant. Predicted: the authors' claim. Reference:
    /// the recomputed p. Absent when no matched test has both.
    pub author_decisions: Option<ConfusionMetrics>,
    pub author_error_codes: BTreeMap<String, usize>,
    pub tool_error_codes: BTreeMap<String, usize>,
}

#[derive(Default)]
struct Counts([u64; 4]);

impl Counts {
    fn add(&mut self, predicted: bool, reference: bool) {
        let i = match (predicted, reference) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        self.0[i] += 1;
    }

    fn metrics(&self) -> statfidelity_core::Result<ConfusionMetrics> {
        let [tp, fp, fn_, tn] = self.0;
        confusion_metrics(tp, fp, fn_, tn)
    }
}

/// Joins ground truth to scanned tests by paper id and 1-based index.
pub fn validate(bundle: &Bundle, truth: &[GroundTruthRow]) -> Result<Validation> {
    let tests: BTreeMap<&str, &[EvaluatedTest]> =
        bundle.papers.iter().map(|p| (p.record.paper_id.as_str(), p.scan.tests.as_slice())).collect();
    let mut pairs = Vec::new();
    let mut orphans = Vec::new();
    for row in truth {
        match tests.get(row.paper_id.as_str()).and_then(|t| t.get(row.test_index - 1)) {
            Some(t) => pairs.push((row, t)),
            None => orphans.push(format!("{} #{}", row.paper_id, row.test_index)),
        }
    }
    if !orphans.is_empty() {
        return Err(CliError::Orphans(orphans));
    }
    if pairs.is_empty() {
        return Err(CliError::Invalid("the ground truth is empty".into()));
    }

    let mut detection = Counts::default();
    let mut decisions = Counts::default();
    let mut author_error_codes = BTreeMap::new();
    let mut tool_error_codes = BTreeMap::new();
    for (row, test) in &pairs {
        let human_error = matches!(row.human_outcome, PaperCategory::Inconsistency | PaperCategory::DecisionError);
        detection.add(test.outcome != TestOutcome::CorrectNHST, human_error);
        if let (Some(claimed), Some(actual)) = (test.claims_significance, test.recomputed_significance) {
            decisions.add(claimed, actual);
        }
        if let Some(c) = row.author_error_code {
            *author_error_codes.entry(c.to_string()).or_insert(0) += 1;
        }
        if let Some(c) = row.tool_error_code {
            *tool_error_codes.entry(c.to_string()).or_insert(0) += 1;
        }
    }
    Ok(Validation {
        matched: pairs.len(),
        error_detection: detection.metrics()?,
        author_decisions: if decisions.0.iter().sum::<u64>() > 0 { Some(decisions.metrics()?) } else { None },
        author_error_codes,
        tool_error_codes,
    })
}
