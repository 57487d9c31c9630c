use serde::{Deserialize, Serialize};
use statfidelity_core::analysis::{association_test, AssociationResult, ContingencyTable};
use statfidelity_core::consistency::PaperCategory;

use crate::bundle::Bundle;
use crate::document::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub table: ContingencyTable,
    pub excluded_incomplete: bool,
    pub result: AssociationResult,
}

/// Tests whether two paper-outcome distributions (counts in category
/// order) differ. χ² unless an expected count falls below 5.
pub fn compare_distributions(
    a: (&str, [u64; 4]),
    b: (&str, [u64; 4]),
    exclude_incomplete: bool,
    run: &RunConfig,
) -> Result<Comparison> {
    let keep: Vec<usize> = PaperCategory::ALL
        .iter()
        .filter(|c| !(exclude_incomplete && **c == PaperCategory::Incomplete))
        .map(|c| *c as usize)
        .collect();
    let mut counts = Vec::new();
    for (name, dist) in [a, b] {
        let row: Vec<u64> = keep.iter().map(|&k| dist[k]).collect();
        if row.iter().sum::<u64>() == 0 {
            return Err(CliError::Invalid(format!("{name} has no paper outcomes to compare")));
        }
        counts.push(row);
    }
    let cols = keep.iter().map(|&k| PaperCategory::ALL[k].name().to_string()).collect();
    let table = ContingencyTable::new(vec![a.0.to_string(), b.0.to_string()], cols, counts)?.drop_empty()?;
    let result = association_test(&table, run.replicates, run.seed)?;
    Ok(Comparison { table, excluded_incomplete: exclude_incomplete, result })
}

pub fn compare_bundles(a: (&str, &Bundle), b: (&str, &Bundle), exclude_incomplete: bool, run: &RunConfig) -> Result<Comparison> {
    compare_distributions((a.0, a.1.paper_distribution()), (b.0, b.1.paper_distribution()), exclude_incomplete, run)
}
