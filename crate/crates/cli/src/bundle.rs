//! The machine-readable record of one corpus run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statfidelity_core::analysis::{AssociationResult, ContingencyTable, PaperRecord};
use statfidelity_core::consistency::{HistogramBin, PaperCategory};

use crate::document::{DocumentScan, RunConfig};
use crate::error::{io_err, CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub schema_version: u32,
    pub generator: String,
    pub config: RunConfig,
    /// Sorted by paper id.
    pub papers: Vec<PaperEntry>,
    /// Papers whose text yielded neither tests nor p-values.
    pub excluded: Vec<String>,
    pub failures: Vec<Failure>,
    pub tables: Vec<TableEntry>,
    pub p_difference_histogram: Vec<HistogramBin>,
    pub series: Vec<YearSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperEntry {
    pub record: PaperRecord,
    pub alpha: f64,
    pub scan: DocumentScan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub paper_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Paper,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub name: String,
    pub granularity: Granularity,
    /// Absent when fewer than two levels were observed on a side.
    pub table: Option<ContingencyTable>,
    pub association: Option<AssociationResult>,
    /// Why the table or its association is missing.
    pub note: Option<String>,
}

/// Shares per year, one value per year and level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearSeries {
    pub name: String,
    pub years: Vec<i32>,
    pub levels: BTreeMap<String, Vec<f64>>,
}

impl Bundle {
    pub fn paper_distribution(&self) -> [u64; 4] {
        let mut out = [0; 4];
        for p in &self.papers {
            out[p.record.outcome.outcome as usize] += 1;
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Bundle> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let json = |source| CliError::Json { path: path.to_path_buf(), source };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(json)?;
        let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if found != SCHEMA_VERSION {
            return Err(CliError::Schema { path: path.to_path_buf(), found, expected: SCHEMA_VERSION });
        }
        serde_json::from_str(&text).map_err(json)
    }
}

pub(crate) fn category_names() -> Vec<String> {
    PaperCategory::ALL.iter().map(|c| c.name().to_string()).collect()
}
