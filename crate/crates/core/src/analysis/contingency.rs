use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::consistency::{PaperCategory, PaperOutcome};
use crate::{Error, Result};

/// Counts cross-classified by two labelled factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != row_labels.len() || counts.iter().any(|r| r.len() != col_labels.len()) {
            return Err(Error::Domain(format!(
                "counts do not match {} row and {} column labels",
                row_labels.len(),
                col_labels.len()
            )));
        }
        if row_labels.len() < 2 || col_labels.len() < 2 {
            return Err(Error::Degenerate(format!(
                "a {}×{} table needs at least two levels per factor",
                row_labels.len(),
                col_labels.len()
            )));
        }
        Ok(ContingencyTable { row_labels, col_labels, counts })
    }

    /// Unlabelled table; rows and columns are numbered from 1.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let rows = (1..=counts.len()).map(|i| format!("R{i}")).collect();
        let cols = (1..=counts.first().map_or(0, Vec::len)).map(|j| format!("C{j}")).collect();
        Self::new(rows, cols, counts)
    }

    pub fn n_rows(&self) -> usize {
        self.counts.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.n_cols()).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn transpose(&self) -> Self {
        let counts = (0..self.n_cols())
            .map(|j| self.counts.iter().map(|r| r[j]).collect())
            .collect();
        ContingencyTable {
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            counts,
        }
    }

    /// Removes rows and columns whose sum is zero.
    pub fn drop_empty(&self) -> Result<Self> {
        let rs = self.row_sums();
        let cs = self.col_sums();
        let rows: Vec<usize> = (0..self.n_rows()).filter(|&i| rs[i] > 0).collect();
        let cols: Vec<usize> = (0..self.n_cols()).filter(|&j| cs[j] > 0).collect();
        Self::new(
            rows.iter().map(|&i| self.row_labels[i].clone()).collect(),
            cols.iter().map(|&j| self.col_labels[j].clone()).collect(),
            rows.iter()
                .map(|&i| cols.iter().map(|&j| self.counts[i][j]).collect())
                .collect(),
        )
    }

    /// Errors unless every row and column sum is positive.
    pub fn require_positive_margins(&self) -> Result<()> {
        let zero_row = self.row_sums().iter().position(|&s| s == 0);
        let zero_col = self.col_sums().iter().position(|&s| s == 0);
        match (zero_row, zero_col) {
            (Some(i), _) => Err(Error::ZeroMargin(format!("row {:?}", self.row_labels[i]))),
            (_, Some(j)) => Err(Error::ZeroMargin(format!("column {:?}", self.col_labels[j]))),
            _ => Ok(()),
        }
    }

    /// Expected counts under independence.
    pub fn expected(&self) -> Vec<Vec<f64>> {
        let rs = self.row_sums();
        let cs = self.col_sums();
        let n = self.total() as f64;
        rs.iter()
            .map(|&r| cs.iter().map(|&c| r as f64 * c as f64 / n).collect())
            .collect()
    }

    pub fn min_expected(&self) -> f64 {
        self.expected().into_iter().flatten().fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Display for ContingencyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w0 = self.row_labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
        let widths: Vec<usize> = (0..self.n_cols())
            .map(|j| {
                let cell = self.counts.iter().map(|r| r[j].to_string().len()).max().unwrap_or(1);
                cell.max(self.col_labels[j].chars().count())
            })
            .collect();
        write!(f, "{:w0$}", "")?;
        for (label, w) in self.col_labels.iter().zip(&widths) {
            write!(f, "  {label:>w$}")?;
        }
        writeln!(f)?;
        for (label, row) in self.row_labels.iter().zip(&self.counts) {
            write!(f, "{label:w0$}")?;
            for (c, w) in row.iter().zip(&widths) {
                write!(f, "  {c:>w$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EffectSizeReporting {
    None,
    Inferable,
    Explicit,
}

impl EffectSizeReporting {
    pub fn name(self) -> &'static str {
        match self {
            EffectSizeReporting::None => "none",
            EffectSizeReporting::Inferable => "inferable",
            EffectSizeReporting::Explicit => "explicit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "none" => Some(EffectSizeReporting::None),
            "inferable" => Some(EffectSizeReporting::Inferable),
            "explicit" => Some(EffectSizeReporting::Explicit),
            _ => None,
        }
    }
}

/// One paper with its metadata and aggregated outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub venue: String,
    pub year: i32,
    pub mcc_used: bool,
    pub effect_sizes_reported: EffectSizeReporting,
    pub outcome: PaperOutcome,
}

/// One test (complete or bare p) with its paper's metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub paper_id: String,
    pub venue: String,
    pub year: i32,
    pub outcome: PaperCategory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    Outcome,
    Venue,
    Year,
    Mcc,
    EffectSizes,
}

/// Something that can be cross-tabulated.
pub trait Classified {
    fn level(&self, dim: Dimension) -> Result<String>;
}

impl Classified for PaperRecord {
    fn level(&self, dim: Dimension) -> Result<String> {
        Ok(match dim {
            Dimension::Outcome => self.outcome.outcome.name().to_string(),
            Dimension::Venue => self.venue.clone(),
            Dimension::Year => self.year.to_string(),
            Dimension::Mcc => if self.mcc_used { "MCC" } else { "noMCC" }.to_string(),
            Dimension::EffectSizes => self.effect_sizes_reported.name().to_string(),
        })
    }
}

impl Classified for TestRecord {
    fn level(&self, dim: Dimension) -> Result<String> {
        match dim {
            Dimension::Outcome => Ok(self.outcome.name().to_string()),
            Dimension::Venue => Ok(self.venue.clone()),
            Dimension::Year => Ok(self.year.to_string()),
            other => Err(Error::Domain(format!("tests carry no {other:?} level"))),
        }
    }
}

fn sort_key(dim: Dimension, label: &str) -> (i64, String) {
    let rank = match dim {
        Dimension::Outcome => PaperCategory::parse(label).map_or(i64::MAX, |c| c as i64),
        Dimension::Year => label.parse().unwrap_or(i64::MAX),
        Dimension::EffectSizes => EffectSizeReporting::parse(label).map_or(i64::MAX, |e| e as i64),
        Dimension::Venue | Dimension::Mcc => 0,
    };
    (rank, label.to_string())
}

/// Cross-tabulates `records`. Outcome levels follow category order, years
/// ascend, other labels sort alphabetically. Only observed levels appear.
pub fn build_contingency<T: Classified>(
    records: &[T],
    row_dim: Dimension,
    col_dim: Dimension,
) -> Result<ContingencyTable> {
    if records.is_empty() {
        return Err(Error::Empty("no records to tabulate".into()));
    }
    let pairs: Vec<(String, String)> = records
        .iter()
        .map(|r| Ok((r.level(row_dim)?, r.level(col_dim)?)))
        .collect::<Result<_>>()?;
    let levels = |dim: Dimension, pick: fn(&(String, String)) -> &String| {
        let set: BTreeSet<(i64, String)> = pairs.iter().map(|p| sort_key(dim, pick(p))).collect();
        set.into_iter().map(|(_, l)| l).collect::<Vec<_>>()
    };
    let rows = levels(row_dim, |p| &p.0);
    let cols = levels(col_dim, |p| &p.1);
    let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
    for (r, c) in &pairs {
        let i = rows.iter().position(|l| l == r).expect("row level");
        let j = cols.iter().position(|l| l == c).expect("column level");
        counts[i][j] += 1;
    }
    ContingencyTable::new(rows, cols, counts)
}
