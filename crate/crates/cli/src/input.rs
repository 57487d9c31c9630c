//! Corpus manifest and ground-truth tables, both CSV with a header row.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use statfidelity_core::analysis::EffectSizeReporting;
use statfidelity_core::consistency::PaperCategory;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub paper_id: String,
    pub text_path: PathBuf,
    pub venue: String,
    pub year: i32,
    pub mcc_used: bool,
    pub effect_sizes: EffectSizeReporting,
    pub alpha_override: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct RawManifestRow {
    paper_id: String,
    text_path: String,
    venue: String,
    year: String,
    mcc_used: String,
    effect_sizes: String,
    #[serde(default)]
    alpha_override: Option<String>,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" | "" => Some(false),
        _ => None,
    }
}

fn rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(u64, T)>> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for record in reader.deserialize() {
        let record: T = record.map_err(csv_err)?;
        // Header is line 1.
        out.push((out.len() as u64 + 2, record));
    }
    Ok(out)
}

/// Reads a manifest. Relative text paths resolve against the manifest's
/// directory.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, raw) in rows::<RawManifestRow>(path)? {
        let bad = |message: String| CliError::Row { path: path.to_path_buf(), line, message };
        if raw.paper_id.is_empty() {
            return Err(bad("empty paper_id".into()));
        }
        if !seen.insert(raw.paper_id.clone()) {
            return Err(bad(format!("duplicate paper_id {:?}", raw.paper_id)));
        }
        let year = raw.year.parse().map_err(|_| bad(format!("year {:?} is not an integer", raw.year)))?;
        let mcc_used = parse_bool(&raw.mcc_used).ok_or_else(|| bad(format!("mcc_used {:?} is not a boolean", raw.mcc_used)))?;
        let effect_sizes = EffectSizeReporting::parse(&raw.effect_sizes.to_ascii_lowercase())
            .ok_or_else(|| bad(format!("effect_sizes {:?}: expected none, inferable or explicit", raw.effect_sizes)))?;
        let alpha_override = match raw.alpha_override.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(a) => match a.parse::<f64>() {
                Ok(v) if v > 0.0 && v < 1.0 => Some(v),
                _ => return Err(bad(format!("alpha_override {a:?} must lie in (0, 1)"))),
            },
        };
        let text_path = PathBuf::from(&raw.text_path);
        out.push(ManifestRow {
            paper_id: raw.paper_id,
            text_path: if text_path.is_absolute() { text_path } else { base.join(text_path) },
            venue: raw.venue,
            year,
            mcc_used,
            effect_sizes,
            alpha_override,
        });
    }
    Ok(out)
}

/// Author-side error codes from the qualitative coding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AuthorError {
    Typo,
    RoundingError,
    OneTailedUS,
    Miscalculation,
}

/// How the checker handled a test, as judged by the human coder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[allow(clippy::enum_variant_names)]
pub enum ToolError {
    #[serde(rename = "scParsedOK")]
    ParsedOk,
    #[serde(rename = "scCorrect")]
    Correct,
    #[serde(rename = "scMisclassified")]
    Misclassified,
    #[serde(rename = "scMissedMC")]
    MissedMc,
}

impl fmt::Display for AuthorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for ToolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ToolError::ParsedOk => "scParsedOK",
            ToolError::Correct => "scCorrect",
            ToolError::Misclassified => "scMisclassified",
            ToolError::MissedMc => "scMissedMC",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRow {
    pub paper_id: String,
    /// 1-based position among the paper's complete tests.
    pub test_index: usize,
    pub human_outcome: PaperCategory,
    pub author_error_code: Option<AuthorError>,
    pub tool_error_code: Option<ToolError>,
}

#[derive(Debug, Deserialize)]
struct RawTruthRow {
    paper_id: String,
    test_index: String,
    human_outcome: String,
    #[serde(default)]
    author_error_code: Option<String>,
    #[serde(default)]
    tool_error_code: Option<String>,
}

fn code<T: for<'de> Deserialize<'de>>(s: Option<&str>) -> std::result::Result<Option<T>, String> {
    match s.map(str::trim) {
        None | Some("") => Ok(None),
        Some(c) => serde_json::from_value(serde_json::Value::String(c.to_string()))
            .map(Some)
            .map_err(|_| format!("{c:?} is not in the codebook")),
    }
}

pub fn load_truth(path: &Path) -> Result<Vec<GroundTruthRow>> {
    let mut seen = BTreeSet::new();
    rows::<RawTruthRow>(path)?
        .into_iter()
        .map(|(line, raw)| {
            let bad = |message: String| CliError::Row { path: path.to_path_buf(), line, message };
            let test_index: usize = raw
                .test_index
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| bad(format!("test_index {:?} is not a positive integer", raw.test_index)))?;
            if !seen.insert((raw.paper_id.clone(), test_index)) {
                return Err(bad(format!("duplicate row for {} #{test_index}", raw.paper_id)));
            }
            let human_outcome = PaperCategory::parse(&raw.human_outcome)
                .ok_or_else(|| bad(format!("human_outcome {:?} is not an outcome category", raw.human_outcome)))?;
            Ok(GroundTruthRow {
                paper_id: raw.paper_id,
                test_index,
                human_outcome,
                author_error_code: code(raw.author_error_code.as_deref()).map_err(&bad)?,
                tool_error_code: code(raw.tool_error_code.as_deref()).map_err(&bad)?,
            })
        })
        .collect()
}
