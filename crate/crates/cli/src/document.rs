use std::path::Path;

use serde::{Deserialize, Serialize};
use statfidelity_core::analysis::{DEFAULT_REPLICATES, DEFAULT_SEED};
use statfidelity_core::consistency::{evaluate_test, Config, EvaluatedTest, TestOutcome};
use statfidelity_core::extract::{classify_incomplete, scan, Diagnostic, IncompleteClass, IncompletePValue};

use crate::error::{io_err, CliError, Result};

/// Environment variable that replaces the built-in seed.
pub const SEED_ENV: &str = "STATFIDELITY_SEED";

/// Settings shared by every command. Flags win over manifest columns,
/// which win over these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// `None` defers to a manifest's `alpha_override`, then to .05.
    pub alpha: Option<f64>,
    pub one_tailed_detection: bool,
    pub seed: u64,
    pub replicates: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { alpha: None, one_tailed_detection: true, seed: DEFAULT_SEED, replicates: DEFAULT_REPLICATES }
    }
}

impl RunConfig {
    pub fn check_config(&self, alpha_override: Option<f64>, mcc_used: bool) -> Config {
        let mut cfg = Config { one_tailed_detection: self.one_tailed_detection, mcc_used, ..Config::default() };
        if let Some(a) = self.alpha.or(alpha_override) {
            cfg.alpha = a;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedIncomplete {
    #[serde(flatten)]
    pub value: IncompletePValue,
    pub class: IncompleteClass,
}

/// Everything derived from one text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocumentScan {
    pub tests: Vec<EvaluatedTest>,
    pub incompletes: Vec<ClassifiedIncomplete>,
    pub diagnostics: Vec<Diagnostic>,
}

impl DocumentScan {
    pub fn count(&self, outcome: TestOutcome) -> usize {
        self.tests.iter().filter(|t| t.outcome == outcome).count()
    }
}

pub fn check_text(text: &str, cfg: &Config) -> Result<DocumentScan> {
    cfg.validate()?;
    let found = scan(text);
    let mut doc = DocumentScan { diagnostics: found.diagnostics, ..Default::default() };
    for raw in found.reports {
        match evaluate_test(&raw, cfg) {
            Ok(t) => doc.tests.push(t),
            Err(e) => doc.diagnostics.push(Diagnostic { span: raw.span, message: e.to_string() }),
        }
    }
    for value in found.incompletes {
        let class = classify_incomplete(&value, cfg.alpha)?;
        doc.incompletes.push(ClassifiedIncomplete { value, class });
    }
    doc.diagnostics.sort_by_key(|d| d.span.byte_start);
    Ok(doc)
}

/// Reads a UTF-8 file; invalid bytes are reported with their line.
pub fn read_text(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    String::from_utf8(bytes).map_err(|e| {
        let valid = e.utf8_error().valid_up_to();
        let line = 1 + e.as_bytes()[..valid].iter().filter(|&&b| b == b'\n').count();
        CliError::Encoding { path: path.to_path_buf(), line }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_of_alpha() {
        let run = RunConfig::default();
        assert_eq!(run.check_config(None, false).alpha, 0.05);
        assert_eq!(run.check_config(Some(0.01), false).alpha, 0.01);
        let run = RunConfig { alpha: Some(0.1), ..run };
        assert_eq!(run.check_config(Some(0.01), true).alpha, 0.1);
        assert!(run.check_config(None, true).mcc_used);
    }

    #[test]
    fn classifies_both_lists() {
        let doc = check_text("t(24) = 2.52, p = .019 and (p < .001); t(24) = 1.00, p < .05", &Config::default()).unwrap();
        assert_eq!(doc.tests.len(), 2);
        assert_eq!(doc.count(TestOutcome::DecisionError), 1);
        assert_eq!(doc.incompletes[0].class, IncompleteClass::SigBelowAlpha);
    }

    #[test]
    fn invalid_utf8_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        std::fs::write(&path, b"ok\nfine\n\xff\xfe").unwrap();
        match read_text(&path) {
            Err(CliError::Encoding { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
