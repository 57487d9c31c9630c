//! Multinomial models of outcome on venue and year.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statfidelity_core::consistency::PaperCategory;
use statfidelity_core::mlr::{
    coefficient_table, effect_display, fit_multinomial, lr_test, CoefficientRow, Collapse, EffectPoint, FitComparison,
    MLRModel, Observation, PredictorSpec, Setting, VenueTerm, YearTerm,
};

use crate::bundle::{Bundle, Granularity};
use crate::corpus::test_records;
use crate::error::{CliError, Result};

pub const OTHER_VENUE: &str = "OTHER";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terms {
    Null,
    Year,
    Venue,
    Full,
}

impl Terms {
    fn has_year(self) -> bool {
        matches!(self, Terms::Year | Terms::Full)
    }

    fn has_venue(self) -> bool {
        matches!(self, Terms::Venue | Terms::Full)
    }

    fn nests(self, other: Terms) -> bool {
        self != other && (!other.has_year() || self.has_year()) && (!other.has_venue() || self.has_venue())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlrOptions {
    pub granularity: Granularity,
    pub collapse_venues: bool,
    /// Venues kept apart when collapsing; defaults to the most frequent.
    pub keep_venues: Vec<String>,
    /// Outcome reference level; defaults to CorrectNHST when present.
    pub reference: Option<String>,
    pub center_year: bool,
    /// The null model is always fitted.
    pub models: Vec<Terms>,
    pub confidence: f64,
}

impl Default for MlrOptions {
    fn default() -> Self {
        MlrOptions {
            granularity: Granularity::Test,
            collapse_venues: false,
            keep_venues: Vec::new(),
            reference: None,
            center_year: false,
            models: vec![Terms::Year, Terms::Venue, Terms::Full],
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub terms: Terms,
    pub formula: String,
    pub log_likelihood: f64,
    pub n_params: usize,
    pub iterations: usize,
    pub warnings: Vec<String>,
    /// Keyed by non-reference outcome level.
    pub coefficients: BTreeMap<String, Vec<CoefficientRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlrReport {
    pub granularity: Granularity,
    pub n: usize,
    pub reference: String,
    pub kept_venues: Option<Vec<String>>,
    pub models: Vec<ModelSummary>,
    pub lr_tests: Vec<FitComparison>,
    pub effects_model: Terms,
    pub effects: Vec<EffectPoint>,
}

pub fn observations(bundle: &Bundle, granularity: Granularity) -> Vec<Observation> {
    match granularity {
        Granularity::Paper => bundle
            .papers
            .iter()
            .map(|p| Observation {
                outcome: p.record.outcome.outcome.name().to_string(),
                venue: p.record.venue.clone(),
                year: f64::from(p.record.year),
            })
            .collect(),
        Granularity::Test => test_records(&bundle.papers)
            .into_iter()
            .map(|t| Observation { outcome: t.outcome.name().to_string(), venue: t.venue, year: f64::from(t.year) })
            .collect(),
    }
}

fn most_frequent<'a>(labels: impl Iterator<Item = &'a str>) -> Option<String> {
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *freq.entry(l).or_default() += 1;
    }
    freq.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(k, _)| k.to_string())
}

pub fn run_mlr(obs: &[Observation], opts: &MlrOptions) -> Result<MlrReport> {
    if obs.is_empty() {
        return Err(CliError::Invalid("no observations to model".into()));
    }
    let reference = match &opts.reference {
        Some(r) => r.clone(),
        None if obs.iter().any(|o| o.outcome == PaperCategory::CorrectNHST.name()) => {
            PaperCategory::CorrectNHST.name().to_string()
        }
        None => most_frequent(obs.iter().map(|o| o.outcome.as_str())).expect("non-empty"),
    };
    let collapse = opts.collapse_venues.then(|| Collapse {
        keep: if opts.keep_venues.is_empty() {
            vec![most_frequent(obs.iter().map(|o| o.venue.as_str())).expect("non-empty")]
        } else {
            opts.keep_venues.clone()
        },
        other: OTHER_VENUE.to_string(),
    });
    let spec_for = |t: Terms| PredictorSpec {
        year: t.has_year().then_some(YearTerm { centered: opts.center_year }),
        venue: t.has_venue().then(|| VenueTerm { reference: None, collapse: collapse.clone() }),
    };

    let mut wanted = opts.models.clone();
    wanted.push(Terms::Null);
    wanted.sort();
    wanted.dedup();
    let fitted: Vec<(Terms, MLRModel)> = wanted
        .par_iter()
        .map(|&t| fit_multinomial(obs, &spec_for(t), &reference).map(|m| (t, m)))
        .collect::<std::result::Result<_, _>>()?;

    let mut lr_tests = Vec::new();
    for (full_terms, full) in &fitted {
        for (nested_terms, nested) in &fitted {
            if full_terms.nests(*nested_terms) {
                lr_tests.push(lr_test(full, nested)?);
            }
        }
    }

    let (effects_model, top) = fitted.last().expect("null model fitted");
    let years: Vec<f64> = match (effects_model.has_year(), top.year_range) {
        (true, Some((lo, hi))) => (lo.ceil() as i64..=hi.floor() as i64).map(|y| y as f64).collect(),
        (_, range) => vec![range.map_or(0.0, |(lo, hi)| (lo + hi) / 2.0)],
    };
    let venues: Vec<String> = match &top.encoder.venue_reference {
        Some(r) if effects_model.has_venue() => {
            std::iter::once(r.clone()).chain(top.encoder.venue_levels.iter().cloned()).collect()
        }
        _ => vec![most_frequent(obs.iter().map(|o| o.venue.as_str())).expect("non-empty")],
    };
    let grid: Vec<Setting> = venues
        .iter()
        .flat_map(|v| years.iter().map(move |&year| Setting { year, venue: v.clone() }))
        .collect();
    let effects = effect_display(top, &grid, opts.confidence)?;

    let models = fitted
        .iter()
        .map(|(t, m)| {
            let coefficients = m
                .contrast_levels()
                .iter()
                .map(|l| Ok((l.to_string(), coefficient_table(m, l)?)))
                .collect::<Result<_>>()?;
            Ok(ModelSummary {
                terms: *t,
                formula: m.spec.describe(),
                log_likelihood: m.log_likelihood,
                n_params: m.n_params(),
                iterations: m.iterations,
                warnings: m.warnings.clone(),
                coefficients,
            })
        })
        .collect::<Result<_>>()?;

    Ok(MlrReport {
        granularity: opts.granularity,
        n: obs.len(),
        reference,
        kept_venues: collapse.map(|c| c.keep),
        models,
        lr_tests,
        effects_model: *effects_model,
        effects,
    })
}
