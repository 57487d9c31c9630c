//! Multinomial logistic regression of outcome categories on venue and year.
//!
//! One outcome level is the reference; every other level gets a coefficient
//! vector for the log-odds against it. The likelihood is maximised by a
//! damped Newton iteration on all coefficients at once.

mod design;
mod report;

pub use design::{Design, Encoder, INTERCEPT};
pub use report::{
    coefficient_table, effect_display, lr_test, CoefficientRow, EffectPoint, FitComparison,
    LevelProbability, Setting,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// |b| above this suggests (quasi-)separation.
pub const SEPARATION_THRESHOLD: f64 = 15.0;

const MAX_ITERATIONS: usize = 200;
const SCORE_TOLERANCE: f64 = 1e-8;
const LL_TOLERANCE: f64 = 1e-12;
const MAX_HALVINGS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub outcome: String,
    pub venue: String,
    pub year: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct YearTerm {
    /// Subtract the mean year. Changes intercepts, not predictions.
    pub centered: bool,
}

/// Venues outside `keep` are merged into one level named `other`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collapse {
    pub keep: Vec<String>,
    pub other: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VenueTerm {
    /// Defaults to the most frequent level.
    pub reference: Option<String>,
    pub collapse: Option<Collapse>,
}

/// Predictors besides the intercept, which is always present.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub year: Option<YearTerm>,
    pub venue: Option<VenueTerm>,
}

impl PredictorSpec {
    pub fn null() -> Self {
        PredictorSpec::default()
    }

    pub fn describe(&self) -> String {
        let mut terms = vec!["1"];
        if self.venue.is_some() {
            terms.push("venue");
        }
        if self.year.is_some() {
            terms.push("year");
        }
        format!("outcome ~ {}", terms.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MLRModel {
    pub spec: PredictorSpec,
    pub encoder: Encoder,
    pub outcome_levels: Vec<String>,
    pub reference_level: String,
    pub predictor_names: Vec<String>,
    /// One row per non-reference outcome level (in `outcome_levels` order),
    /// one column per predictor.
    pub coefficients: Vec<Vec<f64>>,
    /// Covariance matrix indexed like `coefficients` read row by row.
    pub covariance: Vec<Vec<f64>>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub n: usize,
    pub outcome_counts: Vec<usize>,
    pub year_range: Option<(f64, f64)>,
    pub iterations: usize,
    pub max_abs_score: f64,
    pub warnings: Vec<String>,
}

impl MLRModel {
    pub fn n_params(&self) -> usize {
        self.coefficients.iter().map(Vec::len).sum()
    }

    /// Non-reference levels in coefficient-row order.
    pub fn contrast_levels(&self) -> Vec<&str> {
        self.outcome_levels
            .iter()
            .filter(|l| **l != self.reference_level)
            .map(String::as_str)
            .collect()
    }

    pub fn theta(&self) -> Vec<f64> {
        self.coefficients.iter().flatten().copied().collect()
    }

    /// Predicted probabilities for every outcome level.
    pub fn predict(&self, year: f64, venue: &str) -> Result<Vec<f64>> {
        let x = self.encoder.encode(year, venue)?;
        let reference = self
            .outcome_levels
            .iter()
            .position(|l| *l == self.reference_level)
            .expect("reference level");
        Ok(design::softmax_with_reference(&self.theta(), &x, self.outcome_levels.len(), reference))
    }
}

/// Scales the matrix to unit diagonal, factorises and inverts it.
fn scaled_inverse(info: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let m = info.len();
    let d: Vec<f64> = (0..m).map(|i| info[i][i].max(f64::MIN_POSITIVE).sqrt()).collect();
    let scaled = DMatrix::from_fn(m, m, |i, j| info[i][j] / (d[i] * d[j]));
    let inv = match scaled.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => scaled.try_inverse()?,
    };
    Some(DMatrix::from_fn(m, m, |i, j| inv[(i, j)] / (d[i] * d[j])))
}

fn newton_direction(info: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let m = info.len();
    let d: Vec<f64> = (0..m).map(|i| info[i][i].max(f64::MIN_POSITIVE).sqrt()).collect();
    let scaled = DMatrix::from_fn(m, m, |i, j| info[i][j] / (d[i] * d[j]));
    let rhs = DVector::from_fn(m, |i, _| g[i] / d[i]);
    let step = scaled.cholesky()?.solve(&rhs);
    let out: Vec<f64> = (0..m).map(|i| step[i] / d[i]).collect();
    out.iter().all(|x| x.is_finite()).then_some(out)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

/// Fits the model by damped Newton iteration.
///
/// A Newton step is halved while it lowers the log-likelihood; after
/// [`MAX_HALVINGS`] halvings a scaled gradient-ascent step is used instead.
/// Iteration stops when the largest score component is below 1e-8, or when
/// a full Newton step changes the log-likelihood by less than 1e-12
/// relative.
pub fn fit_multinomial(observations: &[Observation], spec: &PredictorSpec, reference: &str) -> Result<MLRModel> {
    let design = Design::new(observations, spec, reference)?;
    fit_design(&design, spec)
}

pub fn fit_design(design: &Design, spec: &PredictorSpec) -> Result<MLRModel> {
    let p = design.n_predictors();
    let contrasts = design.contrasts();
    let counts = design.outcome_counts();
    let n = design.n as f64;

    // Start from the intercept-only optimum.
    let mut theta = vec![0.0; design.n_params()];
    for (c, &k) in contrasts.iter().enumerate() {
        theta[c * p] = (counts[k] / counts[design.reference]).ln();
    }
    let null_ll: f64 = counts.iter().filter(|&&c| c > 0.0).map(|&c| c * (c / n).ln()).sum();

    let mut ll = design.log_likelihood(&theta);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let g = design.score(&theta);
        if max_abs(&g) < SCORE_TOLERANCE {
            converged = true;
            break;
        }
        iterations += 1;
        let info = design.information(&theta);
        let mut accepted = None;
        if let Some(dir) = newton_direction(&info, &g) {
            let mut step = 1.0;
            for _ in 0..=MAX_HALVINGS {
                let cand: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t + step * d).collect();
                let cand_ll = design.log_likelihood(&cand);
                if cand_ll.is_finite() && cand_ll >= ll - LL_TOLERANCE * ll.abs() {
                    accepted = Some((cand, cand_ll, step == 1.0));
                    break;
                }
                step /= 2.0;
            }
        }
        let (cand, cand_ll, full_newton) = match accepted {
            Some(a) => a,
            None => match gradient_step(design, &theta, &g, &info, ll) {
                Some((c, l)) => (c, l, false),
                None => break,
            },
        };
        let change = (cand_ll - ll).abs();
        theta = cand;
        ll = cand_ll;
        if full_newton && change <= LL_TOLERANCE * ll.abs() {
            converged = true;
            break;
        }
    }
    let g = design.score(&theta);
    if !converged && max_abs(&g) >= 1e-6 {
        return Err(Error::NoConvergence { routine: "fit_multinomial", iterations });
    }

    let info = design.information(&theta);
    let cov = scaled_inverse(&info)
        .ok_or_else(|| Error::Degenerate("information matrix is singular at the optimum".into()))?;
    let m = design.n_params();
    let covariance: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| 0.5 * (cov[(i, j)] + cov[(j, i)])).collect()).collect();

    let levels = &design.outcome_levels;
    let mut warnings = Vec::new();
    for (c, &k) in contrasts.iter().enumerate() {
        for j in 0..p {
            let b = theta[c * p + j];
            if b.abs() > SEPARATION_THRESHOLD {
                warnings.push(format!(
                    "{} / {}: |b| = {:.1} exceeds {SEPARATION_THRESHOLD}; the data may be separated",
                    levels[k], design.predictor_names[j], b.abs()
                ));
            }
        }
    }

    Ok(MLRModel {
        spec: spec.clone(),
        encoder: design.encoder.clone(),
        outcome_levels: levels.clone(),
        reference_level: levels[design.reference].clone(),
        predictor_names: design.predictor_names.clone(),
        coefficients: theta.chunks(p).map(<[f64]>::to_vec).collect(),
        covariance,
        log_likelihood: ll,
        null_log_likelihood: null_ll,
        n: design.n,
        outcome_counts: counts.iter().map(|&c| c as usize).collect(),
        year_range: design.year_range,
        iterations,
        max_abs_score: max_abs(&g),
        warnings,
    })
}

/// Gradient ascent scaled by the information diagonal, with halving.
fn gradient_step(design: &Design, theta: &[f64], g: &[f64], info: &[Vec<f64>], ll: f64) -> Option<(Vec<f64>, f64)> {
    let dir: Vec<f64> = g
        .iter()
        .enumerate()
        .map(|(i, gi)| gi / info[i][i].max(1e-12))
        .collect();
    let mut step = 1.0;
    for _ in 0..60 {
        let cand: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t + step * d).collect();
        let cand_ll = design.log_likelihood(&cand);
        if cand_ll.is_finite() && cand_ll > ll {
            return Some((cand, cand_ll));
        }
        step /= 2.0;
    }
    None
}
