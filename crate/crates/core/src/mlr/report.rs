use serde::{Deserialize, Serialize};

use super::MLRModel;
use crate::kernel::{erfc, normal_quantile, regularized_incomplete_gamma_upper, Probability};
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub term: String,
    pub b: f64,
    pub se: f64,
    pub z: f64,
    pub p: Probability,
    pub odds_ratio: f64,
    pub or_ci_lo: f64,
    pub or_ci_hi: f64,
}

impl CoefficientRow {
    pub fn new(term: &str, b: f64, se: f64) -> Result<Self> {
        if !(se > 0.0 && se.is_finite()) {
            return Err(Error::Domain(format!("{term}: standard error must be positive, got {se}")));
        }
        let z = b / se;
        Ok(CoefficientRow {
            term: term.to_string(),
            b,
            se,
            z,
            p: Probability::clamped(erfc(z.abs() / std::f64::consts::SQRT_2))?,
            odds_ratio: b.exp(),
            or_ci_lo: (b - Z_95 * se).exp(),
            or_ci_hi: (b + Z_95 * se).exp(),
        })
    }
}

/// Coefficients for one non-reference outcome level.
pub fn coefficient_table(model: &MLRModel, outcome_level: &str) -> Result<Vec<CoefficientRow>> {
    let c = model
        .contrast_levels()
        .iter()
        .position(|l| *l == outcome_level)
        .ok_or_else(|| Error::UnknownLevel(format!("outcome {outcome_level:?} (reference or absent)")))?;
    let p = model.predictor_names.len();
    model
        .predictor_names
        .iter()
        .enumerate()
        .map(|(j, term)| {
            let i = c * p + j;
            CoefficientRow::new(term, model.coefficients[c][j], model.covariance[i][i].sqrt())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitComparison {
    pub full: String,
    pub nested: String,
    pub chi_sq: f64,
    pub df: usize,
    pub p: Probability,
    pub mcfadden_r2: f64,
}

/// Likelihood-ratio test of `nested` against `full`.
pub fn lr_test(full: &MLRModel, nested: &MLRModel) -> Result<FitComparison> {
    let same_data = full.n == nested.n
        && full.outcome_levels == nested.outcome_levels
        && full.outcome_counts == nested.outcome_counts
        && full.reference_level == nested.reference_level;
    let terms_nested = nested
        .predictor_names
        .iter()
        .all(|t| full.predictor_names.contains(t));
    if !same_data || !terms_nested {
        return Err(Error::NotNested(format!(
            "{} is not nested in {}",
            nested.spec.describe(),
            full.spec.describe()
        )));
    }
    let diff = full.log_likelihood - nested.log_likelihood;
    // Allow for convergence tolerance; a clearly negative difference means
    // the fits are not comparable.
    if diff < -1e-6 * full.log_likelihood.abs().max(1.0) {
        return Err(Error::NotNested(format!(
            "nested model fits better by {:.3e}",
            -diff
        )));
    }
    let chi_sq = (2.0 * diff).max(0.0);
    let df = full.n_params() - nested.n_params();
    let p = if df == 0 {
        1.0
    } else {
        regularized_incomplete_gamma_upper(df as f64 / 2.0, chi_sq / 2.0)?
    };
    let mcfadden_r2 = if full.null_log_likelihood == 0.0 {
        0.0
    } else {
        (1.0 - full.log_likelihood / full.null_log_likelihood).max(0.0)
    };
    Ok(FitComparison {
        full: full.spec.describe(),
        nested: nested.spec.describe(),
        chi_sq,
        df,
        p: Probability::clamped(p)?,
        mcfadden_r2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub year: f64,
    pub venue: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelProbability {
    pub level: String,
    pub probability: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectPoint {
    pub setting: Setting,
    pub levels: Vec<LevelProbability>,
    /// The year lies outside the observed range.
    pub extrapolated: bool,
}

/// Predicted probabilities over `grid` with delta-method bands on each
/// level's logit.
pub fn effect_display(model: &MLRModel, grid: &[Setting], confidence: f64) -> Result<Vec<EffectPoint>> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Domain(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let zq = normal_quantile(0.5 + confidence / 2.0)?;
    let levels = &model.outcome_levels;
    let reference = levels.iter().position(|l| *l == model.reference_level).expect("reference");
    let contrasts: Vec<usize> = (0..levels.len()).filter(|&k| k != reference).collect();
    let p = model.predictor_names.len();
    grid.iter()
        .map(|setting| {
            let x = model.encoder.encode(setting.year, &setting.venue)?;
            let pi = model.predict(setting.year, &setting.venue)?;
            let extrapolated = model
                .year_range
                .is_some_and(|(lo, hi)| setting.year < lo || setting.year > hi);
            let levels = levels
                .iter()
                .enumerate()
                .map(|(k, level)| {
                    // d logit(π_k) / d β_l = (δ_kl − π_l) x / (1 − π_k)
                    let scale = 1.0 / (1.0 - pi[k]);
                    let grad: Vec<f64> = contrasts
                        .iter()
                        .flat_map(|&l| {
                            let w = (f64::from(u8::from(k == l)) - pi[l]) * scale;
                            x.iter().map(move |xi| w * xi)
                        })
                        .collect();
                    debug_assert_eq!(grad.len(), contrasts.len() * p);
                    let var: f64 = grad
                        .iter()
                        .enumerate()
                        .map(|(i, gi)| gi * grad.iter().enumerate().map(|(j, gj)| model.covariance[i][j] * gj).sum::<f64>())
                        .sum();
                    let logit = (pi[k] / (1.0 - pi[k])).ln();
                    let half = zq * var.max(0.0).sqrt();
                    let expit = |v: f64| 1.0 / (1.0 + (-v).exp());
                    LevelProbability {
                        level: level.clone(),
                        probability: pi[k],
                        lo: expit(logit - half),
                        hi: expit(logit + half),
                    }
                })
                .collect();
            Ok(EffectPoint { setting: setting.clone(), levels, extrapolated })
        })
        .collect()
}
