//! Rounding-tolerant classification of reported tests.
//!
//! A report is consistent when some true statistic that rounds to the
//! printed one yields a p-value compatible with the printed p. Everything
//! is done on intervals: the statistic's rounding interval maps to an
//! interval of recomputed p-values (p is monotone in |statistic|), which is
//! then intersected with the reported constraint.

mod paper;

pub use paper::{aggregate_paper, PaperCategory, PaperOutcome};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::extract::{detect_one_tailed_context, RawReport, Relation, DEFAULT_ONE_TAILED_KEYWORDS};
use crate::kernel::{p_at_magnitude, Probability, StatKind, Tails};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub alpha: f64,
    pub one_tailed_detection: bool,
    pub one_tailed_keywords: Vec<String>,
    /// The paper corrected for multiple comparisons; decision errors are
    /// downgraded to inconsistencies.
    pub mcc_used: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            alpha: 0.05,
            one_tailed_detection: true,
            one_tailed_keywords: DEFAULT_ONE_TAILED_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            mcc_used: false,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.alpha > 0.0 && self.alpha < 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("alpha must lie in (0, 1), got {}", self.alpha)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestOutcome {
    CorrectNHST,
    Inconsistency,
    DecisionError,
}

impl fmt::Display for TestOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedTest {
    pub raw: RawReport,
    pub recomputed_p_lo: Probability,
    pub recomputed_p_hi: Probability,
    pub outcome: TestOutcome,
    pub one_tailed_applied: bool,
    /// Reported p minus the midpoint of the recomputed interval; only for
    /// `p = x` reports.
    pub p_difference: Option<f64>,
    /// `Some(true)` when the report claims significance at α, `None` when
    /// the claim straddles α.
    pub claims_significance: Option<bool>,
    /// Same for the recomputed interval.
    pub recomputed_significance: Option<bool>,
}

/// The values that round half-up to `value_text`: `[v − h, v + h)` with
/// `h = 0.5·10^−d` for `d` printed decimals.
///
/// Exponent notation (`1.2e-5`) scales `h` accordingly.
pub fn rounding_interval(value_text: &str) -> Result<(f64, f64)> {
    let text = value_text.trim();
    let v: f64 = text
        .parse()
        .map_err(|_| Error::Parse(format!("not a decimal number: {value_text:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("not a finite number: {value_text:?}")));
    }
    let (mantissa, exponent) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (
            m,
            e.parse::<i32>()
                .map_err(|_| Error::Parse(format!("bad exponent in {value_text:?}")))?,
        ),
        None => (text, 0),
    };
    let decimals = mantissa.split_once('.').map(|(_, f)| f.len() as i32).unwrap_or(0);
    let h = 0.5 * 10f64.powi(exponent - decimals);
    Ok((v - h, v + h))
}

/// Range of |statistic| compatible with the printed statistic and its
/// operator, clamped to the distribution's domain.
fn magnitude_range(raw: &RawReport) -> Result<(f64, f64)> {
    let (lo, hi) = rounding_interval(&raw.statistic_text)?;
    let (mag_lo, mag_hi) = if lo <= 0.0 && hi >= 0.0 {
        (0.0, lo.abs().max(hi.abs()))
    } else {
        (lo.abs().min(hi.abs()), lo.abs().max(hi.abs()))
    };
    let cap = if raw.statistic.kind == StatKind::PearsonR { 1.0 } else { f64::INFINITY };
    let (mag_lo, mag_hi) = match raw.statistic_operator {
        Relation::Eq => (mag_lo, mag_hi),
        Relation::Lt | Relation::Leq => (0.0, mag_hi),
        Relation::Gt | Relation::Geq => (mag_lo, cap),
    };
    Ok((mag_lo.min(cap), mag_hi.min(cap)))
}

/// Interval of p-values implied by the printed statistic under `tails`.
pub fn recomputed_interval(raw: &RawReport, tails: Tails) -> Result<(f64, f64)> {
    raw.statistic.with_tails(tails).validate()?;
    let stat = raw.statistic.with_tails(tails);
    let (mag_lo, mag_hi) = magnitude_range(raw)?;
    let p_hi = p_at_magnitude(&stat, mag_lo)?;
    let p_lo = p_at_magnitude(&stat, mag_hi)?;
    Ok((p_lo.min(p_hi), p_hi.max(p_lo)))
}

/// Whether the reported p constraint intersects `[lo, hi]`.
fn compatible(raw: &RawReport, (lo, hi): (f64, f64)) -> Result<bool> {
    let b = raw.p_value;
    Ok(match raw.p_operator {
        Relation::Eq => {
            let (plo, phi) = rounding_interval(&raw.p_text)?;
            lo < phi && plo <= hi
        }
        Relation::Lt => lo < b,
        Relation::Leq => lo <= b,
        Relation::Gt => hi > b,
        Relation::Geq => hi >= b,
    })
}

/// Significance claimed by the reported p at `alpha`; `None` if it straddles.
fn claimed_significance(raw: &RawReport, alpha: f64) -> Result<Option<bool>> {
    let b = raw.p_value;
    Ok(match raw.p_operator {
        Relation::Eq => {
            let (plo, phi) = rounding_interval(&raw.p_text)?;
            side_of_alpha(plo.max(0.0), phi, alpha)
        }
        Relation::Lt | Relation::Leq => (b <= alpha).then_some(true),
        Relation::Gt | Relation::Geq => (b >= alpha).then_some(false),
    })
}

/// `Some(true)` if `[lo, hi)` lies below α, `Some(false)` if at or above.
fn side_of_alpha(lo: f64, hi: f64, alpha: f64) -> Option<bool> {
    if hi <= alpha {
        Some(true)
    } else if lo >= alpha {
        Some(false)
    } else {
        None
    }
}

/// Classifies one report.
pub fn evaluate_test(raw: &RawReport, cfg: &Config) -> Result<EvaluatedTest> {
    cfg.validate()?;
    let two = recomputed_interval(raw, Tails::Two)?;
    let mut interval = two;
    let mut consistent = compatible(raw, two)?;
    let mut one_tailed_applied = false;
    if !consistent
        && cfg.one_tailed_detection
        && raw.statistic.kind.is_directional()
        && detect_one_tailed_context(&raw.context, &cfg.one_tailed_keywords)
    {
        let one = recomputed_interval(raw, Tails::One)?;
        if compatible(raw, one)? {
            interval = one;
            consistent = true;
            one_tailed_applied = true;
        }
    }

    let claims = claimed_significance(raw, cfg.alpha)?;
    // Strictly below α is significant; a recomputed p that can equal α sits
    // on the boundary and is left undecided.
    let recomputed = if interval.1 < cfg.alpha {
        Some(true)
    } else if interval.0 >= cfg.alpha {
        Some(false)
    } else {
        None
    };
    let outcome = if consistent {
        TestOutcome::CorrectNHST
    } else {
        match (claims, recomputed) {
            (Some(c), Some(r)) if c != r && !cfg.mcc_used => TestOutcome::DecisionError,
            _ => TestOutcome::Inconsistency,
        }
    };
    let p_difference =
        (raw.p_operator == Relation::Eq).then_some(raw.p_value - 0.5 * (interval.0 + interval.1));
    Ok(EvaluatedTest {
        raw: raw.clone(),
        recomputed_p_lo: Probability::clamped(interval.0)?,
        recomputed_p_hi: Probability::clamped(interval.1)?,
        outcome,
        one_tailed_applied,
        p_difference,
        claims_significance: claims,
        recomputed_significance: recomputed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub center: f64,
    pub count: usize,
}

/// Histogram of `p_difference` over `p = x` reports, with bins centred on
/// multiples of `bin_width` and no gaps between the first and last bin.
pub fn p_difference_histogram(tests: &[EvaluatedTest], bin_width: f64) -> Result<Vec<HistogramBin>> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::Domain(format!("bin width must be positive, got {bin_width}")));
    }
    let keys: Vec<i64> = tests
        .iter()
        .filter_map(|t| t.p_difference)
        .map(|d| (d / bin_width).round() as i64)
        .collect();
    let (Some(&min), Some(&max)) = (keys.iter().min(), keys.iter().max()) else {
        return Ok(Vec::new());
    };
    let mut counts = vec![0usize; (max - min + 1) as usize];
    for k in keys {
        counts[(k - min) as usize] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            center: (min + i as i64) as f64 * bin_width,
            count,
        })
        .collect())
}
