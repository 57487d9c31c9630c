use serde::{Deserialize, Serialize};

use crate::kernel::{inverse_regularized_incomplete_beta, regularized_incomplete_beta, Probability};
use crate::{Error, Result};

/// Binary classification metrics. Rows of the underlying matrix are the
/// prediction, columns the reference. Ratios with a zero denominator are
/// `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub accuracy: Probability,
    pub acc_ci_lo: Probability,
    pub acc_ci_hi: Probability,
    /// No-information rate: share of the majority reference class.
    pub nir: Probability,
    /// One-sided exact binomial test of accuracy > NIR.
    pub p_acc_gt_nir: Probability,
    pub sensitivity: Option<Probability>,
    pub specificity: Option<Probability>,
    pub ppv: Option<Probability>,
    pub npv: Option<Probability>,
    pub f1: Option<Probability>,
}

fn ratio(num: u64, den: u64) -> Option<Probability> {
    (den > 0).then(|| Probability::clamped(num as f64 / den as f64).expect("finite ratio"))
}

/// Clopper–Pearson interval for `x` successes in `n` trials.
pub fn clopper_pearson(x: u64, n: u64, level: f64) -> Result<(f64, f64)> {
    if n == 0 || x > n {
        return Err(Error::Domain(format!("invalid binomial count {x} of {n}")));
    }
    let a = (1.0 - level) / 2.0;
    let (x, n) = (x as f64, n as f64);
    let lo = if x == 0.0 { 0.0 } else { inverse_regularized_incomplete_beta(x, n - x + 1.0, a)? };
    let hi = if x == n { 1.0 } else { inverse_regularized_incomplete_beta(x + 1.0, n - x, 1.0 - a)? };
    Ok((lo, hi))
}

/// P(X ≥ x) for X ~ Binomial(n, p).
pub fn binomial_upper_tail(x: u64, n: u64, p: f64) -> Result<f64> {
    if x == 0 {
        return Ok(1.0);
    }
    if x > n {
        return Ok(0.0);
    }
    if p <= 0.0 {
        return Ok(0.0);
    }
    if p >= 1.0 {
        return Ok(1.0);
    }
    regularized_incomplete_beta(x as f64, (n - x + 1) as f64, p)
}

pub fn confusion_metrics(tp: u64, fp: u64, fn_: u64, tn: u64) -> Result<ConfusionMetrics> {
    let total = tp + fp + fn_ + tn;
    if total == 0 {
        return Err(Error::Empty("confusion matrix has no observations".into()));
    }
    let correct = tp + tn;
    let (lo, hi) = clopper_pearson(correct, total, 0.95)?;
    let nir = (tp + fn_).max(fp + tn) as f64 / total as f64;
    let sensitivity = ratio(tp, tp + fn_);
    let ppv = ratio(tp, tp + fp);
    let f1 = ratio(2 * tp, 2 * tp + fp + fn_).filter(|_| tp > 0).or_else(|| {
        // With no true positives F1 is 0 if anything was predicted or
        // missed, undefined otherwise.
        (tp == 0 && fp + fn_ > 0).then_some(Probability::ZERO)
    });
    Ok(ConfusionMetrics {
        tp,
        fp,
        fn_,
        tn,
        accuracy: Probability::new(correct as f64 / total as f64)?,
        acc_ci_lo: Probability::clamped(lo)?,
        acc_ci_hi: Probability::clamped(hi)?,
        nir: Probability::new(nir)?,
        p_acc_gt_nir: Probability::clamped(binomial_upper_tail(correct, total, nir)?)?,
        sensitivity,
        specificity: ratio(tn, tn + fp),
        ppv,
        npv: ratio(tn, tn + fn_),
        f1,
    })
}
