//! p-value recomputation from reported test statistics.
//!
//! All functions are pure and can be called from any number of threads.

mod special;

pub use special::{
    erfc, inverse_regularized_incomplete_beta, ln_beta, ln_gamma, noncentral_chi_square_sf,
    normal_cdf, normal_quantile, regularized_incomplete_beta,
    regularized_incomplete_beta_complement, regularized_incomplete_gamma_lower,
    regularized_incomplete_gamma_upper,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::Domain(format!("probability out of [0, 1]: {value}")))
        }
    }

    /// Clamps into `[0, 1]`; NaN is rejected.
    pub fn clamped(value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::Domain("probability is NaN".into()));
        }
        Ok(Probability(value.clamp(0.0, 1.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatKind {
    StudentT,
    F,
    ChiSq,
    Z,
    PearsonR,
}

impl StatKind {
    /// Whether a one-tailed reading of the statistic exists.
    pub fn is_directional(self) -> bool {
        matches!(self, StatKind::StudentT | StatKind::Z | StatKind::PearsonR)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            StatKind::StudentT => "t",
            StatKind::F => "F",
            StatKind::ChiSq => "χ2",
            StatKind::Z => "z",
            StatKind::PearsonR => "r",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Tails {
    One,
    #[default]
    Two,
}

/// A typed test statistic with its degrees of freedom.
///
/// `df1` is absent for `Z`; `df2` is only present for `F`; `n` (sample size)
/// is only present for `PearsonR`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestStatistic {
    pub kind: StatKind,
    pub value: f64,
    pub df1: Option<f64>,
    pub df2: Option<f64>,
    pub n: Option<u64>,
    pub tails: Tails,
}

impl TestStatistic {
    pub fn t(value: f64, df: f64) -> Self {
        Self::raw(StatKind::StudentT, value, Some(df), None, None)
    }

    pub fn f(value: f64, df1: f64, df2: f64) -> Self {
        Self::raw(StatKind::F, value, Some(df1), Some(df2), None)
    }

    pub fn chi_sq(value: f64, df: f64) -> Self {
        Self::raw(StatKind::ChiSq, value, Some(df), None, None)
    }

    pub fn z(value: f64) -> Self {
        Self::raw(StatKind::Z, value, None, None, None)
    }

    /// Pearson correlation from a sample of size `n`.
    pub fn r(value: f64, n: u64) -> Self {
        Self::raw(StatKind::PearsonR, value, Some(n as f64 - 2.0), None, Some(n))
    }

    fn raw(kind: StatKind, value: f64, df1: Option<f64>, df2: Option<f64>, n: Option<u64>) -> Self {
        TestStatistic {
            kind,
            value,
            df1,
            df2,
            n,
            tails: Tails::Two,
        }
    }

    pub fn with_tails(mut self, tails: Tails) -> Self {
        self.tails = tails;
        self
    }

    pub fn with_value(mut self, value: f64) -> Self {
        self.value = value;
        self
    }

    /// Checks the type invariants.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(d) if d.is_finite() && d > 0.0 => Ok(d),
            Some(d) => Err(Error::Domain(format!("{name} must be positive, got {d}"))),
            None => Err(Error::Domain(format!("{name} is required for {:?}", self.kind))),
        };
        if self.value.is_nan() {
            return Err(Error::Domain("statistic value is NaN".into()));
        }
        match self.kind {
            StatKind::StudentT => {
                positive("df", self.df1)?;
            }
            StatKind::F => {
                positive("df1", self.df1)?;
                positive("df2", self.df2)?;
                if self.value < 0.0 {
                    return Err(Error::Domain(format!("F must be non-negative, got {}", self.value)));
                }
            }
            StatKind::ChiSq => {
                positive("df", self.df1)?;
                if self.value < 0.0 {
                    return Err(Error::Domain(format!(
                        "chi-square must be non-negative, got {}",
                        self.value
                    )));
                }
            }
            StatKind::Z => {}
            StatKind::PearsonR => {
                match self.n {
                    Some(n) if n >= 3 => {}
                    other => {
                        return Err(Error::Domain(format!(
                            "correlation needs a sample size of at least 3, got {other:?}"
                        )))
                    }
                }
                if !(self.value > -1.0 && self.value < 1.0) {
                    return Err(Error::Domain(format!(
                        "correlation must lie in (-1, 1), got {}",
                        self.value
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Two-tailed upper-tail probability of |t| with `df` degrees of freedom.
fn t_two_tailed(t: f64, df: f64) -> Result<f64> {
    let t2 = t * t;
    if t2.is_infinite() {
        return Ok(0.0);
    }
    // P(|T| ≥ t) = I_{df/(df+t²)}(df/2, 1/2)
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2))
}

/// Upper-tail probability of F(df1, df2).
fn f_upper(f: f64, df1: f64, df2: f64) -> Result<f64> {
    if f == 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))
}

/// Converts a correlation to the equivalent t statistic on n − 2 df.
pub fn r_to_t(r: f64, n: u64) -> f64 {
    let df = n as f64 - 2.0;
    if r.abs() >= 1.0 {
        return r.signum() * f64::INFINITY;
    }
    r * (df / (1.0 - r * r)).sqrt()
}

/// Recomputes the p-value implied by a test statistic.
///
/// Two-tailed t and z use both tails; one-tailed halves them. F and χ² use
/// the upper tail. Correlations are converted to t on n − 2 df.
pub fn p_from_statistic(stat: &TestStatistic) -> Result<Probability> {
    stat.validate()?;
    let halve = |p: f64| match stat.tails {
        Tails::Two => p,
        Tails::One => p / 2.0,
    };
    let p = match stat.kind {
        StatKind::StudentT => halve(t_two_tailed(stat.value, stat.df1.unwrap_or_default())?),
        StatKind::F => f_upper(
            stat.value,
            stat.df1.unwrap_or_default(),
            stat.df2.unwrap_or_default(),
        )?,
        StatKind::ChiSq => {
            regularized_incomplete_gamma_upper(stat.df1.unwrap_or_default() / 2.0, stat.value / 2.0)?
        }
        StatKind::Z => halve(erfc(stat.value.abs() / std::f64::consts::SQRT_2)),
        StatKind::PearsonR => {
            let n = stat.n.unwrap_or_default();
            halve(t_two_tailed(r_to_t(stat.value, n), n as f64 - 2.0)?)
        }
    };
    Probability::clamped(p)
}

/// Like [`p_from_statistic`], but accepts magnitudes at the edge of the
/// domain (|r| = 1, infinite statistics) that arise from rounding intervals.
pub(crate) fn p_at_magnitude(stat: &TestStatistic, magnitude: f64) -> Result<f64> {
    let halve = |p: f64| match stat.tails {
        Tails::Two => p,
        Tails::One => p / 2.0,
    };
    let p = match stat.kind {
        StatKind::PearsonR => {
            let n = stat.n.ok_or_else(|| Error::Domain("correlation without n".into()))?;
            if n < 3 {
                return Err(Error::Domain(format!("correlation needs n ≥ 3, got {n}")));
            }
            if magnitude >= 1.0 {
                0.0
            } else {
                halve(t_two_tailed(r_to_t(magnitude, n), n as f64 - 2.0)?)
            }
        }
        _ => {
            if magnitude.is_infinite() {
                0.0
            } else {
                p_from_statistic(&stat.with_value(magnitude))?.value()
            }
        }
    };
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_example_from_fidelity_table() {
        let p = p_from_statistic(&TestStatistic::t(2.52, 24.0)).unwrap().value();
        assert!((p - 0.018_797_009_453_311_5).abs() < 1e-12, "{p}");
        assert!((0.0185..0.0195).contains(&p));
    }

    #[test]
    fn z_zero_is_one() {
        assert_eq!(p_from_statistic(&TestStatistic::z(0.0)).unwrap().value(), 1.0);
    }

    #[test]
    fn chi_square_examples() {
        let p = p_from_statistic(&TestStatistic::chi_sq(0.197, 2.0)).unwrap().value();
        assert!((p - (-0.197_f64 / 2.0).exp()).abs() < 1e-14);
        assert!((p - 0.9062).abs() < 5e-5);
        let p = p_from_statistic(&TestStatistic::chi_sq(88.803, 3.0)).unwrap().value();
        assert!(p < 0.001);
    }

    #[test]
    fn invariant_violations_are_domain_errors() {
        assert!(p_from_statistic(&TestStatistic::f(-1.0, 1.0, 10.0)).is_err());
        assert!(p_from_statistic(&TestStatistic::chi_sq(-0.1, 1.0)).is_err());
        assert!(p_from_statistic(&TestStatistic::t(1.0, 0.0)).is_err());
        assert!(p_from_statistic(&TestStatistic::r(1.0, 20)).is_err());
        assert!(p_from_statistic(&TestStatistic::r(0.2, 2)).is_err());
        assert!(p_from_statistic(&TestStatistic::z(f64::NAN)).is_err());
    }

    #[test]
    fn correlation_goes_through_t() {
        let r = 0.32;
        let n = 50;
        let t = r * (48.0_f64 / (1.0 - r * r)).sqrt();
        let via_r = p_from_statistic(&TestStatistic::r(r, n)).unwrap();
        let via_t = p_from_statistic(&TestStatistic::t(t, 48.0)).unwrap();
        assert!((via_r.value() - via_t.value()).abs() < 1e-15);
    }

    #[test]
    fn boundary_values_are_finite() {
        assert_eq!(p_from_statistic(&TestStatistic::f(0.0, 2.0, 30.0)).unwrap().value(), 1.0);
        assert_eq!(p_from_statistic(&TestStatistic::chi_sq(0.0, 4.0)).unwrap().value(), 1.0);
        let tiny = p_from_statistic(&TestStatistic::t(80.0, 200.0)).unwrap().value();
        assert!(tiny > 0.0 && tiny < 1e-100);
    }

    #[test]
    fn probability_rejects_out_of_range() {
        assert!(Probability::new(1.2).is_err());
        assert!(Probability::new(-0.1).is_err());
        assert_eq!(Probability::clamped(1.0 + 1e-16).unwrap(), Probability::ONE);
    }
}
