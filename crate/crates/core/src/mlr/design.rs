use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Observation, PredictorSpec};
use crate::consistency::PaperCategory;
use crate::{Error, Result};

pub const INTERCEPT: &str = "(Intercept)";

/// Turns (year, venue) into a design row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    /// Subtracted from the year; `None` when year is not in the model.
    pub year_center: Option<f64>,
    /// Venue levels with a dummy column, in column order.
    pub venue_levels: Vec<String>,
    /// Venue level absorbed in the intercept; `None` when venue is not in
    /// the model.
    pub venue_reference: Option<String>,
    /// Venues not listed here are relabelled as `collapse_other`.
    pub collapse_keep: Option<Vec<String>>,
    pub collapse_other: String,
}

impl Encoder {
    pub fn names(&self) -> Vec<String> {
        let mut names = vec![INTERCEPT.to_string()];
        if self.year_center.is_some() {
            names.push("year".to_string());
        }
        names.extend(self.venue_levels.iter().map(|v| format!("venue{v}")));
        names
    }

    pub fn venue_label(&self, venue: &str) -> String {
        match &self.collapse_keep {
            Some(keep) if !keep.iter().any(|k| k == venue) => self.collapse_other.clone(),
            _ => venue.to_string(),
        }
    }

    pub fn encode(&self, year: f64, venue: &str) -> Result<Vec<f64>> {
        let mut row = vec![1.0];
        if let Some(c) = self.year_center {
            row.push(year - c);
        }
        if let Some(reference) = &self.venue_reference {
            let v = self.venue_label(venue);
            if &v != reference && !self.venue_levels.contains(&v) {
                return Err(Error::UnknownLevel(format!("venue {v:?}")));
            }
            row.extend(self.venue_levels.iter().map(|l| f64::from(u8::from(*l == v))));
        }
        Ok(row)
    }
}

/// Observations collapsed into distinct design rows with outcome counts.
#[derive(Debug, Clone)]
pub struct Design {
    pub encoder: Encoder,
    pub predictor_names: Vec<String>,
    pub outcome_levels: Vec<String>,
    pub reference: usize,
    rows: Vec<Vec<f64>>,
    counts: Vec<Vec<f64>>,
    pub n: usize,
    pub year_range: Option<(f64, f64)>,
}

fn outcome_order(level: &str) -> (usize, String) {
    let rank = PaperCategory::parse(level).map_or(usize::MAX, |c| c as usize);
    (rank, level.to_string())
}

impl Design {
    pub fn new(observations: &[Observation], spec: &PredictorSpec, reference: &str) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::Empty("no observations".into()));
        }
        let mut levels: Vec<String> = observations.iter().map(|o| o.outcome.clone()).collect();
        levels.sort_by_key(|l| outcome_order(l));
        levels.dedup();
        if levels.len() < 2 {
            return Err(Error::Degenerate(format!("only one outcome level present: {levels:?}")));
        }
        let reference_idx = levels
            .iter()
            .position(|l| l == reference)
            .ok_or_else(|| Error::UnknownLevel(format!("reference outcome {reference:?}")))?;

        let years: Vec<f64> = observations.iter().map(|o| o.year).collect();
        let year_range = years
            .iter()
            .fold(None, |acc: Option<(f64, f64)>, &y| Some(acc.map_or((y, y), |(lo, hi)| (lo.min(y), hi.max(y)))));
        let year_center = spec.year.map(|y| {
            if y.centered {
                years.iter().sum::<f64>() / years.len() as f64
            } else {
                0.0
            }
        });

        let mut encoder = Encoder {
            year_center,
            venue_levels: Vec::new(),
            venue_reference: None,
            collapse_keep: None,
            collapse_other: String::new(),
        };
        if let Some(venue) = &spec.venue {
            if let Some(c) = &venue.collapse {
                encoder.collapse_keep = Some(c.keep.clone());
                encoder.collapse_other = c.other.clone();
            }
            let mut freq: BTreeMap<String, usize> = BTreeMap::new();
            for o in observations {
                *freq.entry(encoder.venue_label(&o.venue)).or_default() += 1;
            }
            let reference = match &venue.reference {
                Some(r) if freq.contains_key(r) => r.clone(),
                Some(r) => return Err(Error::UnknownLevel(format!("reference venue {r:?}"))),
                // Most frequent level; ties go to the alphabetically first.
                None => freq
                    .iter()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                    .map(|(k, _)| k.clone())
                    .expect("non-empty"),
            };
            encoder.venue_levels = freq.keys().filter(|k| **k != reference).cloned().collect();
            encoder.venue_reference = Some(reference);
        }

        let mut grouped: BTreeMap<Vec<u64>, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for o in observations {
            let row = encoder.encode(o.year, &o.venue)?;
            let key = row.iter().map(|x| x.to_bits()).collect();
            let k = levels.binary_search_by_key(&outcome_order(&o.outcome), |l| outcome_order(l))
                .expect("level present");
            let entry = grouped.entry(key).or_insert_with(|| (row, vec![0.0; levels.len()]));
            entry.1[k] += 1.0;
        }
        let (rows, counts) = grouped.into_values().unzip();
        let design = Design {
            predictor_names: encoder.names(),
            encoder,
            outcome_levels: levels,
            reference: reference_idx,
            rows,
            counts,
            n: observations.len(),
            year_range,
        };
        design.check_rank()?;
        Ok(design)
    }

    pub fn n_predictors(&self) -> usize {
        self.predictor_names.len()
    }

    /// Indices of the non-reference outcome levels, in parameter order.
    pub fn contrasts(&self) -> Vec<usize> {
        (0..self.outcome_levels.len()).filter(|&k| k != self.reference).collect()
    }

    pub fn n_params(&self) -> usize {
        (self.outcome_levels.len() - 1) * self.n_predictors()
    }

    pub fn outcome_counts(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.outcome_levels.len()];
        for c in &self.counts {
            for (o, x) in out.iter_mut().zip(c) {
                *o += x;
            }
        }
        out
    }

    /// Modified Gram–Schmidt over the distinct rows; columns that vanish
    /// after projection are collinear with earlier ones.
    fn check_rank(&self) -> Result<()> {
        let p = self.n_predictors();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut dependent = Vec::new();
        for j in 0..p {
            let mut v: Vec<f64> = self.rows.iter().map(|r| r[j]).collect();
            let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for q in &basis {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm0 == 0.0 || norm <= 1e-10 * norm0 {
                dependent.push(self.predictor_names[j].clone());
            } else {
                basis.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
        if dependent.is_empty() {
            Ok(())
        } else {
            Err(Error::RankDeficient(dependent))
        }
    }

    /// Category probabilities for design row `x` at parameters `theta`
    /// (contrast-major, predictor-minor).
    pub fn probabilities(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        softmax_with_reference(theta, x, self.outcome_levels.len(), self.reference)
    }

    pub fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let p = self.n_predictors();
        let contrasts = self.contrasts();
        self.rows
            .iter()
            .zip(&self.counts)
            .map(|(x, counts)| {
                let eta: Vec<f64> = (0..contrasts.len()).map(|c| dot(&theta[c * p..(c + 1) * p], x)).collect();
                let m = eta.iter().fold(0.0f64, |a, &b| a.max(b));
                let lse = m + ((-m).exp() + eta.iter().map(|e| (e - m).exp()).sum::<f64>()).ln();
                let total: f64 = counts.iter().sum();
                let fit: f64 = contrasts.iter().zip(&eta).map(|(&k, e)| counts[k] * e).sum();
                fit - total * lse
            })
            .sum()
    }

    pub fn score(&self, theta: &[f64]) -> Vec<f64> {
        let p = self.n_predictors();
        let contrasts = self.contrasts();
        let mut g = vec![0.0; self.n_params()];
        for (x, counts) in self.rows.iter().zip(&self.counts) {
            let pi = self.probabilities(theta, x);
            let total: f64 = counts.iter().sum();
            for (c, &k) in contrasts.iter().enumerate() {
                let r = counts[k] - total * pi[k];
                for j in 0..p {
                    g[c * p + j] += r * x[j];
                }
            }
        }
        g
    }

    /// Expected (= observed, for the canonical link) information matrix.
    pub fn information(&self, theta: &[f64]) -> Vec<Vec<f64>> {
        let p = self.n_predictors();
        let contrasts = self.contrasts();
        let m = self.n_params();
        let mut info = vec![vec![0.0; m]; m];
        for (x, counts) in self.rows.iter().zip(&self.counts) {
            let pi = self.probabilities(theta, x);
            let total: f64 = counts.iter().sum();
            for (c, &k) in contrasts.iter().enumerate() {
                for (d, &l) in contrasts.iter().enumerate() {
                    let w = total * pi[k] * (f64::from(u8::from(k == l)) - pi[l]);
                    for i in 0..p {
                        for j in 0..p {
                            info[c * p + i][d * p + j] += w * x[i] * x[j];
                        }
                    }
                }
            }
        }
        info
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn softmax_with_reference(theta: &[f64], x: &[f64], k: usize, reference: usize) -> Vec<f64> {
    let p = x.len();
    let mut eta = vec![0.0; k];
    let mut c = 0;
    for (level, e) in eta.iter_mut().enumerate() {
        if level != reference {
            *e = dot(&theta[c * p..(c + 1) * p], x);
            c += 1;
        }
    }
    let m = eta.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = eta.iter().map(|e| (e - m).exp()).collect();
    let s: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / s).collect()
}
