//! Draws outcome observations from a known multinomial logit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statfidelity_core::mlr::Observation;

/// Outcome levels; the last one is the reference.
pub const LEVELS: [&str; 3] = ["CorrectNHST", "Inconsistency", "Incomplete"];
pub const VENUES: [(&str, f64); 3] = [("A", 0.5), ("B", 0.3), ("C", 0.2)];
pub const YEARS: std::ops::RangeInclusive<i32> = 2006..=2016;

/// Log-odds against the reference around 2011: intercept, per-year slope,
/// venue B and venue C shifts (A is the baseline venue).
const CENTERED: [[f64; 4]; 2] = [[-1.4, 0.08, 0.5, -0.4], [-2.6, 0.15, -0.3, 0.7]];

/// True coefficients laid out like a fit with an uncentered year term and
/// venue reference `A`: rows follow `LEVELS[..2]`, columns are intercept,
/// year, venueB, venueC.
pub fn truth() -> Vec<Vec<f64>> {
    CENTERED
        .iter()
        .map(|c| vec![c[0] - c[1] * 2011.0, c[1], c[2], c[3]])
        .collect()
}

/// Category probabilities at a setting, computed without the library.
pub fn probabilities(coef: &[Vec<f64>], year: f64, venue: &str) -> Vec<f64> {
    let x = [1.0, year, f64::from(u8::from(venue == "B")), f64::from(u8::from(venue == "C"))];
    let mut eta: Vec<f64> = coef.iter().map(|b| b.iter().zip(&x).map(|(b, x)| b * x).sum()).collect();
    eta.push(0.0);
    let top = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = eta.iter().map(|e| (e - top).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

pub fn simulate_with(coef: &[Vec<f64>], n: usize, seed: u64) -> Vec<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let year = f64::from(rng.random_range(YEARS));
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let venue = VENUES
                .iter()
                .find(|(_, w)| {
                    acc += w;
                    u < acc
                })
                .map_or(VENUES[2].0, |v| v.0);
            let pi = probabilities(coef, year, venue);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let k = pi
                .iter()
                .position(|p| {
                    acc += p;
                    u < acc
                })
                .unwrap_or(LEVELS.len() - 1);
            Observation { outcome: LEVELS[k].to_string(), venue: venue.to_string(), year }
        })
        .collect()
}

pub fn simulate(n: usize, seed: u64) -> Vec<Observation> {
    simulate_with(&truth(), n, seed)
}
