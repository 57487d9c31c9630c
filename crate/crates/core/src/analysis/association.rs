use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Hypergeometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ContingencyTable;
use crate::kernel::{noncentral_chi_square_sf, regularized_incomplete_gamma_upper, Probability};
use crate::{Error, Result};

pub const DEFAULT_REPLICATES: usize = 100_000;
pub const DEFAULT_BOOTSTRAP_REPLICATES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;

/// Below this expected count the χ² approximation is distrusted.
pub const MIN_EXPECTED: f64 = 5.0;

const CI_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssociationMethod {
    ChiSquare,
    FisherMC,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationResult {
    pub method: AssociationMethod,
    /// Pearson χ²; reported for both methods.
    pub statistic: Option<f64>,
    /// Present iff `method` is `ChiSquare`.
    pub df: Option<u64>,
    pub p: Probability,
    pub cramers_v: f64,
    pub v_ci_lo: f64,
    pub v_ci_hi: f64,
    pub mc_standard_error: Option<f64>,
    pub replicates: Option<usize>,
    pub min_expected: f64,
    pub warnings: Vec<String>,
}

/// How the 95% interval for Cramér's V is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[derive(Default)]
pub enum VCiMethod {
    /// Inverts the noncentral χ² distribution in its noncentrality.
    #[default]
    NoncentralChiSquare,
    /// Percentile bootstrap over multinomial resamples at fixed n.
    Bootstrap { replicates: usize, seed: u64 },
}


/// Pearson χ² of a table with positive margins.
pub fn pearson_chi_square(table: &ContingencyTable) -> Result<f64> {
    table.require_positive_margins()?;
    let expected = table.expected();
    Ok(table
        .counts
        .iter()
        .flatten()
        .zip(expected.iter().flatten())
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum())
}

fn v_scale(table: &ContingencyTable) -> f64 {
    table.total() as f64 * ((table.n_rows().min(table.n_cols()) - 1) as f64)
}

pub fn cramers_v(table: &ContingencyTable) -> Result<f64> {
    let chi = pearson_chi_square(table)?;
    Ok((chi / v_scale(table)).sqrt().min(1.0))
}

/// χ² test of independence with Cramér's V and its noncentral 95% interval.
pub fn chisq_independence(table: &ContingencyTable) -> Result<AssociationResult> {
    chisq_independence_with(table, VCiMethod::NoncentralChiSquare)
}

pub fn chisq_independence_with(table: &ContingencyTable, ci: VCiMethod) -> Result<AssociationResult> {
    let chi = pearson_chi_square(table)?;
    let df = ((table.n_rows() - 1) * (table.n_cols() - 1)) as u64;
    let p = regularized_incomplete_gamma_upper(df as f64 / 2.0, chi / 2.0)?;
    let v = (chi / v_scale(table)).sqrt().min(1.0);
    let (lo, hi) = cramers_v_ci(table, ci)?;
    let min_expected = table.min_expected();
    let mut warnings = Vec::new();
    if min_expected < MIN_EXPECTED {
        warnings.push(format!(
            "smallest expected count {min_expected:.2} is below {MIN_EXPECTED}; the χ² approximation may be poor"
        ));
    }
    Ok(AssociationResult {
        method: AssociationMethod::ChiSquare,
        statistic: Some(chi),
        df: Some(df),
        p: Probability::clamped(p)?,
        cramers_v: v,
        v_ci_lo: lo.min(v),
        v_ci_hi: hi.max(v),
        mc_standard_error: None,
        replicates: None,
        min_expected,
        warnings,
    })
}

/// 95% interval for Cramér's V.
pub fn cramers_v_ci(table: &ContingencyTable, method: VCiMethod) -> Result<(f64, f64)> {
    if table.total() < 2 {
        return Err(Error::Degenerate("Cramér's V needs at least two observations".into()));
    }
    match method {
        VCiMethod::NoncentralChiSquare => noncentral_v_ci(table),
        VCiMethod::Bootstrap { replicates, seed } => bootstrap_v_ci(table, replicates, seed),
    }
}

fn noncentral_v_ci(table: &ContingencyTable) -> Result<(f64, f64)> {
    let chi = pearson_chi_square(table)?;
    let df = ((table.n_rows() - 1) * (table.n_cols() - 1)) as f64;
    let tail = (1.0 - CI_LEVEL) / 2.0;
    let lo = ncp_for_tail(chi, df, tail)?;
    let hi = ncp_for_tail(chi, df, 1.0 - tail)?;
    let scale = v_scale(table);
    Ok(((lo / scale).sqrt().min(1.0), (hi / scale).sqrt().min(1.0)))
}

/// Noncentrality λ with P(X ≥ x | df, λ) = target, or 0 when even λ = 0
/// exceeds the target. The tail probability increases with λ.
fn ncp_for_tail(x: f64, df: f64, target: f64) -> Result<f64> {
    let sf = |ncp: f64| noncentral_chi_square_sf(x, df, ncp);
    if sf(0.0)? >= target {
        return Ok(0.0);
    }
    let mut hi = (x + df).max(1.0);
    while sf(hi)? < target {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::NoConvergence { routine: "ncp_for_tail", iterations: 30 });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sf(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn bootstrap_v_ci(table: &ContingencyTable, replicates: usize, seed: u64) -> Result<(f64, f64)> {
    if replicates < 2 {
        return Err(Error::Domain(format!("need at least 2 bootstrap replicates, got {replicates}")));
    }
    let n = table.total();
    let cells: Vec<f64> = table.counts.iter().flatten().map(|&c| c as f64 / n as f64).collect();
    let (rows, cols) = (table.n_rows(), table.n_cols());
    let mut vs: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(seed, i);
            let counts = multinomial(&mut rng, n, &cells);
            let resampled = ContingencyTable::from_counts(counts.chunks(cols).map(<[u64]>::to_vec).collect())
                .expect("same shape");
            debug_assert_eq!(resampled.n_rows(), rows);
            // A resample that loses a whole row or column shows no association
            // along it; V is computed on what remains.
            resampled.drop_empty().and_then(|t| cramers_v(&t)).unwrap_or(0.0)
        })
        .collect();
    vs.sort_by(f64::total_cmp);
    let tail = (1.0 - CI_LEVEL) / 2.0;
    Ok((quantile(&vs, tail), quantile(&vs, 1.0 - tail)))
}

/// Multinomial draw by conditional binomials.
fn multinomial<R: Rng>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    // The last positive cell takes the remainder so round-off never leaks
    // counts into zero-probability cells.
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut left = n;
    let mut mass = 1.0;
    probs
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let x = if k == last {
                left
            } else if k > last || p <= 0.0 || left == 0 {
                0
            } else {
                let q = (p / mass).clamp(0.0, 1.0);
                rng.sample(Binomial::new(left, q).expect("valid binomial"))
            };
            left -= x;
            mass -= p;
            x
        })
        .collect()
}

/// Type-7 quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let i = h.floor() as usize;
    let frac = h - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Monte Carlo Fisher exact test for an r×c table.
///
/// Tables with the observed margins are drawn from their null distribution
/// and the p-value counts those no more probable than the observed one.
/// Replicate `i` uses its own ChaCha stream, so results do not depend on the
/// number of worker threads.
pub fn fisher_exact_mc(table: &ContingencyTable, replicates: usize, seed: u64) -> Result<AssociationResult> {
    if replicates < 1000 {
        return Err(Error::Domain(format!("need at least 1000 replicates, got {replicates}")));
    }
    table.require_positive_margins()?;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let n = table.total() as usize;
    let ln_fact = ln_factorials(n);
    let score = |cells: &mut dyn Iterator<Item = u64>| -> f64 { -cells.map(|x| ln_fact[x as usize]).sum::<f64>() };
    let observed = score(&mut table.counts.iter().flatten().copied());
    let threshold = observed + 1e-12 * observed.abs().max(1.0);
    let hits: usize = (0..replicates)
        .into_par_iter()
        .map_init(
            || vec![0u64; rows.len() * cols.len()],
            |buf, i| {
                let mut rng = replicate_rng(seed, i);
                random_table(&mut rng, &rows, &cols, buf);
                usize::from(score(&mut buf.iter().copied()) <= threshold)
            },
        )
        .sum();
    let p = (1 + hits) as f64 / (replicates + 1) as f64;
    let chi = pearson_chi_square(table)?;
    let (lo, hi) = noncentral_v_ci(table)?;
    let v = (chi / v_scale(table)).sqrt().min(1.0);
    Ok(AssociationResult {
        method: AssociationMethod::FisherMC,
        statistic: Some(chi),
        df: None,
        p: Probability::new(p)?,
        cramers_v: v,
        v_ci_lo: lo.min(v),
        v_ci_hi: hi.max(v),
        mc_standard_error: Some((p * (1.0 - p) / replicates as f64).sqrt()),
        replicates: Some(replicates),
        min_expected: table.min_expected(),
        warnings: Vec::new(),
    })
}

/// Chooses the Monte Carlo Fisher test when any expected count is below
/// [`MIN_EXPECTED`], the χ² test otherwise. Empty rows and columns are
/// dropped first.
pub fn association_test(table: &ContingencyTable, replicates: usize, seed: u64) -> Result<AssociationResult> {
    let table = table.drop_empty()?;
    if table.min_expected() < MIN_EXPECTED {
        fisher_exact_mc(&table, replicates, seed)
    } else {
        chisq_independence(&table)
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Fills `out` (row-major) with a table drawn uniformly from the
/// multiple-hypergeometric distribution with the given margins, one cell at
/// a time from the conditional hypergeometric.
fn random_table<R: Rng>(rng: &mut R, rows: &[u64], cols: &[u64], out: &mut [u64]) {
    let c = cols.len();
    let mut col_left = cols.to_vec();
    let mut pool: u64 = cols.iter().sum();
    for (i, &r) in rows.iter().enumerate() {
        let row = &mut out[i * c..(i + 1) * c];
        if i + 1 == rows.len() {
            row.copy_from_slice(&col_left);
            break;
        }
        let mut need = r;
        let mut rest = pool;
        for j in 0..c {
            let x = if j + 1 == c || need == 0 {
                need
            } else {
                rest -= col_left[j];
                let k = col_left[j];
                rng.sample(Hypergeometric::new(rest + k, k, need).expect("valid hypergeometric"))
            };
            row[j] = x;
            need -= x;
            col_left[j] -= x;
        }
        pool -= r;
    }
}
