use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use statfidelity_core::analysis::{
    association_test, build_contingency, Classified, Dimension, EffectSizeReporting, PaperRecord, TestRecord,
};
use statfidelity_core::consistency::{aggregate_paper, p_difference_histogram, EvaluatedTest, PaperCategory};
use statfidelity_core::Error as CoreError;

use crate::bundle::{category_names, Bundle, Failure, Granularity, PaperEntry, TableEntry, YearSeries, SCHEMA_VERSION};
use crate::document::{check_text, read_text, DocumentScan, RunConfig};
use crate::error::{CliError, Result};
use crate::input::ManifestRow;

pub const HISTOGRAM_BIN_WIDTH: f64 = 0.01;

/// Per-test records: one per complete test, one `Incomplete` per bare p.
pub fn test_records(papers: &[PaperEntry]) -> Vec<TestRecord> {
    papers
        .iter()
        .flat_map(|p| {
            let r = &p.record;
            let make = move |outcome| TestRecord { paper_id: r.paper_id.clone(), venue: r.venue.clone(), year: r.year, outcome };
            p.scan
                .tests
                .iter()
                .map(move |t| make(t.outcome.into()))
                .chain(p.scan.incompletes.iter().map(move |_| make(PaperCategory::Incomplete)))
        })
        .collect()
}

/// Scans every manifest row (in parallel, at most `workers` threads when
/// given) and aggregates the results in paper-id order.
pub fn run_corpus(rows: &[ManifestRow], run: &RunConfig, workers: Option<usize>) -> Result<Bundle> {
    if rows.is_empty() {
        return Err(CliError::Invalid("the manifest lists no papers".into()));
    }
    let scan_one = |row: &ManifestRow| -> (String, Result<(f64, DocumentScan)>) {
        let cfg = run.check_config(row.alpha_override, row.mcc_used);
        let result = read_text(&row.text_path).and_then(|text| Ok((cfg.alpha, check_text(&text, &cfg)?)));
        (row.paper_id.clone(), result)
    };
    let mut scanned: Vec<(String, Result<(f64, DocumentScan)>)> = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Invalid(format!("cannot start {n} workers: {e}")))?
            .install(|| rows.par_iter().map(scan_one).collect()),
        None => rows.par_iter().map(scan_one).collect(),
    };
    scanned.sort_by(|a, b| a.0.cmp(&b.0));
    let by_id: BTreeMap<&str, &ManifestRow> = rows.iter().map(|r| (r.paper_id.as_str(), r)).collect();

    let mut papers = Vec::new();
    let mut excluded = Vec::new();
    let mut failures = Vec::new();
    for (id, result) in scanned {
        let row = by_id[id.as_str()];
        let (alpha, scan) = match result {
            Ok(ok) => ok,
            Err(e) => {
                failures.push(Failure { paper_id: id, message: e.to_string() });
                continue;
            }
        };
        let incompletes: Vec<_> = scan.incompletes.iter().map(|c| c.value.clone()).collect();
        match aggregate_paper(&id, &scan.tests, &incompletes) {
            Ok(outcome) => papers.push(PaperEntry {
                record: PaperRecord {
                    paper_id: id,
                    venue: row.venue.clone(),
                    year: row.year,
                    mcc_used: row.mcc_used,
                    effect_sizes_reported: row.effect_sizes,
                    outcome,
                },
                alpha,
                scan,
            }),
            Err(CoreError::UndefinedPaper(_)) => excluded.push(id),
            Err(e) => failures.push(Failure { paper_id: id, message: e.to_string() }),
        }
    }

    let records: Vec<PaperRecord> = papers.iter().map(|p| p.record.clone()).collect();
    let tests = test_records(&papers);
    let mut tables = vec![table("venue_by_year", Granularity::Paper, &records, Dimension::Venue, Dimension::Year, None)];
    for (g, name_venue, name_year) in [
        (Granularity::Paper, "outcome_by_venue_papers", "outcome_by_year_papers"),
        (Granularity::Test, "outcome_by_venue_tests", "outcome_by_year_tests"),
    ] {
        for (name, dim) in [(name_venue, Dimension::Venue), (name_year, Dimension::Year)] {
            tables.push(match g {
                Granularity::Paper => table(name, g, &records, Dimension::Outcome, dim, Some(run)),
                Granularity::Test => table(name, g, &tests, Dimension::Outcome, dim, Some(run)),
            });
        }
    }

    let all_tests: Vec<EvaluatedTest> = papers.iter().flat_map(|p| p.scan.tests.iter().cloned()).collect();
    Ok(Bundle {
        schema_version: SCHEMA_VERSION,
        generator: format!("statfidelity {}", env!("CARGO_PKG_VERSION")),
        config: run.clone(),
        p_difference_histogram: p_difference_histogram(&all_tests, HISTOGRAM_BIN_WIDTH)?,
        series: year_series(&records),
        papers,
        excluded,
        failures,
        tables,
    })
}

fn table<T: Classified>(
    name: &str,
    granularity: Granularity,
    records: &[T],
    rows: Dimension,
    cols: Dimension,
    test_with: Option<&RunConfig>,
) -> TableEntry {
    let mut entry = TableEntry { name: name.into(), granularity, table: None, association: None, note: None };
    match build_contingency(records, rows, cols) {
        Ok(t) => {
            if let Some(run) = test_with {
                match t.drop_empty().and_then(|t| association_test(&t, run.replicates, run.seed)) {
                    Ok(a) => entry.association = Some(a),
                    Err(e) => entry.note = Some(e.to_string()),
                }
            }
            entry.table = Some(t);
        }
        Err(e) => entry.note = Some(e.to_string()),
    }
    entry
}

/// Shares of papers per year: outcome, MCC use and effect-size reporting.
fn year_series(records: &[PaperRecord]) -> Vec<YearSeries> {
    let years: Vec<i32> = records.iter().map(|r| r.year).collect::<BTreeSet<_>>().into_iter().collect();
    let shares = |name: &str, levels: Vec<String>, level: &dyn Fn(&PaperRecord) -> String| {
        let mut out: BTreeMap<String, Vec<f64>> = levels.iter().map(|l| (l.clone(), Vec::new())).collect();
        for &y in &years {
            let in_year: Vec<&PaperRecord> = records.iter().filter(|r| r.year == y).collect();
            for (l, v) in out.iter_mut() {
                let k = in_year.iter().filter(|r| level(r) == *l).count();
                v.push(k as f64 / in_year.len() as f64);
            }
        }
        YearSeries { name: name.into(), years: years.clone(), levels: out }
    };
    vec![
        shares("outcome", category_names(), &|r| r.outcome.outcome.name().to_string()),
        shares("mcc", vec!["MCC".into(), "noMCC".into()], &|r| {
            if r.mcc_used { "MCC" } else { "noMCC" }.to_string()
        }),
        shares(
            "effect_sizes",
            [EffectSizeReporting::None, EffectSizeReporting::Inferable, EffectSizeReporting::Explicit]
                .iter()
                .map(|e| e.name().to_string())
                .collect(),
            &|r| r.effect_sizes_reported.name().to_string(),
        ),
    ]
}
