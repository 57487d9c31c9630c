#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const VENUES: [&str; 10] = ["SOUPS", "USEC", "CCS", "USENIX", "PETS", "TISSEC", "LASER", "S&P", "TDSC", "WEIS"];
pub const YEARS: [i32; 11] = [2006, 2007, 2008, 2009, 2010, 2011, 2012, 2013, 2014, 2015, 2016];

/// Per-test outcome by venue: rows CorrectNHST, Inconsistency,
/// DecisionError, Incomplete; columns in `VENUES` order.
pub const TESTS_BY_VENUE: [[u64; 10]; 4] = [
    [170, 1, 9, 4, 11, 6, 5, 0, 12, 0],
    [19, 1, 3, 0, 0, 0, 1, 0, 0, 0],
    [9, 0, 0, 0, 0, 0, 1, 0, 0, 0],
    [1028, 33, 122, 100, 72, 71, 19, 11, 60, 7],
];

/// Per-paper outcome by venue, same layout.
pub const PAPERS_BY_VENUE: [[u64; 10]; 4] = [
    [19, 0, 1, 2, 3, 1, 0, 0, 1, 0],
    [10, 1, 1, 0, 0, 0, 0, 0, 0, 0],
    [5, 0, 0, 0, 0, 0, 1, 0, 0, 0],
    [43, 3, 6, 5, 3, 2, 1, 2, 3, 1],
];

/// Per-test outcome by year, columns in `YEARS` order.
pub const TESTS_BY_YEAR: [[u64; 11]; 4] = [
    [13, 24, 14, 18, 26, 13, 22, 9, 37, 28, 14],
    [2, 1, 0, 1, 2, 0, 2, 4, 4, 3, 5],
    [0, 5, 0, 1, 1, 0, 1, 1, 0, 0, 1],
    [53, 57, 28, 105, 96, 59, 347, 123, 270, 170, 215],
];

/// Papers per venue and year.
pub const PAPERS_BY_VENUE_YEAR: [[u64; 11]; 10] = [
    [6, 3, 4, 6, 8, 4, 10, 8, 13, 9, 6],
    [0, 0, 0, 0, 0, 0, 0, 0, 4, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 4, 1, 3],
    [0, 0, 0, 1, 0, 0, 4, 1, 1, 0, 0],
    [1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 2],
    [0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 2],
    [0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0],
    [0, 1, 0, 0, 0, 0, 1, 0, 1, 0, 1],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0],
];

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_statfidelity")
}

fn report(rng: &mut ChaCha8Rng) -> String {
    let df = rng.random_range(10..200);
    let v = rng.random_range(0.2..4.5f64);
    let p = rng.random_range(0.001..0.6f64);
    match rng.random_range(0..6) {
        0 => format!("t({df}) = {v:.2}, p = {}", fmt_p(p)),
        1 => format!("F({}, {df}) = {:.2}, p < .05", rng.random_range(1..5), v * v),
        2 => format!("χ2({}) = {:.2}, p = {}", rng.random_range(1..6), v * v * 1.5, fmt_p(p)),
        3 => format!("z = {v:.2}, p = {}", fmt_p(p)),
        4 => format!("r({df}) = .{:02}, p = {}", rng.random_range(1..90), fmt_p(p)),
        _ => format!("(p {} {})", ["<", "=", ">"].choose(rng).unwrap(), fmt_p(p)),
    }
}

fn fmt_p(p: f64) -> String {
    format!("{p:.3}").trim_start_matches('0').to_string()
}

/// Writes `n` synthetic papers and their manifest into `dir`.
pub fn synthetic_corpus(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::fs::create_dir_all(dir.join("texts")).unwrap();
    let mut manifest = String::from("paper_id,text_path,venue,year,mcc_used,effect_sizes,alpha_override\n");
    for i in 0..n {
        let id = format!("paper{i:03}");
        let mut text = String::new();
        for _ in 0..rng.random_range(2..25) {
            let _ = write!(text, "We measured the outcome across conditions, {}. ", report(&mut rng));
            if rng.random_bool(0.2) {
                text.push('\n');
            }
        }
        if i % 17 == 0 {
            text = "No statistics were reported in this paper.".to_string();
        }
        std::fs::write(dir.join("texts").join(format!("{id}.txt")), text).unwrap();
        let venue = VENUES[rng.random_range(0..4)];
        let year = YEARS[rng.random_range(0..YEARS.len())];
        let effect = ["none", "inferable", "explicit"][rng.random_range(0..3)];
        let _ = writeln!(manifest, "{id},texts/{id}.txt,{venue},{year},{},{effect},", rng.random_bool(0.2));
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest).unwrap();
    path
}
