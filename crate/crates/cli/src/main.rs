use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use statfidelity_cli::bundle::{Bundle, Granularity};
use statfidelity_cli::compare::compare_bundles;
use statfidelity_cli::corpus::run_corpus;
use statfidelity_cli::document::{check_text, read_text, RunConfig, SEED_ENV};
use statfidelity_cli::error::{CliError, Result};
use statfidelity_cli::input::{load_manifest, load_truth};
use statfidelity_cli::model::{observations, run_mlr, MlrOptions, Terms};
use statfidelity_cli::validate::validate;
use statfidelity_cli::report;
use statfidelity_core::analysis::{DEFAULT_REPLICATES, DEFAULT_SEED};
use statfidelity_core::consistency::TestOutcome;

#[derive(Parser)]
#[command(name = "statfidelity", version, about = "Check reported significance tests for internal consistency")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one text file. Exits 2 when a decision error is found.
    Scan(ScanArgs),
    /// Check every paper in a manifest and tabulate the outcomes.
    Corpus(CorpusArgs),
    /// Compare the paper-outcome distributions of two bundles.
    Compare(CompareArgs),
    /// Fit multinomial models of outcome on venue and year.
    Mlr(MlrArgs),
    /// Score a bundle against human-coded ground truth.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Significance level; overrides the manifest's alpha_override.
    #[arg(long)]
    alpha: Option<f64>,

    /// Never reinterpret a report as one-tailed.
    #[arg(long)]
    no_one_tailed: bool,
}

#[derive(Args)]
struct SimArgs {
    /// Seed for all Monte Carlo procedures.
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Monte Carlo replicates for Fisher's exact test.
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
}

#[derive(Args)]
struct ScanArgs {
    file: PathBuf,
    #[command(flatten)]
    check: CheckArgs,
    /// The paper corrects for multiple comparisons.
    #[arg(long)]
    mcc: bool,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CorpusArgs {
    manifest: PathBuf,
    /// Directory for bundle.json, report.txt and proportions.svg.
    #[arg(long, default_value = "statfidelity-out")]
    out: PathBuf,
    #[command(flatten)]
    check: CheckArgs,
    #[command(flatten)]
    sim: SimArgs,
    /// Maximum number of documents scanned at once.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    bundle_a: PathBuf,
    bundle_b: PathBuf,
    /// Drop the Incomplete category before testing.
    #[arg(long)]
    exclude_incomplete: bool,
    #[command(flatten)]
    sim: SimArgs,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Null,
    Year,
    Venue,
    Full,
}

#[derive(Args)]
struct MlrArgs {
    bundle: PathBuf,
    /// Merge all venues except the kept ones into OTHER.
    #[arg(long)]
    collapse_venues: bool,
    /// Venue kept apart when collapsing (repeatable); defaults to the most frequent.
    #[arg(long = "keep-venue")]
    keep_venues: Vec<String>,
    /// One observation per test (default).
    #[arg(long, conflicts_with = "per_paper")]
    per_test: bool,
    /// One observation per paper.
    #[arg(long)]
    per_paper: bool,
    /// Reference outcome level.
    #[arg(long)]
    reference: Option<String>,
    /// Subtract the mean year.
    #[arg(long)]
    center_year: bool,
    /// Models to fit besides the null model (repeatable); defaults to all.
    #[arg(long = "model", value_enum)]
    models: Vec<ModelArg>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ValidateArgs {
    bundle: PathBuf,
    truth: PathBuf,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

fn print<T: Serialize>(json: bool, value: &T, text: impl FnOnce(&T) -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
    } else {
        print!("{}", text(value));
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn run_config(check: Option<&CheckArgs>, sim: Option<&SimArgs>) -> RunConfig {
    let mut run = RunConfig::default();
    if let Some(c) = check {
        run.alpha = c.alpha;
        run.one_tailed_detection = !c.no_one_tailed;
    }
    if let Some(s) = sim {
        run.seed = s.seed;
        run.replicates = s.replicates;
    }
    run
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Scan(a) => {
            let text = read_text(&a.file)?;
            let cfg = run_config(Some(&a.check), None).check_config(None, a.mcc);
            let doc = check_text(&text, &cfg)?;
            let name = a.file.display().to_string();
            print(a.json, &doc, |d| report::scan_text(&name, d));
            Ok(if doc.count(TestOutcome::DecisionError) > 0 { 2 } else { 0 })
        }
        Command::Corpus(a) => {
            let rows = load_manifest(&a.manifest)?;
            let bundle = run_corpus(&rows, &run_config(Some(&a.check), Some(&a.sim)), a.workers)?;
            std::fs::create_dir_all(&a.out).map_err(|source| CliError::Io { path: a.out.clone(), source })?;
            bundle.save(&a.out.join("bundle.json"))?;
            let text = report::corpus_text(&bundle);
            write(&a.out.join("report.txt"), &text)?;
            if let Some(series) = bundle.series.iter().find(|s| s.name == "outcome") {
                write(&a.out.join("proportions.svg"), &report::proportions_svg(series))?;
            }
            print!("{text}");
            for f in &bundle.failures {
                eprintln!("warning: {}: {}", f.paper_id, f.message);
            }
            if bundle.failures.len() == rows.len() {
                return Err(CliError::AllFailed(rows.len()));
            }
            Ok(0)
        }
        Command::Compare(a) => {
            let (ba, bb) = (Bundle::load(&a.bundle_a)?, Bundle::load(&a.bundle_b)?);
            let stem = |p: &Path| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            let (na, mut nb) = (stem(&a.bundle_a), stem(&a.bundle_b));
            if na == nb {
                nb.push_str(" (2)");
            }
            let c = compare_bundles((&na, &ba), (&nb, &bb), a.exclude_incomplete, &run_config(None, Some(&a.sim)))?;
            print(a.json, &c, report::compare_text);
            Ok(0)
        }
        Command::Mlr(a) => {
            let bundle = Bundle::load(&a.bundle)?;
            let granularity = if a.per_paper { Granularity::Paper } else { Granularity::Test };
            let mut opts = MlrOptions {
                granularity,
                collapse_venues: a.collapse_venues,
                keep_venues: a.keep_venues,
                reference: a.reference,
                center_year: a.center_year,
                ..Default::default()
            };
            if !a.models.is_empty() {
                opts.models = a
                    .models
                    .iter()
                    .map(|m| match m {
                        ModelArg::Null => Terms::Null,
                        ModelArg::Year => Terms::Year,
                        ModelArg::Venue => Terms::Venue,
                        ModelArg::Full => Terms::Full,
                    })
                    .collect();
            }
            let r = run_mlr(&observations(&bundle, granularity), &opts)?;
            print(a.json, &r, report::mlr_text);
            Ok(0)
        }
        Command::Validate(a) => {
            let v = validate(&Bundle::load(&a.bundle)?, &load_truth(&a.truth)?)?;
            print(a.json, &v, report::validate_text);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
