//! Human-readable renderings. All output is deterministic.

use std::fmt::Write;

use statfidelity_core::analysis::{AssociationMethod, AssociationResult, ConfusionMetrics, ContingencyTable};
use statfidelity_core::consistency::TestOutcome;

use crate::bundle::{Bundle, YearSeries};
use crate::compare::Comparison;
use crate::document::DocumentScan;
use crate::model::MlrReport;
use crate::validate::Validation;

fn p_text(p: f64) -> String {
    if p < 0.001 {
        "< .001".to_string()
    } else {
        format!("= {}", format!("{p:.3}").trim_start_matches('0'))
    }
}

pub fn association_line(a: &AssociationResult) -> String {
    let v = format!("V = {:.3} [{:.3}, {:.3}]", a.cramers_v, a.v_ci_lo, a.v_ci_hi);
    match a.method {
        AssociationMethod::ChiSquare => format!(
            "χ²({}) = {:.3}, p {}, {v}",
            a.df.unwrap_or(0),
            a.statistic.unwrap_or(f64::NAN),
            p_text(a.p.value())
        ),
        AssociationMethod::FisherMC => format!(
            "Fisher exact (Monte Carlo, {} replicates), p {} ± {:.4}, {v}",
            a.replicates.unwrap_or(0),
            p_text(a.p.value()),
            a.mc_standard_error.unwrap_or(0.0)
        ),
    }
}

pub fn table_text(t: &ContingencyTable) -> String {
    let w = t.row_labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let cw: Vec<usize> = t
        .col_labels
        .iter()
        .enumerate()
        .map(|(j, l)| l.chars().count().max(t.counts.iter().map(|r| r[j].to_string().len()).max().unwrap_or(0)))
        .collect();
    let mut s = format!("{:w$}", "");
    for (l, c) in t.col_labels.iter().zip(&cw) {
        let _ = write!(s, "  {l:>c$}");
    }
    s.push('\n');
    for (label, row) in t.row_labels.iter().zip(&t.counts) {
        let _ = write!(s, "{label:w$}");
        for (v, c) in row.iter().zip(&cw) {
            let _ = write!(s, "  {v:>c$}");
        }
        s.push('\n');
    }
    s
}

pub fn scan_text(name: &str, doc: &DocumentScan) -> String {
    let mut s = String::new();
    for t in &doc.tests {
        let _ = writeln!(
            s,
            "{name}:{}: {:<40} {:<14} recomputed [{:.4}, {:.4}]{}",
            t.raw.span.line,
            t.raw.canonical_text(),
            t.outcome.to_string(),
            t.recomputed_p_lo.value(),
            t.recomputed_p_hi.value(),
            if t.one_tailed_applied { " one-tailed" } else { "" }
        );
    }
    for ip in &doc.incompletes {
        let value = ip.value.p_value.map(|v| format!(" {v}")).unwrap_or_default();
        let _ = writeln!(s, "{name}:{}: p {:?}{value} {:<14} {}", ip.value.span.line, ip.value.p_operator, "Incomplete", ip.class);
    }
    for d in &doc.diagnostics {
        let _ = writeln!(s, "{name}:{}: warning: {}", d.span.line, d.message);
    }
    let _ = writeln!(
        s,
        "{} tests ({} correct, {} inconsistent, {} decision errors), {} incomplete",
        doc.tests.len(),
        doc.count(TestOutcome::CorrectNHST),
        doc.count(TestOutcome::Inconsistency),
        doc.count(TestOutcome::DecisionError),
        doc.incompletes.len()
    );
    s
}

pub fn corpus_text(b: &Bundle) -> String {
    let mut s = format!("{}\nseed {}, {} replicates\n\n", b.generator, b.config.seed, b.config.replicates);
    let dist = b.paper_distribution();
    let _ = writeln!(s, "papers: {} analysed, {} excluded, {} failed", b.papers.len(), b.excluded.len(), b.failures.len());
    for (name, n) in crate::bundle::category_names().iter().zip(dist) {
        let _ = writeln!(s, "  {name:<14} {n}");
    }
    for f in &b.failures {
        let _ = writeln!(s, "  failed {}: {}", f.paper_id, f.message);
    }
    for t in &b.tables {
        let _ = writeln!(s, "\n{} ({:?})", t.name, t.granularity);
        if let Some(table) = &t.table {
            s.push_str(&table_text(table));
        }
        if let Some(a) = &t.association {
            let _ = writeln!(s, "{}", association_line(a));
            for w in &a.warnings {
                let _ = writeln!(s, "  note: {w}");
            }
        }
        if let Some(n) = &t.note {
            let _ = writeln!(s, "note: {n}");
        }
    }
    let eq: usize = b.p_difference_histogram.iter().map(|h| h.count).sum();
    let above: usize = b.p_difference_histogram.iter().filter(|h| h.center > 0.0).map(|h| h.count).sum();
    let _ = writeln!(s, "\nreported minus recomputed p: {above} of {eq} exact reports above zero");
    s
}

pub fn compare_text(c: &Comparison) -> String {
    format!(
        "{}{}{}\n",
        table_text(&c.table),
        if c.excluded_incomplete { "(Incomplete excluded)\n" } else { "" },
        association_line(&c.result)
    )
}

pub fn mlr_text(r: &MlrReport) -> String {
    let mut s = format!("{} observations ({:?} level), reference outcome {}\n", r.n, r.granularity, r.reference);
    if let Some(k) = &r.kept_venues {
        let _ = writeln!(s, "venues kept apart: {}", k.join(", "));
    }
    for m in &r.models {
        let _ = writeln!(s, "\n{} : ll = {:.3}, {} parameters", m.formula, m.log_likelihood, m.n_params);
        for w in &m.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
        for (level, rows) in &m.coefficients {
            let _ = writeln!(s, "  {level}");
            for c in rows {
                let _ = writeln!(
                    s,
                    "    {:<16} b = {:>9.3}  SE = {:>8.3}  z = {:>8.3}  p {:<7}  OR = {:.3} [{:.3}, {:.3}]",
                    c.term,
                    c.b,
                    c.se,
                    c.z,
                    p_text(c.p.value()),
                    c.odds_ratio,
                    c.or_ci_lo,
                    c.or_ci_hi
                );
            }
        }
    }
    for t in &r.lr_tests {
        let _ = writeln!(
            s,
            "\nLR {} vs {}: χ²({}) = {:.3}, p {}, McFadden R² = {:.4}",
            t.full,
            t.nested,
            t.df,
            t.chi_sq,
            p_text(t.p.value()),
            t.mcfadden_r2
        );
    }
    let _ = writeln!(s, "\npredicted probabilities ({:?} model)", r.effects_model);
    for e in &r.effects {
        let levels: Vec<String> = e
            .levels
            .iter()
            .map(|l| format!("{} {:.3} [{:.3}, {:.3}]", l.level, l.probability, l.lo, l.hi))
            .collect();
        let _ = writeln!(s, "  {} {}: {}", e.setting.venue, e.setting.year, levels.join("; "));
    }
    s
}

fn metrics_text(title: &str, m: &ConfusionMetrics) -> String {
    let opt = |p: Option<statfidelity_core::kernel::Probability>| p.map_or("n/a".to_string(), |p| format!("{:.2}", p.value()));
    format!(
        "{title}: TP {} FP {} FN {} TN {}\n  accuracy {:.2} [{:.2}, {:.2}], NIR {:.2}, p(acc > NIR) {}\n  sensitivity {}, specificity {}, PPV {}, NPV {}, F1 {}\n",
        m.tp,
        m.fp,
        m.fn_,
        m.tn,
        m.accuracy.value(),
        m.acc_ci_lo.value(),
        m.acc_ci_hi.value(),
        m.nir.value(),
        p_text(m.p_acc_gt_nir.value()),
        opt(m.sensitivity),
        opt(m.specificity),
        opt(m.ppv),
        opt(m.npv),
        opt(m.f1)
    )
}

pub fn validate_text(v: &Validation) -> String {
    let mut s = format!("{} tests matched\n", v.matched);
    s.push_str(&metrics_text("error detection", &v.error_detection));
    if let Some(m) = &v.author_decisions {
        s.push_str(&metrics_text("author significance decisions", m));
    }
    for (title, codes) in [("author errors", &v.author_error_codes), ("checker behaviour", &v.tool_error_codes)] {
        if !codes.is_empty() {
            let list: Vec<String> = codes.iter().map(|(k, n)| format!("{k} {n}")).collect();
            let _ = writeln!(s, "{title}: {}", list.join(", "));
        }
    }
    s
}

const PALETTE: [&str; 4] = ["#1b9e77", "#d95f02", "#7570b3", "#999999"];

/// Line chart of per-year shares.
pub fn proportions_svg(series: &YearSeries) -> String {
    let (w, h, m) = (640.0, 360.0, 48.0);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let n = series.years.len();
    let x = |i: usize| if n < 2 { w / 2.0 } else { m + i as f64 * (w - 2.0 * m) / (n - 1) as f64 };
    let y = |v: f64| h - m - v * (h - 2.0 * m);
    let _ = writeln!(s, "<line x1=\"{m}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>", y(0.0), w - m, y(0.0));
    let _ = writeln!(s, "<line x1=\"{m}\" y1=\"{}\" x2=\"{m}\" y2=\"{}\" stroke=\"black\"/>", y(0.0), y(1.0));
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{tick:.2}</text>", m - 6.0, y(tick) + 4.0);
    }
    for (i, year) in series.years.iter().enumerate() {
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{year}</text>", x(i), h - m + 16.0);
    }
    for (k, (level, values)) in series.levels.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = values.iter().enumerate().map(|(i, v)| format!("{:.1},{:.1}", x(i), y(*v))).collect();
        let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\" points=\"{}\"/>", points.join(" "));
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" fill=\"{colour}\">{level}</text>", m + 8.0 + 120.0 * k as f64, m / 2.0);
    }
    s.push_str("</svg>\n");
    s
}
