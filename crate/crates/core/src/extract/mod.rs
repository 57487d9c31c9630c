//! Finding reported test statistics and bare p-values in plain text.
//!
//! [`scan_document`] returns two lists. A [`RawReport`] is a complete
//! report: statistic, degrees of freedom and p-value. An
//! [`IncompletePValue`] is a p-value (or a verbal significance claim) that
//! comes without a statistic. Numeric texts are kept next to the parsed
//! values because the number of printed decimals drives the rounding
//! tolerance later on.

mod patterns;

use std::fmt;

use regex::Captures;
use serde::{Deserialize, Serialize};

use crate::kernel::{StatKind, TestStatistic};
use crate::{Error, Result};

use patterns::{DECLARED_NS, DECLARED_SIG, P_CLAUSE, STATISTIC};

/// Maximum distance in characters between the end of a statistic clause and
/// the start of the p clause it binds to.
pub const PAIRING_WINDOW: usize = 80;

/// Characters of context kept on either side of a match.
pub const CONTEXT_RADIUS: usize = 200;

/// Verbal significance markers this close (in characters) to a numeric
/// p-value, in the same clause, only restate it and are not reported
/// separately.
pub const MARKER_ADJACENCY: usize = 15;

pub const DEFAULT_ONE_TAILED_KEYWORDS: [&str; 4] =
    ["one-tailed", "one-sided", "one-tail", "directional"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub byte_start: usize,
    pub byte_end: usize,
    /// 1-based line of `byte_start`.
    pub line: usize,
}

impl SourceSpan {
    pub fn overlaps(&self, other: &SourceSpan) -> bool {
        self.byte_start < other.byte_end && other.byte_start < self.byte_end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Lt,
    Gt,
    Leq,
    Geq,
}

impl Relation {
    fn parse(op: &str) -> Option<Relation> {
        Some(match op {
            "=" => Relation::Eq,
            "<" | r"\lt" => Relation::Lt,
            ">" | r"\gt" => Relation::Gt,
            "<=" | "=<" | "≤" | "⩽" | r"\le" | r"\leq" => Relation::Leq,
            ">=" | "=>" | "≥" | "⩾" | r"\ge" | r"\geq" => Relation::Geq,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Lt => "<",
            Relation::Gt => ">",
            Relation::Leq => "<=",
            Relation::Geq => ">=",
        }
    }

    pub fn is_upper_bound(self) -> bool {
        matches!(self, Relation::Lt | Relation::Leq)
    }

    pub fn is_lower_bound(self) -> bool {
        matches!(self, Relation::Gt | Relation::Geq)
    }
}

/// A complete statistic report such as `t(24) = 2.52, p = .019`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawReport {
    pub span: SourceSpan,
    /// Tails are provisionally two; the consistency check decides.
    pub statistic: TestStatistic,
    pub statistic_operator: Relation,
    /// Normalised numeric text (ASCII minus, no separators).
    pub statistic_text: String,
    pub statistic_decimals: u32,
    pub p_operator: Relation,
    pub p_text: String,
    pub p_value: f64,
    pub p_decimals: u32,
    pub context: String,
}

impl RawReport {
    /// Canonical rendering, e.g. `F(1, 38) = 4.20, p < .05`.
    pub fn canonical_text(&self) -> String {
        let s = &self.statistic;
        let head = match s.kind {
            StatKind::StudentT => format!("t({})", fmt_df(s.df1)),
            StatKind::F => format!("F({}, {})", fmt_df(s.df1), fmt_df(s.df2)),
            StatKind::ChiSq => format!("χ2({})", fmt_df(s.df1)),
            StatKind::Z => "z".to_string(),
            StatKind::PearsonR => format!("r({})", fmt_df(s.df1)),
        };
        format!(
            "{head} {} {}, p {} {}",
            self.statistic_operator.symbol(),
            self.statistic_text,
            self.p_operator.symbol(),
            self.p_text
        )
    }
}

fn fmt_df(df: Option<f64>) -> String {
    df.map(|d| d.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IncompleteOperator {
    Eq,
    Lt,
    Gt,
    Leq,
    Geq,
    DeclaredNS,
    DeclaredSig,
}

impl From<Relation> for IncompleteOperator {
    fn from(r: Relation) -> Self {
        match r {
            Relation::Eq => IncompleteOperator::Eq,
            Relation::Lt => IncompleteOperator::Lt,
            Relation::Gt => IncompleteOperator::Gt,
            Relation::Leq => IncompleteOperator::Leq,
            Relation::Geq => IncompleteOperator::Geq,
        }
    }
}

/// A p-value, or a verbal significance claim, without a test statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompletePValue {
    pub span: SourceSpan,
    pub p_operator: IncompleteOperator,
    /// Absent for verbal claims.
    pub p_value: Option<f64>,
    pub context: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IncompleteClass {
    ExactP,
    SigAtAlpha,
    SigBelowAlpha,
    NonSigDeclared,
    BoundAboveAlpha,
    ImpossibleZero,
}

impl IncompleteClass {
    pub const ALL: [IncompleteClass; 6] = [
        IncompleteClass::ExactP,
        IncompleteClass::SigAtAlpha,
        IncompleteClass::SigBelowAlpha,
        IncompleteClass::NonSigDeclared,
        IncompleteClass::BoundAboveAlpha,
        IncompleteClass::ImpossibleZero,
    ];
}

impl fmt::Display for IncompleteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A statistic that was recognised but could not become a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub message: String,
}

/// Everything found in one document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Scan {
    pub reports: Vec<RawReport>,
    pub incompletes: Vec<IncompletePValue>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Scans `text` for complete reports and bare p-values.
///
/// Both lists are sorted by position and never overlap. A p-value that
/// binds to a statistic is not repeated among the incompletes.
pub fn scan_document(text: &str) -> (Vec<RawReport>, Vec<IncompletePValue>) {
    let scan = scan(text);
    (scan.reports, scan.incompletes)
}

/// Like [`scan_document`], but also returns statistics that were matched
/// and rejected (negative F, |r| ≥ 1, ...).
pub fn scan(text: &str) -> Scan {
    let lines = LineIndex::new(text);
    let mut out = Scan::default();
    // Byte ranges of numeric p clauses already accounted for.
    let mut consumed: Vec<(usize, usize)> = Vec::new();

    let stats: Vec<Captures> = STATISTIC.captures_iter(text).collect();
    for (i, caps) in stats.iter().enumerate() {
        let whole = caps.get(0).expect("match");
        let limit = stats
            .get(i + 1)
            .map(|c| c.get(0).expect("match").start())
            .unwrap_or(text.len());
        let Some(p) = find_p_after(text, whole.end(), limit) else {
            continue;
        };
        consumed.push((p.start, p.end));
        let span = lines.span(whole.start(), p.end);
        match build_report(caps, &p) {
            Ok(mut report) => {
                report.context = context(text, span.byte_start, span.byte_end);
                report.span = span;
                out.reports.push(report);
            }
            Err(e) => out.diagnostics.push(Diagnostic { span, message: e.to_string() }),
        }
    }

    let mut numeric: Vec<IncompletePValue> = Vec::new();
    for caps in P_CLAUSE.captures_iter(text) {
        let m = caps.get(0).expect("match");
        if consumed.iter().any(|&(s, e)| m.start() < e && s < m.end()) {
            continue;
        }
        let Some(p) = parse_p_clause(&caps) else { continue };
        consumed.push((p.start, p.end));
        let span = lines.span(p.start, p.end);
        numeric.push(IncompletePValue {
            span,
            p_operator: p.operator.into(),
            p_value: Some(p.value),
            context: context(text, span.byte_start, span.byte_end),
        });
    }

    let mut verbal: Vec<IncompletePValue> = Vec::new();
    let anchors: Vec<(usize, usize)> = consumed
        .iter()
        .copied()
        .chain(out.reports.iter().map(|r| (r.span.byte_start, r.span.byte_end)))
        .collect();
    for (re, op) in [
        (&*DECLARED_NS, IncompleteOperator::DeclaredNS),
        (&*DECLARED_SIG, IncompleteOperator::DeclaredSig),
    ] {
        for m in re.find_iter(text) {
            let near = anchors
                .iter()
                .any(|&(s, e)| adjacent(text, (s, e), (m.start(), m.end())));
            let inside_report = out
                .reports
                .iter()
                .any(|r| m.start() < r.span.byte_end && r.span.byte_start < m.end());
            if near || inside_report {
                continue;
            }
            let span = lines.span(m.start(), m.end());
            verbal.push(IncompletePValue {
                span,
                p_operator: op,
                p_value: None,
                context: context(text, span.byte_start, span.byte_end),
            });
        }
    }

    let mut incompletes = numeric;
    incompletes.extend(verbal);
    incompletes.sort_by_key(|ip| ip.span.byte_start);
    // Markers of both kinds can overlap ("(not significant)"); keep the first.
    incompletes.dedup_by(|later, earlier| later.span.overlaps(&earlier.span));
    out.incompletes = incompletes;
    out
}

/// Whether any of `keywords` occurs in `context`, ignoring case.
pub fn detect_one_tailed_context<S: AsRef<str>>(context: &str, keywords: &[S]) -> bool {
    let haystack = context.to_lowercase();
    keywords
        .iter()
        .map(|k| k.as_ref().trim().to_lowercase())
        .any(|k| !k.is_empty() && haystack.contains(&k))
}

/// Sorts a bare p-value into the incomplete-p subclasses at level `alpha`.
pub fn classify_incomplete(ip: &IncompletePValue, alpha: f64) -> Result<IncompleteClass> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let at_alpha = |v: f64| (v - alpha).abs() <= 1e-12 * alpha;
    let value = || {
        ip.p_value
            .ok_or_else(|| Error::Domain(format!("{:?} p-value without a number", ip.p_operator)))
    };
    Ok(match ip.p_operator {
        IncompleteOperator::Eq => {
            if value()? > 0.0 {
                IncompleteClass::ExactP
            } else {
                IncompleteClass::ImpossibleZero
            }
        }
        IncompleteOperator::Lt | IncompleteOperator::Leq => {
            let v = value()?;
            if at_alpha(v) {
                IncompleteClass::SigAtAlpha
            } else if v < alpha {
                IncompleteClass::SigBelowAlpha
            } else {
                IncompleteClass::BoundAboveAlpha
            }
        }
        IncompleteOperator::Gt | IncompleteOperator::Geq => IncompleteClass::BoundAboveAlpha,
        IncompleteOperator::DeclaredSig => IncompleteClass::SigAtAlpha,
        IncompleteOperator::DeclaredNS => IncompleteClass::NonSigDeclared,
    })
}

/// Strips thousands separators and whitespace and maps unicode minus signs
/// to ASCII.
pub fn normalize_number(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '−' | '–' => out.push('-'),
            ',' | ' ' | '\t' | '\u{a0}' => {}
            _ => out.push(c),
        }
    }
    out
}

/// Digits after the decimal point of the mantissa.
pub fn count_decimals(text: &str) -> u32 {
    let mantissa = text.split(['e', 'E']).next().unwrap_or("");
    mantissa
        .split_once('.')
        .map(|(_, frac)| frac.chars().take_while(|c| c.is_ascii_digit()).count() as u32)
        .unwrap_or(0)
}

struct PClause {
    start: usize,
    end: usize,
    operator: Relation,
    text: String,
    value: f64,
}

fn find_p_after(text: &str, from: usize, limit: usize) -> Option<PClause> {
    let window = &text[from..limit];
    let caps = P_CLAUSE.captures(window)?;
    let m = caps.get(0).expect("match");
    if window[..m.start()].chars().count() > PAIRING_WINDOW {
        return None;
    }
    let mut p = parse_p_clause(&caps)?;
    p.start += from;
    p.end += from;
    Some(p)
}

fn parse_p_clause(caps: &Captures) -> Option<PClause> {
    if caps.name("percent").is_some() {
        return None;
    }
    let m = caps.get(0)?;
    let operator = Relation::parse(caps.name("op")?.as_str())?;
    let raw = caps.name("value")?.as_str();
    let text = normalize_p_number(raw);
    let value: f64 = text.parse().ok()?;
    if !(0.0..=1.0).contains(&value) {
        return None;
    }
    Some(PClause {
        start: m.start(),
        end: caps.name("value")?.end(),
        operator,
        text,
        value,
    })
}

/// Rewrites `1.2 × 10^-5` style exponents as `1.2e-5`.
fn normalize_p_number(raw: &str) -> String {
    let compact = normalize_number(raw).replace(['{', '}'], "");
    for sep in ["×10^", "\\times10^", "x10^", "×10", "\\times10", "x10"] {
        if let Some((mantissa, exponent)) = compact.split_once(sep) {
            return format!("{mantissa}e{exponent}");
        }
    }
    compact
}

fn build_report(caps: &Captures, p: &PClause) -> Result<RawReport> {
    let df = |name: &str| -> Result<f64> {
        let text = normalize_number(caps.name(name).map(|m| m.as_str()).unwrap_or(""));
        text.parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad degrees of freedom {text:?}")))
    };
    let statistic_text = normalize_number(&caps["value"]);
    let value: f64 = statistic_text
        .parse()
        .map_err(|_| Error::Parse(format!("bad statistic {statistic_text:?}")))?;
    let statistic = if caps.name("t").is_some() {
        TestStatistic::t(value, df("tdf")?)
    } else if caps.name("f").is_some() {
        TestStatistic::f(value, df("fdf1")?, df("fdf2")?)
    } else if caps.name("chi").is_some() {
        TestStatistic::chi_sq(value, df("cdf")?)
    } else if caps.name("r").is_some() {
        let d = df("rdf")?;
        if d.fract() != 0.0 || d < 1.0 {
            return Err(Error::Parse(format!("correlation df must be a positive integer, got {d}")));
        }
        TestStatistic::r(value, d as u64 + 2)
    } else {
        TestStatistic::z(value)
    };
    statistic.validate()?;
    let statistic_operator = Relation::parse(&caps["op"])
        .ok_or_else(|| Error::Parse(format!("unknown operator {:?}", &caps["op"])))?;
    Ok(RawReport {
        span: SourceSpan { byte_start: 0, byte_end: 0, line: 0 },
        statistic,
        statistic_operator,
        statistic_decimals: count_decimals(&statistic_text),
        statistic_text,
        p_operator: p.operator,
        p_decimals: count_decimals(&p.text),
        p_text: p.text.clone(),
        p_value: p.value,
        context: String::new(),
    })
}

/// Whether two byte ranges are at most [`MARKER_ADJACENCY`] characters
/// apart within one sentence or clause.
fn adjacent(text: &str, a: (usize, usize), b: (usize, usize)) -> bool {
    let (lo, hi) = if a.1 <= b.0 {
        (a.1, b.0)
    } else if b.1 <= a.0 {
        (b.1, a.0)
    } else {
        return true;
    };
    let gap = &text[lo..hi];
    gap.chars().count() <= MARKER_ADJACENCY && !gap.contains(['.', ';', '!', '?', '\n'])
}

fn context(text: &str, start: usize, end: usize) -> String {
    let before = text[..start]
        .char_indices()
        .rev()
        .nth(CONTEXT_RADIUS - 1)
        .map(|(i, _)| i)
        .unwrap_or(0);
    let after = text[end..]
        .char_indices()
        .nth(CONTEXT_RADIUS)
        .map(|(i, _)| end + i)
        .unwrap_or(text.len());
    text[before..after].to_string()
}

struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    fn new(text: &str) -> Self {
        let starts = std::iter::once(0)
            .chain(text.match_indices('\n').map(|(i, _)| i + 1))
            .collect();
        LineIndex { starts }
    }

    fn span(&self, byte_start: usize, byte_end: usize) -> SourceSpan {
        let line = self.starts.partition_point(|&s| s <= byte_start);
        SourceSpan { byte_start, byte_end, line }
    }
}
