use std::sync::LazyLock;

use regex::Regex;

// Comparison operators, longest spellings first.
const OP: &str = r"(?:<=|>=|=<|=>|\\leq?|\\geq?|\\lt|\\gt|≤|≥|⩽|⩾|=|<|>)";

// A degree of freedom, possibly fractional (Welch) or with thousands separators.
const DF: &str = r"(?:\d{1,3}(?:,\d{3})+|\d+(?:\.\d+)?)";

// Signed decimal with optional thousands separators and unicode minus.
const VALUE: &str = r"(?:[-−–]\s?)?(?:\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d*\.\d+|\d+)";

// Unsigned decimal with optional exponent in e-notation or ×10^ form.
const P_NUMBER: &str = r"(?:\d*\.\d+|\d+)(?:[eE][-−]?\d+|\s*(?:×|\\times|x)\s*10\s*\^?\s*\{?\s*[-−]\s*\d+\s*\}?)?";

const SQUARED: &str = r"(?:\s*\^\s*\{?\s*2\s*\}?|²|2)";

pub(crate) static STATISTIC: LazyLock<Regex> = LazyLock::new(|| {
    let chi = format!(
        r"(?:(?:χ|\\chi){SQUARED}?|\b(?i:chi)(?:{SQUARED}|[\s-]*(?i:sq(?:uared?)?)\.?)|\bX{SQUARED})"
    );
    let pattern = format!(
        r"(?:(?P<t>\bt)\s*\(\s*(?P<tdf>{DF})\s*\)|(?P<f>\bF)\s*\(\s*(?P<fdf1>{DF})\s*[,;]\s*(?P<fdf2>{DF})\s*\)|(?P<r>\br)\s*\(\s*(?P<rdf>{DF})\s*\)|(?P<chi>{chi})\s*\(\s*(?P<cdf>{DF})(?:\s*,\s*(?i:n)\s*=\s*{DF})?\s*\)|(?P<z>\b[zZ]))\s*(?P<op>{OP})\s*(?P<value>{VALUE})"
    );
    Regex::new(&pattern).expect("statistic pattern")
});

pub(crate) static P_CLAUSE: LazyLock<Regex> = LazyLock::new(|| {
    let pattern = format!(
        r"(?:\b(?:p\s*-\s*value|Pr|p|P)\b)\}}?\s*(?:\$\s*)?(?P<op>{OP})\s*(?P<value>{P_NUMBER})(?P<percent>\s*%)?"
    );
    Regex::new(&pattern).expect("p pattern")
});

pub(crate) static DECLARED_NS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\bn\.\s?s\.|\b(?:non-?significant|insignificant|not\s+(?:statistically\s+)?significant)\b",
    )
    .expect("ns pattern")
});

pub(crate) static DECLARED_SIG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\(\s*(?:sig\.?|significant)\s*\)").expect("sig pattern"));
