//! Regression corpus: named inputs with expected verdicts.
//!
//! File format, one entry per line (`#` starts a comment):
//!
//! ```text
//! kind | name | input | expected [| region]
//! ```
//!
//! `kind` is `symbol`, `multiplier` or `closed-range`. `expected` is a
//! status optionally followed by `:label`; for symbols the label is the
//! failing condition (`lemma1`, `i`, `ii`), for closed-range verdicts a rule
//! that must have fired.

use serde::Serialize;
use serde_json::{json, Value};

use crate::closed_range::{decide, AssumptionSet, CrStatus};
use crate::config::Config;
use crate::expr::parse;
use crate::multiplier::closed_range_multiplier;
use crate::norms::grid::Region;
use crate::report::Report;
use crate::symbol::analyze;
use crate::verdict::Status;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Symbol,
    Multiplier,
    ClosedRange,
}

impl std::str::FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Kind, String> {
        match s {
            "symbol" => Ok(Kind::Symbol),
            "multiplier" => Ok(Kind::Multiplier),
            "closed-range" => Ok(Kind::ClosedRange),
            _ => Err(format!("unknown corpus kind '{s}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub name: String,
    pub kind: Kind,
    pub input: String,
    pub expected: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
}

/// `x·e^{-x}` glued to a line of slope −1 across `(x₀, 2x₀)`, where
/// `x₀e^{-x₀} = 1/(2e)`; `x₀` is taken to seven digits.
pub const PHI2_HAT: &str =
    "piecewise((-inf,2678347/1000000]: x*exp(-x); [2678347/500000,inf): 2678347/500000 - x + exp(-1)/2; blend: 8)";
pub const PHI1_HAT: &str = "piecewise((-inf,0]: 2 - exp(-x); [1,inf): x; blend: 8)";
pub const SIGN_EXP_ABS: &str = "piecewise((-inf,-1]: -exp(-x); [1,inf): exp(x); blend: 8)";
pub const SIGN_EXP_SQ: &str = "piecewise((-inf,-1]: -exp(x^2); [1,inf): exp(x^2); blend: 8)";

pub const BUILTIN: &str = "\
# polynomials and exp(x^2) are symbols
symbol | identity | x | holds
symbol | shifted-square | x^2+1 | holds
symbol | cube | x^3 | holds
symbol | gaussian-growth | exp(x^2) | holds
# |phi| does not tend to infinity
symbol | sine | sin(x) | fails:lemma1
symbol | exponential | exp(x) | fails:lemma1
symbol | constant | 7 | fails:lemma1
# too slow growth
symbol | log-growth | 1+log(1+x^2) | fails:ii
# derivatives outgrow any power of phi
symbol | fast-oscillation | x+sin(exp(x^2)) | fails:i
multiplier | one | 1 | holds
multiplier | linear | 2*x | holds
multiplier | square | 3*x^2 | holds
multiplier | gaussian | exp(-x^2) | fails
# conditions (a)/(b) hold on the half-line but -exp(-x) is not a multiplier there
multiplier | left-exponential | -exp(-x) | fails | -inf:0
closed-range | square | x^2 | closed:suf-om
closed-range | glued-hump | PHI2_HAT | closed:suf-nonsurj
closed-range | sign-exp-abs | SIGN_EXP_ABS | not-closed:asterisco
closed-range | sign-exp-square | SIGN_EXP_SQ | not-closed:asterisco
closed-range | glued-exponential | PHI1_HAT | not-closed:asterisco
";

fn expand(s: &str) -> String {
    match s {
        "PHI1_HAT" => PHI1_HAT.into(),
        "PHI2_HAT" => PHI2_HAT.into(),
        "SIGN_EXP_ABS" => SIGN_EXP_ABS.into(),
        "SIGN_EXP_SQ" => SIGN_EXP_SQ.into(),
        _ => s.into(),
    }
}

pub fn parse_corpus(text: &str) -> Result<Vec<Entry>, String> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('|').map(str::trim).collect();
        if !(4..=5).contains(&f.len()) {
            return Err(format!("line {}: expected 4 or 5 '|'-separated fields", no + 1));
        }
        let region = f.get(4).map(|r| Region::parse(r)).transpose().map_err(|e| format!("line {}: {e}", no + 1))?;
        out.push(Entry {
            kind: f[0].parse().map_err(|e| format!("line {}: {e}", no + 1))?,
            name: f[1].into(),
            input: expand(f[2]),
            expected: f[3].into(),
            region,
        });
    }
    if out.is_empty() {
        return Err("corpus has no entries".into());
    }
    Ok(out)
}

pub fn builtin() -> Vec<Entry> {
    parse_corpus(BUILTIN).expect("built-in corpus parses")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryResult {
    pub name: String,
    pub kind: Kind,
    pub input: String,
    pub expected: String,
    /// `status[:labels]`, labels comma-separated.
    pub actual: String,
    pub matched: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusReport {
    pub total: usize,
    pub matched: usize,
    pub mismatches: Vec<String>,
    pub entries: Vec<EntryResult>,
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Holds => "holds",
        Status::Fails => "fails",
        Status::Inconclusive => "inconclusive",
    }
}

/// `expected` matches when the status agrees and its label (if any) is
/// among the actual labels.
pub fn outcome_matches(expected: &str, actual: &str) -> bool {
    let (es, el) = expected.split_once(':').map_or((expected, None), |(a, b)| (a, Some(b)));
    let (as_, al) = actual.split_once(':').map_or((actual, ""), |(a, b)| (a, b));
    es == as_ && el.is_none_or(|l| al.split(',').any(|x| x == l))
}

pub fn run_entry(e: &Entry, cfg: &Config) -> EntryResult {
    let (actual, detail) = match evaluate(e, cfg) {
        Ok(r) => r,
        Err(msg) => (format!("error:{msg}"), Value::Null),
    };
    EntryResult {
        name: e.name.clone(),
        kind: e.kind,
        input: e.input.clone(),
        expected: e.expected.clone(),
        matched: outcome_matches(&e.expected, &actual),
        actual,
        detail,
    }
}

fn evaluate(e: &Entry, cfg: &Config) -> Result<(String, Value), String> {
    let f = parse(&e.input).map_err(|err| err.to_string())?;
    match e.kind {
        Kind::Symbol => {
            let r = analyze(&f, cfg.max_order, cfg).map_err(|err| err.to_string())?;
            let mut a = status_word(r.is_symbol.status()).to_string();
            if let Some(c) = r.failed_condition() {
                a = format!("{a}:{c}");
            }
            Ok((a, json!(r)))
        }
        Kind::Multiplier => {
            let r = closed_range_multiplier(&f, e.region.unwrap_or(Region::Full), cfg).map_err(|err| err.to_string())?;
            Ok((status_word(r.verdict.status()).to_string(), json!(r)))
        }
        Kind::ClosedRange => {
            let v = decide(&f, &AssumptionSet::default(), cfg).map_err(|err| err.to_string())?;
            let s = match v.status {
                CrStatus::Closed => "closed",
                CrStatus::NotClosed => "not-closed",
                CrStatus::Inconclusive => "inconclusive",
            };
            let a = if v.fired.is_empty() { s.to_string() } else { format!("{s}:{}", v.fired.join(",")) };
            Ok((a, json!(v)))
        }
    }
}

pub fn run(entries: &[Entry], cfg: &Config) -> CorpusReport {
    let results: Vec<EntryResult> = entries.iter().map(|e| run_entry(e, cfg)).collect();
    let mismatches = results
        .iter()
        .filter(|r| !r.matched)
        .map(|r| format!("{}: expected {}, got {}", r.name, r.expected, r.actual))
        .collect();
    CorpusReport { total: results.len(), matched: results.iter().filter(|r| r.matched).count(), mismatches, entries: results }
}

/// The corpus run wrapped in the standard report envelope.
pub fn corpus_report(entries: &[Entry], cfg: &Config) -> (Report, CorpusReport) {
    let r = run(entries, cfg);
    let mut rep = Report::new("corpus", cfg, json!({"entries": entries}));
    rep.section("corpus", &r);
    (rep, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        assert!(parse_corpus("# nothing\n\n").is_err());
        assert!(parse_corpus("symbol | a | x").is_err());
        assert!(parse_corpus("bogus | a | x | holds").is_err());
        let e = parse_corpus("multiplier | m | x | holds | 1:inf").unwrap();
        assert_eq!(e[0].region, Some(Region::From { a: 1.0 }));
        assert_eq!(builtin().len(), 19);
    }

    #[test]
    fn matching() {
        assert!(outcome_matches("fails:ii", "fails:ii"));
        assert!(!outcome_matches("fails:i", "fails:ii"));
        assert!(outcome_matches("not-closed:asterisco", "not-closed:nec-growth,asterisco"));
        assert!(outcome_matches("holds", "holds"));
        assert!(!outcome_matches("holds", "inconclusive"));
    }
}
