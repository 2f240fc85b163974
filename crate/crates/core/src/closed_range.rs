//! Rule engine deciding whether `C_φ: f ↦ f∘φ` has closed range on the
//! Schwartz space.
//!
//! Necessary conditions are checked first (any of them firing gives
//! `NotClosed`), then sufficient ones (`Closed`); otherwise the answer is
//! `Inconclusive`. Every rule is evaluated and recorded in the trace, so a
//! necessary and a sufficient rule firing together is reported as a
//! contradiction rather than hidden by ordering.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::Config;
use crate::expr::{parse, Bound, EvalError, PiecewiseFn};
use crate::expr::smooth::Compose;
use crate::multiplier::{closed_range_multiplier, find_zeros, MultiplierReport};
use crate::norms::grid::{uniform_grid, Region};
use crate::norms::tail::{classify_tail, TailStatus};
use crate::norms::{log_weight, membership_s};
use crate::symbol::{analyze, RangeClass, Sampled, SymbolReport};
use crate::verdict::Verdict;

/// Test function vanishing on the left, `1/x` on the right.
pub const DEFAULT_CANDIDATE: &str = "piecewise((-inf,0]: 0; [1,inf): 1/x; blend: 8)";
/// Its mirror image, for symbols whose far right lands where `f` vanishes.
pub const MIRRORED_CANDIDATE: &str = "piecewise((-inf,-1]: 1/x; [0,inf): 0; blend: 8)";

/// Radii tried for half-lines after the breakpoints.
const HALF_LINE_RADII: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

#[derive(Debug, Error)]
pub enum DecideError {
    #[error("C_phi is not an operator on S: phi is not a symbol ({0})")]
    NotASymbol(String),
    #[error("bad candidate function: {0}")]
    Candidate(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Assume {
    Yes,
    No,
    Auto,
}

impl std::str::FromStr for Assume {
    type Err = String;
    fn from_str(s: &str) -> Result<Assume, String> {
        match s {
            "yes" => Ok(Assume::Yes),
            "no" => Ok(Assume::No),
            "auto" => Ok(Assume::Auto),
            _ => Err(format!("expected yes, no or auto, got '{s}'")),
        }
    }
}

/// User-supplied hypotheses; `Auto` defers to a heuristic.
#[derive(Clone, Debug, Serialize)]
pub struct AssumptionSet {
    /// `C^∞`-surjectivity of `C_φ` on the range.
    pub cinf: Assume,
    /// `φ′` has no zeros outside a compact set.
    pub deriv_nonvanishing: Assume,
    /// Explicit test function for the asterisco rule.
    pub f_candidate: Option<String>,
}

impl Default for AssumptionSet {
    fn default() -> Self {
        AssumptionSet { cinf: Assume::Auto, deriv_nonvanishing: Assume::Auto, f_candidate: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub value: Truth,
    /// `given` or `heuristic`.
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Verdict>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CrStatus {
    Closed,
    NotClosed,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Premise {
    pub name: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleRecord {
    pub rule: &'static str,
    pub kind: &'static str,
    /// The statement the rule rests on.
    pub basis: &'static str,
    pub fired: bool,
    pub premises: Vec<Premise>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedRangeVerdict {
    pub status: CrStatus,
    pub fired: Vec<&'static str>,
    pub trace: Vec<RuleRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    pub cinf: Resolved,
    pub deriv_nonvanishing: Resolved,
    pub advisory: Vec<String>,
    pub diagnostics: Vec<String>,
    pub symbol: SymbolReport,
}

impl ClosedRangeVerdict {
    pub fn rule(&self, name: &str) -> Option<&RuleRecord> {
        self.trace.iter().find(|r| r.rule == name)
    }
}

fn premise(name: impl Into<String>, verdict: &Verdict) -> Premise {
    Premise { name: name.into(), verdict: verdict.clone() }
}

fn truth_verdict(name: &str, r: &Resolved) -> Verdict {
    match r.value {
        Truth::Yes => Verdict::holds(json!({"assumption": name, "source": r.source})),
        Truth::No => Verdict::fails_with(
            format!("{name} is false"),
            vec![f64::NAN],
            vec![],
            json!({"assumption": name, "source": r.source}),
        ),
        Truth::Unknown => Verdict::inconclusive(format!("{name} unresolved")),
    }
}

// ------------------------------------------------------------ heuristics

/// Preimage heuristic for `C^∞`-surjectivity: every sampled value `y` in the
/// range (away from a finite range endpoint) should have a preimage where
/// `|φ′| > 1e-6`. Never answers `Fails`.
pub fn cinf_heuristic(phi: &PiecewiseFn, range: Option<&RangeClass>, cfg: &Config) -> Result<Verdict, EvalError> {
    let dphi = phi.differentiate(1);
    let bps = phi.breakpoints();
    let r0 = bps.iter().fold(4.0f64, |m, b| m.max(2.0 * b.abs() + 1.0)).min(64.0);
    let crit = find_zeros(&dphi, Region::Interval { a: -r0, b: r0 }, 4, cfg)?;
    let crit_x: Vec<f64> = crit.zeros.iter().map(|z| z.location).collect();
    let r = crit_x.iter().fold(r0, |m, z| m.max(2.0 * z.abs() + 1.0)).min(64.0);
    let xs = uniform_grid(-2.0 * r, 2.0 * r, 40_001);
    let vals: Vec<f64> = xs.par_iter().map(|&x| phi.eval(x).unwrap_or(f64::NAN)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, v) in xs.iter().zip(&vals) {
        if x.abs() <= r && v.is_finite() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    if !(lo < hi) {
        return Ok(Verdict::inconclusive("no attained values sampled"));
    }
    let mut ys = uniform_grid(lo, hi, 1025);
    for &z in &crit_x {
        if let Ok(v) = phi.eval(z) {
            ys.push(v);
        }
    }
    let excluded = |y: f64| match range {
        Some(RangeClass::AtLeast { a, .. }) => y < a + cfg.endpoint_exclusion * a.abs().max(1.0),
        Some(RangeClass::AtMost { b, .. }) => y > b - cfg.endpoint_exclusion * b.abs().max(1.0),
        _ => false,
    };
    ys.retain(|&y| y.is_finite() && !excluded(y));
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    let slope = |x: f64| dphi.eval(x).map(f64::abs).unwrap_or(0.0);
    let regular = |y: f64| -> bool {
        for i in 0..xs.len() - 1 {
            let (u, v) = (vals[i] - y, vals[i + 1] - y);
            if u == 0.0 {
                if slope(xs[i]) > 1e-6 {
                    return true;
                }
                continue;
            }
            if u.is_nan() || v.is_nan() || v == 0.0 || (u > 0.0) == (v > 0.0) {
                continue;
            }
            let (mut a, mut b) = (xs[i], xs[i + 1]);
            for _ in 0..64 {
                let m = 0.5 * (a + b);
                let w = phi.eval(m).unwrap_or(f64::NAN) - y;
                if w.is_nan() {
                    break;
                }
                if (w > 0.0) == (u > 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            if slope(0.5 * (a + b)) > 1e-6 {
                return true;
            }
        }
        false
    };
    let bad: Vec<f64> = ys.par_iter().copied().filter(|&y| !regular(y)).collect();
    if let Some(&y) = bad.first() {
        return Ok(Verdict::inconclusive(format!(
            "value {y} has no preimage with |phi'| above 1e-6 in [-{0}, {0}] ({1} such values)",
            2.0 * r,
            bad.len()
        )));
    }
    Ok(Verdict::holds(json!({
        "method": "preimage heuristic",
        "values": ys.len(),
        "critical_points": crit_x,
        "window": [-2.0 * r, 2.0 * r],
    })))
}

/// `φ′` vanishes only on a compact set: a complete zero scan with all zeros
/// well inside the tails.
pub fn deriv_heuristic(phi: &PiecewiseFn, cfg: &Config) -> Result<Verdict, EvalError> {
    let dphi = phi.differentiate(1);
    let scan = find_zeros(&dphi, Region::Full, 4, cfg)?;
    if !scan.complete {
        return Ok(Verdict::inconclusive(format!("zero scan of phi' incomplete: {}", scan.notes.join("; "))));
    }
    let far: Vec<f64> = scan.zeros.iter().map(|z| z.location).filter(|z| z.abs() >= cfg.tail_lo).collect();
    if !far.is_empty() {
        let n = far.len();
        return Ok(Verdict::fails_with("phi' has zeros in the tails", far, vec![0.0; n], Value::Null));
    }
    let k = scan.zeros.iter().fold(0.0f64, |m, z| m.max(z.location.abs())).ceil() + 1.0;
    Ok(Verdict::holds(json!({"nonvanishing_beyond": k, "zeros": scan.zeros.len()})))
}

fn resolve(given: Assume, heuristic: impl FnOnce() -> Result<Verdict, EvalError>) -> Result<Resolved, EvalError> {
    Ok(match given {
        Assume::Yes => Resolved { value: Truth::Yes, source: "given", evidence: None },
        Assume::No => Resolved { value: Truth::No, source: "given", evidence: None },
        Assume::Auto => {
            let v = heuristic()?;
            let value = match v.status() {
                crate::verdict::Status::Holds => Truth::Yes,
                crate::verdict::Status::Fails => Truth::No,
                crate::verdict::Status::Inconclusive => Truth::Unknown,
            };
            Resolved { value, source: "heuristic", evidence: Some(v) }
        }
    })
}

/// `|φ′| ≥ c(1+x²)^{-T}` fails for every lattice `T` when `ln|φ′|` plus the
/// widest weight still decays on a tail.
fn lower_bound_obstruction(phi: &PiecewiseFn, cfg: &Config) -> Result<Verdict, EvalError> {
    let dphi = phi.differentiate(1);
    let s = Sampled::new(&dphi, 0, Region::Full, cfg)?;
    let t = cfg.t_lattice.iter().cloned().fold(0.0, f64::max);
    let ls = s.map(|x, p| p.logs[0] + t * log_weight(x));
    for right in [false, true] {
        let idx = s.window(right, cfg);
        let xs: Vec<f64> = idx.iter().map(|&i| s.xs[i]).collect();
        let l: Vec<f64> = idx.iter().map(|&i| ls[i]).collect();
        let fit = classify_tail(&xs, &l, cfg);
        if fit.status == TailStatus::Decaying && !fit.points.is_empty() {
            return Ok(Verdict::fails_with(
                "no lattice (c, T) bounds |phi'| below",
                fit.points,
                fit.log_values,
                json!({"side": if right { "right" } else { "left" }, "T": t,
                       "values": "ln((1+x^2)^T|phi'(x)|)"}),
            ));
        }
    }
    Ok(Verdict::holds(json!({"T": t})))
}

// ------------------------------------------------------------- half-lines

fn right_lines(phi: &PiecewiseFn) -> Vec<Region> {
    let mut v = Vec::new();
    let last = phi.pieces().last().unwrap();
    if let Bound::Finite(_) = last.lo {
        v.push(Region::From { a: last.lo_f64() });
    }
    for w in phi.pieces().windows(2).rev() {
        if let Bound::Finite(_) = w[0].lo {
            let a = w[0].lo_f64();
            if !v.contains(&Region::From { a }) {
                v.push(Region::From { a });
            }
        }
    }
    for r in HALF_LINE_RADII {
        if !v.contains(&Region::From { a: r }) {
            v.push(Region::From { a: r });
        }
    }
    v
}

fn left_lines(phi: &PiecewiseFn) -> Vec<Region> {
    let mut v = Vec::new();
    let first = phi.pieces().first().unwrap();
    if let Bound::Finite(_) = first.hi {
        v.push(Region::UpTo { b: first.hi_f64() });
    }
    for w in phi.pieces().windows(2) {
        if let Bound::Finite(_) = w[1].hi {
            let b = w[1].hi_f64();
            if !v.contains(&Region::UpTo { b }) {
                v.push(Region::UpTo { b });
            }
        }
    }
    for r in HALF_LINE_RADII {
        if !v.contains(&Region::UpTo { b: -r }) {
            v.push(Region::UpTo { b: -r });
        }
    }
    v
}

/// First half-line on which `M_{φ′}` certifies closed range; all attempts
/// are returned as premises.
fn search_lines(dphi: &PiecewiseFn, lines: &[Region], cfg: &Config) -> Result<(Option<MultiplierReport>, Vec<Premise>), EvalError> {
    let mut tried = Vec::new();
    for &r in lines {
        let rep = closed_range_multiplier(dphi, r, cfg)?;
        tried.push(premise(format!("closed range of M_phi' on {r}"), &rep.verdict));
        if rep.verdict.is_holds() {
            return Ok((Some(rep), tried));
        }
    }
    Ok((None, tried))
}

// ----------------------------------------------------------------- rules

struct Ctx<'a> {
    phi: &'a PiecewiseFn,
    dphi: PiecewiseFn,
    sym: SymbolReport,
    cinf: Resolved,
    deriv: Resolved,
    cfg: &'a Config,
}

fn nec_cinf(c: &Ctx) -> RuleRecord {
    RuleRecord {
        rule: "nec-cinf",
        kind: "necessary",
        basis: "closed range forces C_phi to be surjective onto smooth functions on the range",
        fired: c.cinf.value == Truth::No,
        premises: vec![premise("C-infinity surjectivity", &truth_verdict("cinf", &c.cinf))],
        note: None,
    }
}

fn nec_growth(c: &Ctx) -> Result<(RuleRecord, Option<Value>), EvalError> {
    let mut premises = vec![
        premise("surjective", &c.sym.surjective),
        premise("phi' eventually nonvanishing", &truth_verdict("deriv_nonvanishing", &c.deriv)),
    ];
    let mut fired = false;
    let mut witness = None;
    let mut note = None;
    if c.sym.surjective.is_holds() && c.deriv.value == Truth::Yes {
        premises.push(premise("phi in O_M", &c.sym.om));
        if c.sym.om.is_fails() {
            fired = true;
            witness = Some(json!({"rule": "nec-growth", "om": c.sym.om}));
        } else {
            let lb = lower_bound_obstruction(c.phi, c.cfg)?;
            premises.push(premise("polynomial lower bound on |phi'|", &lb));
            if lb.is_fails() {
                fired = true;
                witness = Some(json!({"rule": "nec-growth", "lower_bound": lb}));
            }
        }
    } else {
        note = Some("premises not met".into());
    }
    let rec = RuleRecord {
        rule: "nec-growth",
        kind: "necessary",
        basis: "surjective phi with eventually nonvanishing phi' and closed range lies in O_M with |phi'| bounded below polynomially",
        fired,
        premises,
        note,
    };
    Ok((rec, witness))
}

fn asterisco(c: &Ctx, candidates: &[(String, PiecewiseFn)]) -> Result<(RuleRecord, Option<Value>), EvalError> {
    let mut premises = vec![premise("surjective", &c.sym.surjective), premise("condition (*)", &c.sym.star)];
    let mut fired = false;
    let mut witness = None;
    let mut note = None;
    if c.sym.surjective.is_holds() && c.sym.star.is_holds() {
        for (src, f) in candidates {
            let mf = membership_s(f, c.cfg.max_order, Region::Full, c.cfg)?;
            let comp = Compose { outer: f, inner: c.phi };
            let mfp = membership_s(&comp, c.cfg.max_order, Region::Full, c.cfg)?;
            premises.push(premise(format!("f = {src} not in S"), &negate(&mf)));
            premises.push(premise(format!("f∘phi in S for f = {src}"), &mfp));
            if mf.is_fails() && mfp.is_holds() {
                fired = true;
                witness = Some(json!({
                    "rule": "asterisco",
                    "f": src,
                    "membership_f": mf,
                    "membership_f_phi": mfp,
                }));
                break;
            }
        }
    } else {
        note = Some("premises not met".into());
    }
    let rec = RuleRecord {
        rule: "asterisco",
        kind: "necessary",
        basis: "under (*), closed range forces f in S whenever f∘phi is in S",
        fired,
        premises,
        note,
    };
    Ok((rec, witness))
}

/// Fails/Holds swapped; used to phrase "f is not in S" as a premise.
fn negate(v: &Verdict) -> Verdict {
    match v {
        Verdict::Fails { witness } => Verdict::holds(json!({"witness": witness})),
        Verdict::Holds { certificate } => Verdict::fails_with(
            "f is in S",
            vec![certificate.get("sup_x").and_then(Value::as_f64).unwrap_or(0.0)],
            vec![],
            Value::Object(certificate.clone()),
        ),
        Verdict::Inconclusive { reason } => Verdict::inconclusive(reason.clone()),
    }
}

fn suf_om(c: &Ctx) -> Result<RuleRecord, EvalError> {
    let mut premises = vec![premise("phi in O_M", &c.sym.om), premise("phi is a symbol", &c.sym.is_symbol)];
    let mut fired = false;
    if c.sym.om.is_holds() && c.sym.is_symbol.is_holds() {
        let rep = closed_range_multiplier(&c.dphi, Region::Full, c.cfg)?;
        premises.push(premise("closed range of M_phi' on R", &rep.verdict));
        fired = rep.verdict.is_holds();
    }
    Ok(RuleRecord {
        rule: "suf-om",
        kind: "sufficient",
        basis: "for a symbol in O_M, C_phi has closed range when M_phi' does",
        fired,
        premises,
        note: None,
    })
}

fn suf_nonsurj(c: &Ctx) -> Result<RuleRecord, EvalError> {
    let mut premises = vec![
        premise("not surjective", &negate_surj(&c.sym.surjective)),
        premise("C-infinity surjectivity", &truth_verdict("cinf", &c.cinf)),
    ];
    let mut fired = false;
    let mut note = None;
    if c.sym.surjective.is_fails() && c.cinf.value == Truth::Yes {
        let mut lines = right_lines(c.phi);
        lines.extend(left_lines(c.phi));
        let (found, tried) = search_lines(&c.dphi, &lines, c.cfg)?;
        premises.extend(tried);
        if let Some(rep) = found {
            fired = true;
            note = Some(format!("I = {}", rep.region));
        }
    }
    Ok(RuleRecord {
        rule: "suf-nonsurj",
        kind: "sufficient",
        basis: "a non-surjective C-infinity-surjective symbol has closed range when M_phi' does on some half-line",
        fired,
        premises,
        note,
    })
}

fn negate_surj(v: &Verdict) -> Verdict {
    match v {
        Verdict::Fails { witness } => Verdict::holds(json!({"witness": witness})),
        Verdict::Holds { .. } => Verdict::fails_with("phi is surjective", vec![0.0], vec![], Value::Null),
        Verdict::Inconclusive { reason } => Verdict::inconclusive(reason.clone()),
    }
}

fn suf_surj(c: &Ctx) -> Result<RuleRecord, EvalError> {
    let mut premises = vec![
        premise("surjective", &c.sym.surjective),
        premise("C-infinity surjectivity", &truth_verdict("cinf", &c.cinf)),
    ];
    let mut fired = false;
    let mut note = None;
    if c.sym.surjective.is_holds() && c.cinf.value == Truth::Yes {
        let (right, tried_r) = search_lines(&c.dphi, &right_lines(c.phi), c.cfg)?;
        premises.extend(tried_r);
        if let Some(r) = right {
            let (left, tried_l) = search_lines(&c.dphi, &left_lines(c.phi), c.cfg)?;
            premises.extend(tried_l);
            if let Some(l) = left {
                fired = true;
                note = Some(format!("I1 = {}, I2 = {}", l.region, r.region));
            }
        }
    }
    Ok(RuleRecord {
        rule: "suf-surj",
        kind: "sufficient",
        basis: "a surjective C-infinity-surjective symbol has closed range when M_phi' does on both tails",
        fired,
        premises,
        note,
    })
}

fn candidates(a: &AssumptionSet) -> Result<Vec<(String, PiecewiseFn)>, DecideError> {
    let srcs: Vec<String> = match &a.f_candidate {
        Some(s) => vec![s.clone()],
        None => vec![DEFAULT_CANDIDATE.into(), MIRRORED_CANDIDATE.into()],
    };
    srcs.into_iter()
        .map(|s| parse(&s).map(|f| (s.clone(), f)).map_err(|e| DecideError::Candidate(e.to_string())))
        .collect()
}

/// Run every rule and combine.
pub fn decide(phi: &PiecewiseFn, assumptions: &AssumptionSet, cfg: &Config) -> Result<ClosedRangeVerdict, DecideError> {
    let sym = analyze(phi, cfg.max_order, cfg)?;
    if !sym.is_symbol.is_holds() {
        return Err(DecideError::NotASymbol(sym.is_symbol.summary()));
    }
    let cands = candidates(assumptions)?;
    let cinf = resolve(assumptions.cinf, || cinf_heuristic(phi, sym.range.as_ref(), cfg))?;
    let deriv = resolve(assumptions.deriv_nonvanishing, || deriv_heuristic(phi, cfg))?;
    let ctx = Ctx { phi, dphi: phi.differentiate(1), sym, cinf, deriv, cfg };

    let mut trace = vec![nec_cinf(&ctx)];
    let mut witness = if trace[0].fired { Some(json!({"rule": "nec-cinf", "assumption": "cinf = no"})) } else { None };
    for (rec, w) in [nec_growth(&ctx)?, asterisco(&ctx, &cands)?] {
        if witness.is_none() {
            witness = w;
        }
        trace.push(rec);
    }
    trace.push(suf_om(&ctx)?);
    trace.push(suf_nonsurj(&ctx)?);
    trace.push(suf_surj(&ctx)?);

    let fired: Vec<&'static str> = trace.iter().filter(|r| r.fired).map(|r| r.rule).collect();
    let nec = trace.iter().any(|r| r.fired && r.kind == "necessary");
    let suf = trace.iter().any(|r| r.fired && r.kind == "sufficient");
    let mut diagnostics = Vec::new();
    let status = match (nec, suf) {
        (true, true) => {
            diagnostics.push(format!("contradiction: rules {fired:?} fired on both sides"));
            CrStatus::Inconclusive
        }
        (true, false) => CrStatus::NotClosed,
        (false, true) => CrStatus::Closed,
        (false, false) => CrStatus::Inconclusive,
    };
    if status != CrStatus::NotClosed {
        witness = None;
    }
    let mut advisory = Vec::new();
    if status == CrStatus::Closed && ctx.sym.surjective.is_holds() && ctx.deriv.value == Truth::Yes {
        advisory.push(
            "there is a closed unbounded interval I with C_phi: S(phi(I)) -> S(I) surjective and M_phi' closed range of codimension at most 1 on S(I) (not computed)"
                .into(),
        );
    }
    if ctx.cinf.source == "heuristic" && ctx.cinf.value == Truth::Yes {
        advisory.push("C-infinity surjectivity was inferred by the preimage heuristic".into());
    }
    Ok(ClosedRangeVerdict {
        status,
        fired,
        trace,
        witness,
        cinf: ctx.cinf,
        deriv_nonvanishing: ctx.deriv,
        advisory,
        diagnostics,
        symbol: ctx.sym,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> ClosedRangeVerdict {
        decide(&parse(src).unwrap(), &AssumptionSet::default(), &Config::default()).unwrap()
    }

    #[test]
    fn square_is_closed() {
        let v = run("x^2");
        assert_eq!(v.status, CrStatus::Closed, "{:?}", v.fired);
        assert!(v.rule("suf-om").unwrap().fired);
    }

    #[test]
    fn cube_cinf_unknown() {
        let v = run("x^3");
        assert_eq!(v.cinf.value, Truth::Unknown);
    }

    #[test]
    fn sign_exponentials_not_closed() {
        for src in [
            "piecewise((-inf,-1]: -exp(-x); [1,inf): exp(x); blend: 8)",
            "piecewise((-inf,-1]: -exp(x^2); [1,inf): exp(x^2); blend: 8)",
        ] {
            let v = run(src);
            assert_eq!(v.status, CrStatus::NotClosed, "{src}: {:?}", v.fired);
            assert!(v.rule("asterisco").unwrap().fired, "{src}");
        }
    }

    #[test]
    fn not_a_symbol_is_error() {
        let e = decide(&parse("sin(x)").unwrap(), &AssumptionSet::default(), &Config::default());
        assert!(matches!(e, Err(DecideError::NotASymbol(_))));
    }

    #[test]
    fn false_assumption_is_a_contradiction() {
        let a = AssumptionSet { cinf: Assume::No, ..Default::default() };
        let v = decide(&parse("x").unwrap(), &a, &Config::default()).unwrap();
        assert!(v.rule("nec-cinf").unwrap().fired);
        assert!(v.rule("suf-om").unwrap().fired);
        assert_eq!(v.status, CrStatus::Inconclusive);
        assert_eq!(v.diagnostics.len(), 1);
    }

    #[test]
    fn glued_examples() {
        let v = run("piecewise((-inf,0]: 2-exp(-x); [1,inf): x; blend: 8)");
        assert_eq!(v.status, CrStatus::NotClosed, "{:?}", v.fired);
        assert!(v.rule("asterisco").unwrap().fired);
        assert!(!v.rule("suf-surj").unwrap().fired);
        let v = run(
            "piecewise((-inf,2678347/1000000]: x*exp(-x); [2678347/500000,inf): 2678347/500000-x+exp(-1)/2; blend: 8)",
        );
        assert_eq!(v.status, CrStatus::Closed, "{:?} {:?}", v.fired, v.cinf);
        let r = v.rule("suf-nonsurj").unwrap();
        assert!(r.fired);
        assert_eq!(r.note.as_deref(), Some("I = 5.356694:inf"));
    }
}
