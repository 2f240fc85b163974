//! Symbol recognition for `f ↦ f∘φ` on the Schwartz space.
//!
//! `φ` is a symbol iff `|φ| → ∞`, every derivative satisfies
//! `|φ^(j)| ≤ C(1+φ²)^p`, and `|φ(x)| ≥ |x|^{1/k}` for `|x| ≥ k`. The checks
//! below decide these on a log-domain sample, with exact shortcuts for
//! polynomials and `Q·exp(P)`.

use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;
use crate::expr::{EvalError, Expr, Func, PiecewiseFn, Polynomial, Rational, SmoothFn};
use crate::fdb;
use crate::norms::grid::{self, Region};
use crate::norms::tail::{classify_tail, TailFit, TailStatus};
use crate::norms::log_weight;
use crate::verdict::{conjunction, Verdict};

/// `ln(1 + e^l)`.
pub fn log1p_exp(l: f64) -> f64 {
    if l > 36.0 {
        l + (-l).exp().ln_1p()
    } else {
        l.exp().ln_1p()
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub sign: i32,
    /// `ln|φ^(j)(x)|`, `j = 0..=order`.
    pub logs: Vec<f64>,
}

impl Sample {
    /// `ln(1+φ²)`
    pub fn log_sq(&self) -> f64 {
        log1p_exp(2.0 * self.logs[0])
    }

    /// `ln(1+|φ|)`
    pub fn log_1p(&self) -> f64 {
        log1p_exp(self.logs[0])
    }

    pub fn value(&self) -> f64 {
        self.sign as f64 * self.logs[0].exp()
    }
}

/// Jets of a function on the base grid of a region. Points whose magnitudes
/// leave the representable range are `None`.
pub struct Sampled {
    pub xs: Vec<f64>,
    pub pts: Vec<Option<Sample>>,
    pub order: usize,
}

impl Sampled {
    pub fn new(f: &dyn SmoothFn, order: usize, region: Region, cfg: &Config) -> Result<Sampled, EvalError> {
        let xs = grid::base_grid(cfg, region, &f.breakpoints());
        let pts = sample_points(f, &xs, order)?;
        Ok(Sampled { xs, pts, order })
    }

    pub fn ok(&self) -> Vec<bool> {
        self.pts.iter().map(Option::is_some).collect()
    }

    pub fn window(&self, right: bool, cfg: &Config) -> Vec<usize> {
        grid::tail_window(&self.xs, &self.ok(), right, cfg)
    }

    /// Evaluate `r` at every sample (`NaN` where not evaluable).
    pub fn map(&self, r: impl Fn(f64, &Sample) -> f64 + Sync) -> Vec<f64> {
        self.xs
            .par_iter()
            .zip(&self.pts)
            .map(|(&x, p)| p.as_ref().map_or(f64::NAN, |s| r(x, s)))
            .collect()
    }

    pub fn skipped(&self) -> usize {
        self.pts.iter().filter(|p| p.is_none()).count()
    }
}

pub fn sample_at(f: &dyn SmoothFn, x: f64, order: usize) -> Result<Option<Sample>, EvalError> {
    match f.jet(x, order) {
        Ok(j) => Ok(Some(Sample { sign: j.sign(), logs: (0..=order).map(|k| j.log_abs_derivative(k)).collect() })),
        Err(EvalError::Overflow(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn sample_points(f: &dyn SmoothFn, xs: &[f64], order: usize) -> Result<Vec<Option<Sample>>, EvalError> {
    xs.par_iter().map(|&x| sample_at(f, x, order)).collect()
}

/// Recognized closed forms.
#[derive(Clone, Debug, PartialEq)]
pub enum Form {
    Poly(Polynomial),
    /// `q · exp(p)` with `p` non-constant.
    ExpPoly { q: Polynomial, p: Polynomial },
}

pub fn closed_form(phi: &PiecewiseFn) -> Option<Form> {
    let e = phi.as_single()?;
    if let Some(p) = e.as_polynomial() {
        return Some(Form::Poly(p.clone()));
    }
    let exp_poly = |e: &Expr| match e {
        Expr::Func(Func::Exp, a) => a.as_polynomial().filter(|p| !p.is_constant()).cloned(),
        _ => None,
    };
    if let Some(p) = exp_poly(e) {
        return Some(Form::ExpPoly { q: Polynomial::one(), p });
    }
    if let Expr::Mul(fs) = e {
        if let [a, b] = fs.as_slice() {
            if let (Some(q), Some(p)) = (a.as_polynomial(), exp_poly(b)) {
                return Some(Form::ExpPoly { q: q.clone(), p });
            }
        }
    }
    None
}

/// Sign of `p(x)` as `x → +∞` (`right`) or `x → -∞`; zero for the zero
/// polynomial.
pub fn poly_tail_sign(p: &Polynomial, right: bool) -> i32 {
    let Some(d) = p.degree() else { return 0 };
    let s = if p.leading().is_positive() { 1 } else { -1 };
    if right || d % 2 == 0 {
        s
    } else {
        -s
    }
}

fn side_name(right: bool) -> &'static str {
    if right {
        "right"
    } else {
        "left"
    }
}

// ---------------------------------------------------------------- ratios

/// Outcome of a "bounded ratio" test on both tails.
struct RatioTest {
    status: TailStatus,
    failing: Option<(&'static str, TailFit)>,
    log_sup: f64,
}

fn ratio_test(s: &Sampled, r: &[f64], region: Region, cfg: &Config) -> RatioTest {
    let mut status = TailStatus::Decaying;
    let mut failing = None;
    for right in [false, true] {
        if (right && !region.has_right_tail()) || (!right && !region.has_left_tail()) {
            continue;
        }
        let idx = s.window(right, cfg);
        let xs: Vec<f64> = idx.iter().map(|&i| s.xs[i]).collect();
        let ls: Vec<f64> = idx.iter().map(|&i| r[i]).collect();
        let fit = classify_tail(&xs, &ls, cfg);
        if fit.status == TailStatus::Growing && failing.is_none() {
            failing = Some((side_name(right), fit.clone()));
        }
        status = status.worst(fit.status);
    }
    let log_sup = r.iter().cloned().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    RatioTest { status, failing, log_sup }
}

fn bounded(st: TailStatus) -> bool {
    matches!(st, TailStatus::Decaying | TailStatus::Bounded)
}

/// Constant `C` with `ln C` above the refined sup of the log ratio `g`.
fn certify_constant(s: &Sampled, r: &[f64], g: &(dyn Fn(f64) -> Option<f64> + Sync), cfg: &Config) -> f64 {
    let best = grid::refine_max(&s.xs, r, g, cfg.refine_top, cfg.refine_depth);
    let l = best.map_or(f64::NEG_INFINITY, |b| b.1).max(r.iter().cloned().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max));
    if l == f64::NEG_INFINITY {
        0.0
    } else {
        l.exp() * (1.0 + 1e-6)
    }
}

// ----------------------------------------------------------------- lemma 1

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RangeClass {
    /// `φ(ℝ) = ℝ`
    Real,
    /// `φ(ℝ) = [a, ∞)`, minimum attained near `at`.
    AtLeast { a: f64, at: f64 },
    /// `φ(ℝ) = (-∞, b]`
    AtMost { b: f64, at: f64 },
}

impl std::fmt::Display for RangeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RangeClass::Real => write!(f, "R"),
            RangeClass::AtLeast { a, .. } => write!(f, "[{a}, inf)"),
            RangeClass::AtMost { b, .. } => write!(f, "(-inf, {b}]"),
        }
    }
}

fn constant_witness(phi: &dyn SmoothFn, xs: Vec<f64>, label: &str, side: &str) -> Verdict {
    let vals: Vec<f64> = xs.iter().map(|&x| phi.eval(x).unwrap_or(f64::NAN)).collect();
    let ell = median(&vals);
    Verdict::fails_with(label, xs, vals, json!({"side": side, "limit": ell}))
}

fn median(v: &[f64]) -> f64 {
    let mut w: Vec<f64> = v.iter().cloned().filter(|x| x.is_finite()).collect();
    if w.is_empty() {
        return f64::NAN;
    }
    w.sort_by(|a, b| a.partial_cmp(b).unwrap());
    w[w.len() / 2]
}

/// Minimum of `ln|φ|` per log-width block of a tail window.
fn block_minima(s: &Sampled, idx: &[usize], blocks: usize) -> Vec<(usize, f64)> {
    if idx.is_empty() {
        return vec![];
    }
    let u0 = s.xs[idx[0]].abs().ln();
    let u1 = s.xs[*idx.last().unwrap()].abs().ln();
    let mut out: Vec<Option<(usize, f64)>> = vec![None; blocks];
    for &i in idx {
        let u = s.xs[i].abs().ln();
        let b = if u1 > u0 { (((u - u0) / (u1 - u0) * blocks as f64) as usize).min(blocks - 1) } else { 0 };
        let l = s.pts[i].as_ref().unwrap().logs[0];
        if out[b].is_none_or(|(_, m)| l < m) {
            out[b] = Some((i, l));
        }
    }
    out.into_iter().flatten().collect()
}

/// `|φ(x)| → ∞` as `|x| → ∞`.
pub fn check_limit_infinity(phi: &PiecewiseFn, s: &Sampled, cfg: &Config) -> Verdict {
    match closed_form(phi) {
        Some(Form::Poly(p)) => {
            return if p.is_constant() {
                constant_witness(phi, (1..=8).map(|j| j as f64).collect(), "constant function", "right")
            } else {
                Verdict::holds(json!({"method": "exact", "degree": p.degree()}))
            };
        }
        Some(Form::ExpPoly { q, p }) if !q.is_zero() => {
            for right in [false, true] {
                if poly_tail_sign(&p, right) < 0 {
                    let sg = if right { 1.0 } else { -1.0 };
                    let xs = (1..=8).map(|j| sg * j as f64).collect();
                    return constant_witness(phi, xs, "exp(P) tends to 0", side_name(right));
                }
            }
            return Verdict::holds(json!({"method": "exact", "exponent_degree": p.degree()}));
        }
        _ => {}
    }
    let mut reasons = Vec::new();
    let mut growth = Vec::new();
    for right in [false, true] {
        let idx = s.window(right, cfg);
        let mins = block_minima(s, &idx, cfg.tail_blocks);
        if mins.len() < 4 {
            reasons.push(format!("{} tail: too few evaluable samples", side_name(right)));
            continue;
        }
        let lm: Vec<f64> = mins.iter().map(|m| m.1).collect();
        let h = lm.len() / 2;
        let near = lm[..h].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let far = lm[h..].iter().cloned().fold(f64::INFINITY, f64::min);
        let mono = lm.windows(2).all(|w| w[1] >= w[0] - 0.05);
        let (first, last) = (lm[0], lm[lm.len() - 1]);
        if mono && far > near && last >= first + 1.5f64.ln() {
            growth.push(json!({"side": side_name(right), "first_min": first.exp(), "last_min": last.exp()}));
        } else if far <= near {
            // refine the far-half block minima of |φ|
            let g = |x: f64| phi.eval(x).ok().map(|v| -v.abs());
            let iters = grid::golden_iterations(cfg.refine_depth);
            let mut pts = Vec::new();
            for &(i, _) in &mins[h..] {
                let lo = s.xs[i.saturating_sub(1)];
                let hi = s.xs[(i + 1).min(s.xs.len() - 1)];
                let x = grid::golden_max(&g, lo, hi, iters).map_or(s.xs[i], |b| b.0);
                pts.push(x);
            }
            return constant_witness(phi, pts, "bounded subsequence", side_name(right));
        } else {
            reasons.push(format!("{} tail: block minima without a clear trend", side_name(right)));
        }
    }
    if reasons.is_empty() {
        Verdict::holds(json!({"method": "tail block minima", "tails": growth}))
    } else {
        Verdict::inconclusive(reasons.join("; "))
    }
}

/// Range of a function with `|φ| → ∞`, from the tail signs and the sampled
/// extremum.
pub fn classify_range(phi: &PiecewiseFn, s: &Sampled, cfg: &Config) -> Option<RangeClass> {
    let outer = |right: bool| -> Option<i32> {
        let idx = s.window(right, cfg);
        idx.last().map(|&i| s.pts[i].as_ref().unwrap().sign)
    };
    let (l, r) = (outer(false)?, outer(true)?);
    if l != r {
        return Some(RangeClass::Real);
    }
    let sgn = r as f64;
    // extremum of sgn·φ: minimize
    let vals = s.map(|_, p| -sgn * p.value());
    let g = |x: f64| phi.eval(x).ok().map(|v| -sgn * v);
    let (at, v) = grid::refine_max(&s.xs, &vals, &g, cfg.refine_top, cfg.refine_depth)?;
    let ext = -sgn * v;
    Some(if r > 0 { RangeClass::AtLeast { a: ext, at } } else { RangeClass::AtMost { b: ext, at } })
}

pub fn check_surjective(limit: &Verdict, range: Option<&RangeClass>) -> Verdict {
    if !limit.is_holds() {
        return Verdict::inconclusive("|phi| -> inf not established");
    }
    match range {
        Some(RangeClass::Real) => Verdict::holds(json!({"range": "R", "reason": "tails of opposite sign"})),
        Some(RangeClass::AtLeast { a, at }) => Verdict::fails_with(
            "range bounded below",
            vec![*at],
            vec![*a],
            json!({"range": format!("[{a}, inf)"), "endpoint": a}),
        ),
        Some(RangeClass::AtMost { b, at }) => Verdict::fails_with(
            "range bounded above",
            vec![*at],
            vec![*b],
            json!({"range": format!("(-inf, {b}]"), "endpoint": b}),
        ),
        None => Verdict::inconclusive("range not classified"),
    }
}

// ------------------------------------------------------------ condition (i)

fn exact_p_one(phi: &PiecewiseFn) -> bool {
    match closed_form(phi) {
        Some(Form::Poly(p)) => !p.is_constant(),
        Some(Form::ExpPoly { q, p }) => !q.is_zero() && poly_tail_sign(&p, true) > 0 && poly_tail_sign(&p, false) > 0,
        None => false,
    }
}

/// `|φ^(j)| ≤ C (1+φ²)^p` for `1 ≤ j ≤ max_j`.
pub fn check_condition_i(phi: &PiecewiseFn, s: &Sampled, max_j: usize, cfg: &Config) -> Verdict {
    let exact = exact_p_one(phi);
    let mut certs = Vec::new();
    let mut unsure = Vec::new();
    for j in 1..=max_j.min(s.order) {
        let ratio = |p: u32| s.map(|_, q| q.logs[j] - p as f64 * q.log_sq());
        let chosen = if exact {
            Some(1)
        } else {
            let top = ratio_test(s, &ratio(cfg.p_max), Region::Full, cfg);
            if let Some((side, fit)) = top.failing {
                return Verdict::fails_with(
                    "derivative outgrows every power of 1+phi^2",
                    fit.points,
                    fit.log_values,
                    json!({"j": j, "p": cfg.p_max, "side": side}),
                );
            }
            (1..=cfg.p_max).find(|&p| {
                let t = ratio_test(s, &ratio(p), Region::Full, cfg);
                bounded(t.status) && t.log_sup.is_finite()
            })
        };
        let Some(p) = chosen else {
            unsure.push(j);
            continue;
        };
        let r = ratio(p);
        let g = |x: f64| {
            let q = sample_at(phi, x, j).ok()??;
            Some(q.logs[j] - p as f64 * q.log_sq())
        };
        let c = certify_constant(s, &r, &g, cfg);
        certs.push(json!({"j": j, "C": c, "p": p}));
    }
    if !unsure.is_empty() {
        return Verdict::inconclusive(format!("no stable (C, p) for orders {unsure:?}"));
    }
    Verdict::holds(json!({"method": if exact { "exact" } else { "grid" }, "orders": certs}))
}

/// Re-check a condition (i) certificate on the stored grid.
pub fn verify_condition_i(s: &Sampled, j: usize, c: f64, p: u32) -> bool {
    let lc = c.ln();
    s.pts.iter().flatten().all(|q| q.logs[j] <= lc + p as f64 * q.log_sq())
}

// ----------------------------------------------------------- condition (ii)

/// `k` with `|P(x)| ≥ |x|^{1/k}` for `|x| ≥ k`, exactly.
fn exact_k(p: &Polynomial) -> Option<u64> {
    let d = p.degree().filter(|d| *d >= 1)?;
    let x2 = Polynomial::monomial(Rational::from_integer(1.into()), 2);
    for k in 1..=8u64 {
        if (k as usize) * d > 48 {
            break;
        }
        let q = p.pow(2 * k as u32).sub(&x2);
        let a = Rational::from_integer(k.into());
        if q.nonnegative_on_ray(&a, true) && q.nonnegative_on_ray(&-a, false) {
            return Some(k);
        }
    }
    // |P| ≥ |a|/2 |x|^d once |x| ≥ max(1, 2S/|a|); then k ≥ 2 and
    // |x| ≥ (2/|a|)² suffice
    let lead = p.leading().abs();
    let s: Rational = p.coeffs()[..d].iter().map(|c| c.abs()).sum();
    let two = Rational::from_integer(2.into());
    let r = (&two * s / &lead).max(Rational::from_integer(1.into()));
    let m = (&two / &lead).max(Rational::from_integer(1.into()));
    let bound = r.max(&m * &m).ceil().to_integer();
    Some(bound.try_into().unwrap_or(u64::MAX).max(2))
}

/// Probe points `±e^u` beyond the grid, `u` up to `deep_tail_u`.
pub fn deep_probes(cfg: &Config) -> Vec<f64> {
    let u0 = cfg.x_max.ln();
    let n = 96;
    let mut v = Vec::with_capacity(2 * n);
    for i in 1..=n {
        let u = u0 + (cfg.deep_tail_u - u0) * i as f64 / n as f64;
        v.push(-u.exp());
        v.push(u.exp());
    }
    v
}

/// `|φ(x)| ≥ |x|^{1/k}` for `|x| ≥ k`.
pub fn check_condition_ii(phi: &PiecewiseFn, s: &Sampled, cfg: &Config) -> Result<Verdict, EvalError> {
    if let Some(Form::Poly(p)) = closed_form(phi) {
        if let Some(k) = exact_k(&p) {
            return Ok(Verdict::holds(json!({"method": "exact", "k": k})));
        }
    }
    let deep = deep_probes(cfg);
    let deep_pts = sample_points(phi, &deep, 0)?;
    let mut pts: Vec<(f64, f64)> = Vec::new(); // (x, ln|φ|)
    for (x, p) in s.xs.iter().zip(&s.pts).chain(deep.iter().zip(&deep_pts)) {
        if let Some(p) = p {
            pts.push((*x, p.logs[0]));
        }
    }
    pts.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap().then(a.0.partial_cmp(&b.0).unwrap()));
    let violation = |k: u64| -> Option<(f64, f64)> {
        pts.iter()
            .filter(|(x, _)| x.abs() >= k as f64)
            .map(|(x, l)| (*x, k as f64 * l - x.abs().ln()))
            .find(|(_, m)| *m < 0.0)
    };
    let kmax = cfg.k_max as u64;
    if violation(kmax).is_some() {
        let mut xs = Vec::new();
        let mut ms = Vec::new();
        let mut ks = Vec::new();
        for k in 1..=kmax {
            if let Some((x, m)) = violation(k) {
                xs.push(x);
                ms.push(m);
                ks.push(k);
            }
        }
        return Ok(Verdict::fails_with(
            "|phi|^k / |x| < 1 for every tested k",
            xs,
            ms,
            json!({"k": ks, "values": "ln(|phi(x)|^k / |x|)"}),
        ));
    }
    let k = (1..=kmax).find(|&k| violation(k).is_none()).unwrap();
    // margin must not be shrinking on the outermost probes
    for right in [false, true] {
        let side: Vec<f64> = pts
            .iter()
            .filter(|(x, _)| (*x > 0.0) == right && x.abs() >= k as f64)
            .map(|(x, l)| k as f64 * l - x.abs().ln())
            .collect();
        let tail = &side[side.len().saturating_sub(8)..];
        if tail.len() < 4 {
            return Ok(Verdict::inconclusive(format!("{} tail: too few evaluable probes", side_name(right))));
        }
        if tail.windows(2).any(|w| w[1] < w[0] - 1e-9 * w[0].abs().max(1.0)) {
            return Ok(Verdict::inconclusive(format!(
                "{} tail: margin for k={k} shrinks on the outermost probes",
                side_name(right)
            )));
        }
    }
    let reach = pts.last().map_or(0.0, |p| p.0.abs());
    Ok(Verdict::holds(json!({"method": "grid", "k": k, "checked_up_to": reach})))
}

// ------------------------------------------------------------ condition (*)

/// `|φ^(j)| ≤ C_j (1+x²)^{q_j} (1+|φ|)`.
pub fn check_condition_star(phi: &PiecewiseFn, s: &Sampled, max_j: usize, cfg: &Config) -> Verdict {
    let poly = matches!(closed_form(phi), Some(Form::Poly(ref p)) if !p.is_constant());
    let mut certs = Vec::new();
    let mut unsure = Vec::new();
    for j in 1..=max_j.min(s.order) {
        let ratio = |q: u32| s.map(|x, p| p.logs[j] - q as f64 * log_weight(x) - p.log_1p());
        let chosen = if poly {
            Some(0)
        } else {
            let top = ratio_test(s, &ratio(cfg.q_max), Region::Full, cfg);
            if let Some((side, fit)) = top.failing {
                return Verdict::fails_with(
                    "derivative outgrows (1+x^2)^q (1+|phi|)",
                    fit.points,
                    fit.log_values,
                    json!({"j": j, "q": cfg.q_max, "side": side}),
                );
            }
            (0..=cfg.q_max).find(|&q| {
                let t = ratio_test(s, &ratio(q), Region::Full, cfg);
                bounded(t.status) && t.log_sup.is_finite()
            })
        };
        let Some(q) = chosen else {
            unsure.push(j);
            continue;
        };
        let r = ratio(q);
        let g = |x: f64| {
            let p = sample_at(phi, x, j).ok()??;
            Some(p.logs[j] - q as f64 * log_weight(x) - p.log_1p())
        };
        certs.push(json!({"j": j, "C": certify_constant(s, &r, &g, cfg), "q": q}));
    }
    if !unsure.is_empty() {
        return Verdict::inconclusive(format!("no stable (C, q) for orders {unsure:?}"));
    }
    Verdict::holds(json!({"method": if poly { "exact" } else { "grid" }, "orders": certs}))
}

// ---------------------------------------------------------------- O_M

/// `|F^(k)(x)| ≤ C (1+x²)^T` for `k ≤ max_j` on `region`.
pub fn check_om(f: &PiecewiseFn, max_j: usize, region: Region, cfg: &Config) -> Result<Verdict, EvalError> {
    let s = Sampled::new(f, max_j, region, cfg)?;
    Ok(check_om_sampled(f, &s, max_j, region, cfg))
}

pub fn check_om_sampled(f: &PiecewiseFn, s: &Sampled, max_j: usize, region: Region, cfg: &Config) -> Verdict {
    let form = closed_form(f);
    if let Some(Form::ExpPoly { q, p }) = &form {
        if !q.is_zero() {
            for right in [false, true] {
                let has = if right { region.has_right_tail() } else { region.has_left_tail() };
                if has && poly_tail_sign(p, right) > 0 {
                    let sg = if right { 1.0 } else { -1.0 };
                    let xs: Vec<f64> = (0..8).map(|i| sg * cfg.tail_lo * 2f64.powi(i)).collect();
                    let ls: Vec<f64> = xs.iter().map(|&x| sample_at(f, x, 0).ok().flatten().map_or(f64::INFINITY, |p| p.logs[0])).collect();
                    return Verdict::fails_with(
                        "exp(P) grows faster than any polynomial",
                        xs,
                        ls,
                        json!({"k": 0, "side": side_name(right), "values": "ln|F|"}),
                    );
                }
            }
        }
    }
    let poly = match &form {
        Some(Form::Poly(p)) => Some(p.degree().unwrap_or(0)),
        _ => None,
    };
    let mut certs = Vec::new();
    for k in 0..=max_j.min(s.order) {
        let lk = s.map(|_, p| p.logs[k]);
        let t = match poly {
            Some(d) => (d.saturating_sub(k)).div_ceil(2) as u32,
            None => {
                let test = ratio_test(s, &lk, region, cfg);
                if let Some((side, fit)) = &test.failing {
                    if fit.super_polynomial || fit.slope.is_none() {
                        return Verdict::fails_with(
                            "derivative grows faster than any polynomial",
                            fit.points.clone(),
                            fit.log_values.clone(),
                            json!({"k": k, "side": side, "values": "ln|F^(k)|"}),
                        );
                    }
                }
                if test.status == TailStatus::Ambiguous {
                    return Verdict::inconclusive(format!("ambiguous tail of derivative {k}"));
                }
                let e = test.failing.as_ref().and_then(|f| f.1.slope).unwrap_or(0.0).max(0.0);
                let mut t = (e / 2.0 - 1e-3).ceil().max(0.0) as u32;
                // the fitted exponent may be slightly low
                while t < 64 {
                    let r = s.map(|x, p| p.logs[k] - t as f64 * log_weight(x));
                    if bounded(ratio_test(s, &r, region, cfg).status) {
                        break;
                    }
                    t += 1;
                }
                t
            }
        };
        let r = s.map(|x, p| p.logs[k] - t as f64 * log_weight(x));
        let g = |x: f64| {
            if !region.contains(x) {
                return None;
            }
            let p = sample_at(f, x, k).ok()??;
            Some(p.logs[k] - t as f64 * log_weight(x))
        };
        certs.push(json!({"k": k, "C": certify_constant(s, &r, &g, cfg), "T": t}));
    }
    Verdict::holds(json!({"method": if poly.is_some() { "exact" } else { "grid" }, "orders": certs}))
}

// ------------------------------------------------------- continuity estimate

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityEstimate {
    pub n: usize,
    pub k: u64,
    pub t: u64,
    /// Seminorm index `k·n + t`.
    pub index: u64,
    pub m: f64,
    pub c: f64,
    /// `n·M·C`: `π_n(f∘φ) ≤ factor · π_index(f)`.
    pub factor: f64,
    /// Whether the chosen `t` also passed the tail test.
    pub tail_checked: bool,
}

fn logsumexp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Upper bound `ln Σ |terms|` of the Bell cofactor `B_{j,ℓ}` from the logs
/// of `φ', φ'', …`.
fn log_bell_bound(j: usize, l: usize, logs: &[f64]) -> f64 {
    let parts = fdb::enumerate_partitions(j).expect("order in range");
    let terms: Vec<f64> = parts
        .iter()
        .filter(|p| p.k_total() == l)
        .map(|p| {
            let c = num_traits::ToPrimitive::to_f64(&fdb::fdb_coefficient(p)).unwrap_or(f64::MAX).ln();
            c + p.k.iter().enumerate().filter(|(_, k)| **k > 0).map(|(i, k)| *k as f64 * logs[i + 1]).sum::<f64>()
        })
        .collect();
    logsumexp(&terms)
}

/// Index and factor of `π_n(f∘φ) ≤ n·M·C·π_{kn+t}(f)`, from the (i) and
/// (ii) certificates.
pub fn continuity_estimate(s: &Sampled, cond_i: &Verdict, cond_ii: &Verdict, n: usize, cfg: &Config) -> Option<ContinuityEstimate> {
    let k = cond_ii.certificate()?.get("k")?.as_u64()?;
    let orders = cond_i.certificate()?.get("orders")?.as_array()?;
    let mut c = 1.0f64;
    let mut p = 1u64;
    for j in 1..=n {
        let o = orders.iter().find(|o| o["j"].as_u64() == Some(j as u64))?;
        c = c.max(o["C"].as_f64()?);
        p = p.max(o["p"].as_u64()?);
    }
    if n > s.order {
        return None;
    }
    // (1+x²)^n ≤ C (1+φ²)^{kn}
    let h = s.map(|x, q| n as f64 * (log_weight(x) - k as f64 * q.log_sq()));
    let lh = h.iter().cloned().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    if !lh.is_finite() && lh != f64::NEG_INFINITY {
        return None;
    }
    c = c.max(lh.exp() * (1.0 + 1e-6));
    let bell = s.map(|_, q| {
        let mut m = f64::NEG_INFINITY;
        for j in 1..=n {
            for l in 1..=j {
                m = m.max(log_bell_bound(j, l, &q.logs));
            }
        }
        m
    });
    let t_max = (n as u64 + 1).max(p * n as u64);
    let mut chosen = None;
    for t in (n as u64 + 1)..=t_max {
        let r: Vec<f64> = bell.iter().zip(&s.pts).map(|(b, q)| q.as_ref().map_or(f64::NAN, |q| b - t as f64 * q.log_sq())).collect();
        let test = ratio_test(s, &r, Region::Full, cfg);
        if bounded(test.status) && test.log_sup.is_finite() {
            chosen = Some((t, test.log_sup, true));
            break;
        }
        if t == t_max {
            chosen = Some((t, test.log_sup, false));
        }
    }
    let (t, lm, tail_checked) = chosen?;
    let m = (lm.exp() * (1.0 + 1e-6)).max(1.0);
    Some(ContinuityEstimate {
        n,
        k,
        t,
        index: k.saturating_mul(n as u64).saturating_add(t),
        m,
        c,
        factor: n as f64 * m * c,
        tail_checked,
    })
}

// ------------------------------------------------------------------ report

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolReport {
    pub is_symbol: Verdict,
    pub lemma1: Verdict,
    pub cond_i: Verdict,
    pub cond_ii: Verdict,
    pub star: Verdict,
    pub om: Verdict,
    pub range: Option<RangeClass>,
    pub surjective: Verdict,
    pub continuity: Vec<ContinuityEstimate>,
    pub skipped_points: usize,
}

impl SymbolReport {
    /// Which check decided a failing `is_symbol`: `lemma1`, `i` or `ii`.
    pub fn failed_condition(&self) -> Option<&'static str> {
        [("lemma1", &self.lemma1), ("i", &self.cond_i), ("ii", &self.cond_ii)]
            .into_iter()
            .find(|(_, v)| v.is_fails())
            .map(|(n, _)| n)
    }
}

pub fn is_symbol(lemma1: &Verdict, cond_i: &Verdict, cond_ii: &Verdict) -> Verdict {
    conjunction(&[("lemma1", lemma1), ("i", cond_i), ("ii", cond_ii)])
}

pub fn analyze(phi: &PiecewiseFn, max_j: usize, cfg: &Config) -> Result<SymbolReport, EvalError> {
    let max_j = max_j.max(1);
    let s = Sampled::new(phi, max_j, Region::Full, cfg)?;
    let lemma1 = check_limit_infinity(phi, &s, cfg);
    let cond_i = check_condition_i(phi, &s, max_j, cfg);
    let cond_ii = check_condition_ii(phi, &s, cfg)?;
    let sym = is_symbol(&lemma1, &cond_i, &cond_ii);
    let star = check_condition_star(phi, &s, max_j, cfg);
    let om = check_om_sampled(phi, &s, max_j, Region::Full, cfg);
    let range = if lemma1.is_holds() { classify_range(phi, &s, cfg) } else { None };
    let surjective = check_surjective(&lemma1, range.as_ref());
    let continuity = if sym.is_holds() {
        (1..=max_j.min(3)).filter_map(|n| continuity_estimate(&s, &cond_i, &cond_ii, n, cfg)).collect()
    } else {
        vec![]
    };
    Ok(SymbolReport {
        is_symbol: sym,
        lemma1,
        cond_i,
        cond_ii,
        star,
        om,
        range,
        surjective,
        continuity,
        skipped_points: s.skipped(),
    })
}

/// JSON form of a range for reports.
pub fn range_json(r: &Option<RangeClass>) -> Value {
    serde_json::to_value(r).unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn report(src: &str) -> SymbolReport {
        analyze(&parse(src).unwrap(), 4, &Config::default()).unwrap()
    }

    #[test]
    fn polynomials_are_symbols() {
        for src in ["x", "x^2+1", "x^3", "2*x-5", "x^4-3*x"] {
            let r = report(src);
            assert!(r.is_symbol.is_holds(), "{src}: {:?}", r.is_symbol);
        }
        assert_eq!(report("x^3").cond_ii.certificate().unwrap()["k"], json!(1));
    }

    #[test]
    fn exact_k_for_flat_line() {
        let p = Polynomial::new(vec![Rational::from_integer(0.into()), Rational::new(1.into(), 1000.into())]);
        let k = exact_k(&p).unwrap();
        // (x/1000)^k ≥ x on |x| ≥ k, checked at a few points in log form
        for x in [k as f64, 10.0 * k as f64, 1e12] {
            assert!((x / 1000.0).ln() * k as f64 >= x.ln());
        }
    }

    #[test]
    fn nonsymbols() {
        assert_eq!(report("sin(x)").failed_condition(), Some("lemma1"));
        assert_eq!(report("exp(x)").failed_condition(), Some("lemma1"));
        assert_eq!(report("7").failed_condition(), Some("lemma1"));
        assert_eq!(report("1+log(1+x^2)").failed_condition(), Some("ii"));
        assert_eq!(report("x+sin(exp(x^2))").failed_condition(), Some("i"));
    }

    #[test]
    fn gaussian_exponential_is_symbol() {
        let r = report("exp(x^2)");
        assert!(r.is_symbol.is_holds());
        assert!(r.om.is_fails());
        assert!(r.surjective.is_fails());
    }

    #[test]
    fn ranges() {
        assert_eq!(report("x^3").range, Some(RangeClass::Real));
        match report("x^2").range {
            Some(RangeClass::AtLeast { a, .. }) => assert!(a.abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn condition_i_certificate_reverifies() {
        let phi = parse("exp(x^2)").unwrap();
        let cfg = Config::default();
        let s = Sampled::new(&phi, 2, Region::Full, &cfg).unwrap();
        let v = check_condition_i(&phi, &s, 2, &cfg);
        for o in v.certificate().unwrap()["orders"].as_array().unwrap() {
            let (j, c, p) = (o["j"].as_u64().unwrap() as usize, o["C"].as_f64().unwrap(), o["p"].as_u64().unwrap() as u32);
            assert!(verify_condition_i(&s, j, c, p));
        }
    }

    #[test]
    fn sign_exp_satisfies_star() {
        let r = report("piecewise((-inf,-1]: -exp(-x); [1,inf): exp(x); blend: 8)");
        assert!(r.star.is_holds(), "{:?}", r.star);
        assert!(r.surjective.is_holds());
        assert!(r.om.is_fails());
    }

    #[test]
    fn identity_continuity() {
        let r = report("x");
        let e = &r.continuity[0];
        assert_eq!((e.n, e.k, e.t, e.index), (1, 1, 2, 3));
    }
}
