//! Explicit counterexamples: tailored bumps, disjointly supported series
//! built on witness sequences, compactly supported functions for a bounded
//! subsequence, oscillating families showing non-compactness, and
//! functions separating consecutive interval norms.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::Config;
use crate::expr::poly::{rat_from_f64, rat_to_f64};
use crate::expr::smooth::Compose;
use crate::expr::{EvalError, Jet, PiecewiseFn, Rational, SmoothFn};
use crate::fdb;
use crate::norms::grid::{self, Region};
use crate::norms::{d_norm, log_weight, membership_s, SampleRow};
use crate::symbol::{check_condition_i, check_condition_ii, check_limit_infinity, sample_at, Sampled};
use crate::verdict::{conjunction, Verdict};

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

// ------------------------------------------------------------------ bumps

/// Taylor coefficients at 0 of `ψ(x) = exp(1 - 1/(1-4x²))` up to `x^n`.
pub fn psi_taylor(n: usize) -> Vec<Rational> {
    // ψ = exp(g(s)) with s = 4x², g(s) = -(s + s² + …)
    let m = n / 2;
    let g: Vec<Rational> = (0..=m).map(|k| if k == 0 { Rational::zero() } else { -Rational::one() }).collect();
    let mut e = vec![Rational::one()];
    for k in 1..=m {
        let mut acc = Rational::zero();
        for i in 1..=k {
            acc += Rational::from_integer(i.into()) * &g[i] * &e[k - i];
        }
        e.push(acc / Rational::from_integer(k.into()));
    }
    let mut out = vec![Rational::zero(); n + 1];
    let mut four = Rational::one();
    for (k, ek) in e.iter().enumerate() {
        out[2 * k] = ek * &four;
        four *= Rational::from_integer(4.into());
    }
    out
}

fn psi_jet(t: &Jet) -> Result<Jet, EvalError> {
    let o = t.order();
    if t.value().abs() >= 0.5 {
        return Ok(Jet::zero(o));
    }
    let one = Jet::constant(1.0, o);
    let u = one.sub(&t.mul(t)?.scale(4.0)?)?;
    match one.sub(&one.div(&u)?)?.exp() {
        // exp(1 - 1/u) is far below any representable derivative scale here
        Err(EvalError::Overflow(_)) if u.value() < 1e-3 => Ok(Jet::zero(o)),
        r => r,
    }
}

/// `ρ = p·ψ` with `ρ′(0) = 1` and `ρ^(j)(0) = 0` for `2 ≤ j ≤ n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BumpSpec {
    pub n: usize,
    /// Coefficients of `p`, constant term first.
    #[serde(serialize_with = "ser_rationals")]
    pub coeffs: Vec<Rational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

pub fn make_bump(n: usize) -> BumpSpec {
    let n = n.max(1);
    let t = psi_taylor(n);
    let mut a = vec![Rational::zero(); n + 1];
    a[1] = Rational::one();
    for j in 2..=n {
        let mut s = Rational::zero();
        for i in 1..j {
            s += &a[i] * &t[j - i];
        }
        a[j] = -s;
    }
    while a.len() > 2 && a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    BumpSpec { n, coeffs: a }
}

impl BumpSpec {
    /// Taylor coefficients of `ρ` at 0 up to `x^n`.
    pub fn rho_taylor(&self) -> Vec<Rational> {
        let t = psi_taylor(self.n);
        (0..=self.n)
            .map(|j| {
                let mut s = Rational::zero();
                for (i, a) in self.coeffs.iter().enumerate().take(j + 1) {
                    s += a * &t[j - i];
                }
                s
            })
            .collect()
    }

    /// Exact check of the moment conditions.
    pub fn verify(&self) -> bool {
        let r = self.rho_taylor();
        r[1].is_one() && r[2..].iter().all(Zero::is_zero)
    }

    fn p_text(&self, s: &str) -> String {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("({c})"),
                1 => format!("({c})*{s}"),
                _ => format!("({c})*{s}^{i}"),
            })
            .collect();
        terms.join(" + ")
    }
}

/// Profile placed at each center of a series.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `ρ = p·ψ`
    Rho(BumpSpec),
    /// `ψ` itself, `ψ(0) = 1`.
    Psi,
}

impl Profile {
    fn eval_jet(&self, t: &Jet) -> Result<Jet, EvalError> {
        let psi = psi_jet(t)?;
        match self {
            Profile::Psi => Ok(psi),
            Profile::Rho(b) => {
                let mut p = Jet::zero(t.order());
                for c in b.coeffs.iter().rev() {
                    p = p.mul(t)?.add(&Jet::constant(rat_to_f64(c), t.order()))?;
                }
                p.mul(&psi)
            }
        }
    }

    /// Grammar text with the variable replaced by `s`.
    fn text(&self, s: &str) -> String {
        let psi = format!("exp(1 - 1/(1 - 4*{s}^2))");
        match self {
            Profile::Psi => psi,
            Profile::Rho(b) => format!("({})*{psi}", b.p_text(s)),
        }
    }
}

impl SmoothFn for Profile {
    fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        Profile::eval_jet(self, x)
    }
}

// ----------------------------------------------------------------- series

/// `f(x) = Σ w_j·profile(x - y_j)` with disjoint supports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BumpSeries {
    pub profile: Profile,
    /// Centers in construction order.
    pub centers: Vec<f64>,
    pub log_weights: Vec<f64>,
    /// `(center, index)` sorted by center, for locating the active term.
    #[serde(skip)]
    sorted: Vec<(f64, usize)>,
}

impl BumpSeries {
    pub fn new(profile: Profile, centers: Vec<f64>, log_weights: Vec<f64>) -> BumpSeries {
        let mut sorted: Vec<(f64, usize)> = centers.iter().copied().zip(0..).collect();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        BumpSeries { profile, centers, log_weights, sorted }
    }

    /// Supports `[y-1/2, y+1/2]` pairwise disjoint.
    pub fn disjoint(&self) -> bool {
        self.sorted.windows(2).all(|w| w[1].0 - w[0].0 > 1.0)
    }

    /// Index of the only term that can be nonzero at `x`.
    pub fn active(&self, x: f64) -> Option<usize> {
        let i = self.sorted.partition_point(|(c, _)| *c <= x - 0.5);
        self.sorted.get(i).filter(|(c, _)| (x - c).abs() < 0.5).map(|(_, k)| *k)
    }

    pub fn term(&self, k: usize) -> TermFn<'_> {
        TermFn { series: self, k }
    }

    /// The series in the expression grammar.
    pub fn expression(&self) -> String {
        let mut pieces = Vec::new();
        let mut lo = "-inf".to_string();
        let mut lo_open = true;
        for &(c, k) in &self.sorted {
            let y = exact(c);
            let a = exact(c - 0.5);
            let b = exact(c + 0.5);
            pieces.push(format!("{}{lo},{a}]: 0", if lo_open { "(" } else { "[" }));
            let s = format!("(x - ({y}))");
            pieces.push(format!(
                "({a},{b}): exp({})*{}",
                exact(self.log_weights[k]),
                self.profile.text(&s)
            ));
            lo = b;
            lo_open = false;
        }
        pieces.push(format!("{}{lo},inf): 0", if lo_open { "(" } else { "[" }));
        format!("piecewise({})", pieces.join("; "))
    }
}

fn exact(x: f64) -> String {
    rat_from_f64(x).map_or_else(|| format!("{x}"), |q| q.to_string())
}

impl SmoothFn for BumpSeries {
    fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        match self.active(x.value()) {
            Some(k) => self.term(k).eval_jet(x),
            None => Ok(Jet::zero(x.order())),
        }
    }
}

/// A single term `w_k·profile(x - y_k)`.
pub struct TermFn<'a> {
    series: &'a BumpSeries,
    k: usize,
}

impl SmoothFn for TermFn<'_> {
    fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        let s = &self.series;
        let t = x.sub(&Jet::constant(s.centers[self.k], x.order()))?;
        s.profile.eval_jet(&t)?.scale(s.log_weights[self.k].exp())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessRow {
    pub j: usize,
    pub x: f64,
    pub y: f64,
    /// Checked quantity and the bound it must reach.
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesReport {
    pub violation: &'static str,
    pub order: usize,
    pub rows: Vec<WitnessRow>,
    pub disjoint: bool,
    pub membership: Verdict,
    /// Largest `|f^(i)(x)| / (w_k·sup|profile^(i)|)` over support samples.
    pub support_bound_ratio: f64,
    pub verdict: Verdict,
    pub expression: String,
}

impl SeriesReport {
    /// CSV rows: `m` is the derivative order checked.
    pub fn csv_rows(&self) -> Vec<SampleRow> {
        self.rows
            .iter()
            .map(|r| SampleRow { x: r.x, j: r.j, m: self.order, value: r.value, log_value: r.value.abs().ln() })
            .collect()
    }
}

/// `|f^(i)(y_k + s)| ≤ w_k·sup|profile^(i)|` at the profile's own sample
/// points `s`, for every term and `i ≤ order`.
fn support_bound(series: &BumpSeries, order: usize, cfg: &Config) -> Result<f64, EvalError> {
    let dn = d_norm(&series.profile, order, -0.5, 0.5, cfg)?;
    let ss = grid::uniform_grid(-0.5, 0.5, 257);
    let mut worst: f64 = 0.0;
    for k in 0..series.centers.len() {
        let w = series.log_weights[k].exp();
        for &s in &ss {
            let j = series.jet(series.centers[k] + s, order)?;
            for (i, sup) in dn.per_order.iter().enumerate() {
                let v = j.derivative(i).abs();
                if v > 0.0 {
                    worst = worst.max(v / (w * sup * (1.0 + 1e-6)));
                }
            }
        }
    }
    Ok(worst)
}

fn check_rows(rows: &[WitnessRow], label: &str, tol: f64) -> Verdict {
    let bad: Vec<&WitnessRow> = rows.iter().filter(|r| !(r.value >= r.bound * (1.0 - tol))).collect();
    if bad.is_empty() {
        Verdict::holds(json!({"checked": rows.len()}))
    } else {
        Verdict::fails(label, bad.iter().map(|r| r.x).collect(), bad.iter().map(|r| r.value).collect())
    }
}

fn finish_series(
    series: BumpSeries,
    violation: &'static str,
    order: usize,
    rows: Vec<WitnessRow>,
    incomplete: Option<String>,
    cfg: &Config,
) -> Result<(BumpSeries, SeriesReport), WitnessError> {
    let membership = membership_s(&series, cfg.max_order, Region::Full, cfg)?;
    let ratio = support_bound(&series, cfg.max_order, cfg)?;
    let disjoint = series.disjoint();
    let ineq = check_rows(&rows, "witness inequality below bound", 1e-9);
    let supp = if ratio <= 1.0 {
        Verdict::holds(json!({"ratio": ratio}))
    } else {
        Verdict::inconclusive(format!("support bound exceeded by factor {ratio}"))
    };
    let dis = if disjoint {
        Verdict::holds(json!({}))
    } else {
        Verdict::inconclusive("supports overlap")
    };
    let mut verdict = conjunction(&[("inequalities", &ineq), ("membership", &membership), ("support", &supp), ("disjoint", &dis)]);
    if let Some(why) = incomplete {
        verdict = Verdict::inconclusive(format!("sequence extension stopped: {why}"));
    }
    let expression = series.expression();
    let report = SeriesReport { violation, order, rows, disjoint, membership, support_bound_ratio: ratio, verdict, expression };
    Ok((series, report))
}

fn side_of(v: &Verdict) -> f64 {
    match v.witness() {
        Some(w) => match w.detail.get("side").and_then(|s| s.as_str()) {
            Some("left") => -1.0,
            Some(_) => 1.0,
            None => w.points.iter().copied().find(|x| *x != 0.0).map_or(1.0, f64::signum),
        },
        None => 1.0,
    }
}

/// Series violating `f∘φ ∈ S` when `|φ^(n)(x_j)| ≥ j(1+φ(x_j)²)^j` along a
/// sequence: weights `(1+y_j²)^{-j}` at `y_j = φ(x_j)` and profile `ρ`.
pub fn build_witness_cond_i(
    phi: &PiecewiseFn,
    n: Option<usize>,
    count: usize,
    cfg: &Config,
) -> Result<(BumpSeries, SeriesReport), WitnessError> {
    let s = Sampled::new(phi, cfg.max_order, Region::Full, cfg)?;
    let v = check_condition_i(phi, &s, cfg.max_order, cfg);
    let Some(w) = v.witness() else {
        return Err(WitnessError::Precondition(format!("condition (i) does not fail: {}", v.summary())));
    };
    let n = n.unwrap_or_else(|| w.detail.get("j").and_then(|j| j.as_u64()).unwrap_or(1) as usize).max(1);
    let side = side_of(&v);
    let bump = make_bump(n);
    let (mut xs, mut ys, mut rows) = (Vec::new(), Vec::new(), Vec::new());
    let mut incomplete = None;
    for j in 1..=count {
        let jf = j as f64;
        let start = xs.last().map_or(0.0, |x: &f64| x.abs() + 1.0);
        let ymin = ys.last().map_or(f64::NEG_INFINITY, |y: &f64| y.abs() + 1.0);
        let score = |x: f64| -> Option<(f64, f64)> {
            let smp = sample_at(phi, x, n).ok()??;
            let y = smp.value();
            if !(y.abs() > ymin) || !y.is_finite() {
                return None;
            }
            Some((smp.logs[n] - jf * log_weight(y) - jf.ln(), y))
        };
        let mut found = None;
        let mut width = 1.0;
        while found.is_none() && start + width <= cfg.x_max {
            let pts = grid::uniform_grid(start + 1e-9, start + width, 20_001);
            let hits: Vec<Option<(f64, f64, f64)>> =
                pts.par_iter().map(|&u| score(side * u).map(|(sc, y)| (side * u, sc, y))).collect();
            found = hits.into_iter().flatten().find(|h| h.1 >= 1e-12);
            width *= 2.0;
        }
        match found {
            Some((x, _, y)) => {
                xs.push(x);
                ys.push(y);
            }
            None => {
                incomplete = Some(format!("no admissible x_{j} beyond {start}"));
                break;
            }
        }
    }
    let logw: Vec<f64> = ys.iter().enumerate().map(|(i, y)| -((i + 1) as f64) * log_weight(*y)).collect();
    let series = BumpSeries::new(Profile::Rho(bump), ys.clone(), logw);
    for (i, &x) in xs.iter().enumerate() {
        let comp = Compose { outer: &series, inner: phi };
        let d = comp.jet(x, n)?.derivative(n).abs();
        rows.push(WitnessRow { j: i + 1, x, y: ys[i], value: d, bound: (i + 1) as f64 });
    }
    finish_series(series, "i", n, rows, incomplete, cfg)
}

/// Series violating `f∘φ ∈ S` when `|φ(x_j)|^j ≤ |x_j|`: weights
/// `|y_j|^{-j}` and profile `ψ`, so `|x_j·(f∘φ)(x_j)| ≥ 1`.
pub fn build_witness_cond_ii(phi: &PiecewiseFn, count: usize, cfg: &Config) -> Result<(BumpSeries, SeriesReport), WitnessError> {
    let s = Sampled::new(phi, 1, Region::Full, cfg)?;
    let v = check_condition_ii(phi, &s, cfg)?;
    if !v.is_fails() {
        return Err(WitnessError::Precondition(format!("condition (ii) does not fail: {}", v.summary())));
    }
    let side = side_of(&v);
    let (mut xs, mut ys) = (Vec::<f64>::new(), Vec::<f64>::new());
    let mut incomplete = None;
    for j in 1..=count {
        let jf = j as f64;
        let lo = xs.last().map_or(jf, |x| (x.abs() + 1.0).max(jf)).ln();
        let ymin = ys.last().map_or(1.0, |y| y.abs() + 1.0);
        let mut found = None;
        let mut u = lo;
        while u <= cfg.deep_tail_u {
            let x = side * u.exp();
            if let Some(smp) = sample_at(phi, x, 0)? {
                let y = smp.value();
                if y.abs() > ymin && y.is_finite() && jf * smp.logs[0] <= u {
                    found = Some((x, y));
                    break;
                }
            }
            u += 0.01;
        }
        match found {
            Some((x, y)) => {
                xs.push(x);
                ys.push(y);
            }
            None => {
                incomplete = Some(format!("no admissible x_{j} with ln|x| up to {}", cfg.deep_tail_u));
                break;
            }
        }
    }
    let logw: Vec<f64> = ys.iter().enumerate().map(|(i, y)| -((i + 1) as f64) * y.abs().ln()).collect();
    let series = BumpSeries::new(Profile::Psi, ys.clone(), logw);
    let comp = Compose { outer: &series, inner: phi };
    let rows = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = comp.eval(x)?;
            Ok(WitnessRow { j: i + 1, x, y: ys[i], value: (x * f).abs(), bound: 1.0 })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    finish_series(series, "ii", 0, rows, incomplete, cfg)
}

// ----------------------------------------------------------------- lemma 1

/// `ψ(x - ℓ)`: compactly supported with value 1 at `ℓ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftedBump {
    pub center: f64,
}

impl SmoothFn for ShiftedBump {
    fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        psi_jet(&x.sub(&Jet::constant(self.center, x.order()))?)
    }
}

impl ShiftedBump {
    pub fn expression(&self) -> String {
        let c = exact(self.center);
        let a = exact(self.center - 0.5);
        let b = exact(self.center + 0.5);
        format!("piecewise((-inf,{a}]: 0; ({a},{b}): {}; [{b},inf): 0)", Profile::Psi.text(&format!("(x - ({c}))")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub ell: f64,
    pub rows: Vec<WitnessRow>,
    pub verdict: Verdict,
    pub expression: String,
}

/// When `φ` stays bounded along `x_j → ∞`, `f = ψ(· - ℓ)` has `x_j·f(φ(x_j))`
/// unbounded, so `f∘φ ∉ S`.
pub fn lemma1_witness(phi: &PiecewiseFn, count: usize, cfg: &Config) -> Result<(ShiftedBump, Lemma1Report), WitnessError> {
    let s = Sampled::new(phi, 0, Region::Full, cfg)?;
    let v = check_limit_infinity(phi, &s, cfg);
    let Some(w) = v.witness() else {
        return Err(WitnessError::Precondition(format!("|phi| tends to infinity: {}", v.summary())));
    };
    let mut pts: Vec<f64> = w.points.clone();
    pts.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    pts.truncate(count.max(1));
    let far = *pts.last().unwrap();
    let mut ell = phi.eval(far)?;
    if ell.abs() < 1e-6 {
        ell = 0.0;
    }
    let f = ShiftedBump { center: ell };
    let rows = pts
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let y = phi.eval(x)?;
            Ok(WitnessRow { j: i + 1, x, y, value: (x * f.eval(y)?).abs(), bound: 0.5 * x.abs() })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    // f(φ(x_j)) → 1 on the far half of the sequence while |x_j| grows
    let half = &rows[rows.len() / 2..];
    let verdict = check_rows(half, "f(phi(x_j)) does not approach f(l) = 1", 0.0);
    let expression = f.expression();
    Ok((f, Lemma1Report { ell, rows, verdict, expression }))
}

// -------------------------------------------------------- non-compactness

/// `A·sin(ω(x - c))·ψ((x - m)/w)`, supported in `[m - w/2, m + w/2]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscBump {
    pub amplitude: f64,
    pub omega: f64,
    pub mid: f64,
    pub width: f64,
}

impl SmoothFn for OscBump {
    fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        let o = x.order();
        let t = x.sub(&Jet::constant(self.mid, o))?;
        let (s, _) = t.scale(self.omega)?.sin_cos()?;
        let b = psi_jet(&t.scale(1.0 / self.width)?)?;
        s.mul(&b)?.scale(self.amplitude)
    }
}

impl OscBump {
    pub fn expression(&self) -> String {
        let (lo, hi) = (exact(self.mid - self.width / 2.0), exact(self.mid + self.width / 2.0));
        let t = format!("(x - ({}))", exact(self.mid));
        let u = format!("({t}/({}))", exact(self.width));
        format!(
            "piecewise((-inf,{lo}]: 0; ({lo},{hi}): ({})*sin(({})*{t})*{}; [{hi},inf): 0)",
            exact(self.amplitude),
            exact(self.omega),
            Profile::Psi.text(&u)
        )
    }

    fn support(&self) -> (f64, f64) {
        (self.mid - self.width / 2.0, self.mid + self.width / 2.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyMember {
    pub j: usize,
    pub f: OscBump,
    /// `‖f‖_{p-1}` on the image interval.
    pub norm_low: f64,
    /// `δ^p‖f^(p)‖_∞` against `λ_p ε + j`.
    pub lhs: f64,
    pub rhs: f64,
    /// `sup_{[a,b]} |(f∘φ)^(p)|` and where it is attained.
    pub composite_sup: f64,
    pub composite_x: f64,
    pub expression: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonCompactFamily {
    pub interval: (f64, f64),
    pub image: (f64, f64),
    pub delta: f64,
    pub p: usize,
    pub eps: f64,
    pub lambda: f64,
    pub members: Vec<FamilyMember>,
}

impl NonCompactFamily {
    pub fn csv_rows(&self) -> Vec<SampleRow> {
        self.members
            .iter()
            .map(|m| SampleRow { x: m.composite_x, j: m.j, m: self.p, value: m.composite_sup, log_value: m.composite_sup.ln() })
            .collect()
    }
}

/// Min of `|φ′|` on `[a, b]` after checking `φ′` keeps one sign.
fn monotone_delta(phi: &PiecewiseFn, a: f64, b: f64, cfg: &Config) -> Result<f64, WitnessError> {
    let xs = grid::uniform_grid(a, b, cfg.interval_points);
    let d: Vec<f64> = xs.par_iter().map(|&x| phi.jet(x, 1).map(|j| j.derivative(1))).collect::<Result<_, _>>()?;
    let pos = d.iter().all(|v| *v > 0.0);
    let neg = d.iter().all(|v| *v < 0.0);
    if !pos && !neg {
        let i = d.iter().position(|v| *v == 0.0 || v.signum() != d[0].signum()).unwrap_or(0);
        return Err(WitnessError::Precondition(format!("phi is not strictly monotone on [{a}, {b}] (phi' changes sign near {})", xs[i])));
    }
    let neg_abs: Vec<f64> = d.iter().map(|v| -v.abs()).collect();
    let g = |x: f64| -> Option<f64> {
        if x < a || x > b {
            return None;
        }
        phi.jet(x, 1).ok().map(|j| -j.derivative(1).abs())
    };
    let (_, v) = grid::refine_max(&xs, &neg_abs, &g, cfg.refine_top, cfg.refine_depth).unwrap();
    let delta = -v;
    if !(delta > cfg.tol) {
        return Err(WitnessError::Precondition(format!("|phi'| is not bounded below on [{a}, {b}]")));
    }
    Ok(delta)
}

/// `λ_p = max_{1≤m<p} sup_{[a,b]} |B_{p,m}(φ′, …)|`.
fn lambda_p(phi: &PiecewiseFn, p: usize, a: f64, b: f64, cfg: &Config) -> Result<f64, WitnessError> {
    if p < 2 {
        return Ok(0.0);
    }
    let xs = grid::uniform_grid(a, b, cfg.interval_points);
    let jets: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| phi.jet(x, p).map(|j| (0..=p).map(|k| j.derivative(k)).collect()))
        .collect::<Result<_, _>>()?;
    let mut best: f64 = 0.0;
    for m in 1..p {
        let cof = |d: &[f64]| fdb::bell_cofactor(p, m, d).map(f64::abs).unwrap_or(f64::NAN);
        let vals: Vec<f64> = jets.iter().map(|d| cof(d)).collect();
        let g = |x: f64| -> Option<f64> {
            if x < a || x > b {
                return None;
            }
            let j = phi.jet(x, p).ok()?;
            let d: Vec<f64> = (0..=p).map(|k| j.derivative(k)).collect();
            Some(cof(&d))
        };
        if let Some((_, v)) = grid::refine_max(&xs, &vals, &g, cfg.refine_top, cfg.refine_depth) {
            best = best.max(v);
        }
    }
    Ok(best)
}

/// A bounded sequence in the `C^{p-1}` norm on `φ([a,b])` whose images
/// under `C_φ` have unbounded `p`-th derivative on `[a,b]`.
pub fn noncompact_family(
    phi: &PiecewiseFn,
    a: f64,
    b: f64,
    p: usize,
    eps: f64,
    count: usize,
    cfg: &Config,
) -> Result<NonCompactFamily, WitnessError> {
    if !(a < b) || p == 0 || !(eps > 0.0) {
        return Err(WitnessError::Precondition("need a < b, p ≥ 1 and eps > 0".into()));
    }
    let delta = monotone_delta(phi, a, b, cfg)?;
    let lambda = lambda_p(phi, p, a, b, cfg)?;
    let (fa, fb) = (phi.eval(a)?, phi.eval(b)?);
    let (c, d) = (fa.min(fb), fa.max(fb));
    let mid = 0.5 * (c + d);
    let width = d - c;
    let mut omega = 1.0;
    let members: Vec<(usize, f64)> = (1..=count)
        .map(|j| {
            // ω only grows along the family
            loop {
                let g = OscBump { amplitude: 1.0, omega, mid, width };
                let nd = d_norm(&g, p, c, d, cfg)?;
                let low: f64 = nd.per_order[..p].iter().sum();
                let hi = nd.per_order[p] * eps / low;
                if delta.powi(p as i32) * hi > lambda * eps + j as f64 {
                    return Ok((j, omega));
                }
                omega *= 1.25;
                if omega > 1e6 {
                    return Err(WitnessError::Precondition(format!("no frequency reaches member {j}")));
                }
            }
        })
        .collect::<Result<_, WitnessError>>()?;
    let built: Vec<FamilyMember> = members
        .par_iter()
        .map(|&(j, omega)| -> Result<FamilyMember, WitnessError> {
            let g = OscBump { amplitude: 1.0, omega, mid, width };
            let nd = d_norm(&g, p, c, d, cfg)?;
            let amp = eps / nd.per_order[..p].iter().sum::<f64>();
            let f = OscBump { amplitude: amp, ..g };
            let nf = d_norm(&f, p, c, d, cfg)?;
            let norm_low: f64 = nf.per_order[..p].iter().sum();
            let comp = Compose { outer: &f, inner: phi };
            let nc = d_norm(&comp, p, a, b, cfg)?;
            let expression = f.expression();
            Ok(FamilyMember {
                j,
                norm_low,
                lhs: delta.powi(p as i32) * nf.per_order[p],
                rhs: lambda * eps + j as f64,
                composite_sup: nc.per_order[p],
                composite_x: nc.argmax[p],
                expression,
                f,
            })
        })
        .collect::<Result<_, _>>()?;
    for m in &built {
        let (lo, hi) = m.f.support();
        let ok = (m.norm_low / eps - 1.0).abs() <= 1e-6
            && m.lhs > m.rhs
            && m.composite_sup >= m.j as f64
            && lo >= c - 1e-12
            && hi <= d + 1e-12;
        if !ok {
            return Err(WitnessError::Precondition(format!("member {} failed re-verification", m.j)));
        }
    }
    Ok(NonCompactFamily { interval: (a, b), image: (c, d), delta, p, eps, lambda, members: built })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormGap {
    pub f: OscBump,
    pub norm_n: f64,
    pub norm_n1: f64,
    pub expression: String,
}

/// `sin(ωx)·bump` on `[a, b]` with `‖f‖_{n+1} ≥ ratio·‖f‖_n`.
pub fn norm_gap_function(a: f64, b: f64, n: usize, ratio: f64, cfg: &Config) -> Result<NormGap, WitnessError> {
    if !(ratio > 1.0) || !(a < b) {
        return Err(WitnessError::Precondition("need ratio > 1 and a < b".into()));
    }
    let make = |omega: f64| OscBump { amplitude: 1.0, omega, mid: 0.5 * (a + b), width: b - a };
    let gap = |omega: f64| -> Result<(f64, f64), EvalError> {
        let dn = d_norm(&make(omega), n + 1, a, b, cfg)?;
        let low: f64 = dn.per_order[..=n].iter().sum();
        Ok((low, dn.value))
    };
    let mut hi = 1.0;
    while {
        let (l, h) = gap(hi)?;
        h < ratio * l
    } {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(WitnessError::Precondition("ratio not reached".into()));
        }
    }
    let mut lo = hi / 2.0;
    for _ in 0..24 {
        let m = 0.5 * (lo + hi);
        let (l, h) = gap(m)?;
        if h >= ratio * l {
            hi = m;
        } else {
            lo = m;
        }
    }
    let (l, h) = gap(hi)?;
    let f = make(hi);
    let expression = f.expression();
    Ok(NormGap { f, norm_n: l, norm_n1: h, expression })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ratio};

    #[test]
    fn bump_polynomials() {
        assert_eq!(make_bump(1).coeffs, vec![Rational::zero(), Rational::one()]);
        assert_eq!(make_bump(2).coeffs, vec![Rational::zero(), Rational::one()]);
        assert_eq!(make_bump(3).coeffs, vec![Rational::zero(), Rational::one(), Rational::zero(), ratio(4, 1)]);
        for n in 1..=10 {
            assert!(make_bump(n).verify(), "n = {n}");
        }
        assert_eq!(psi_taylor(2)[2], ratio(-4, 1));
    }

    #[test]
    fn bump_jet_matches_taylor() {
        let b = Profile::Rho(make_bump(5));
        let j = b.jet(0.0, 5).unwrap();
        assert!((j.derivative(1) - 1.0).abs() < 1e-12);
        for k in 2..=5 {
            assert!(j.derivative(k).abs() < 1e-9, "k = {k}: {}", j.derivative(k));
        }
        assert_eq!(b.eval(0.5).unwrap(), 0.0);
        assert_eq!(b.eval(-0.7).unwrap(), 0.0);
    }

    #[test]
    fn series_expression_round_trips() {
        let s = BumpSeries::new(Profile::Rho(make_bump(3)), vec![2.0, -4.5, 7.25], vec![-1.0, -2.0, -3.0]);
        assert!(s.disjoint());
        let e = parse(&s.expression()).unwrap();
        for x in [-4.7, -4.5, -4.2, 0.0, 1.8, 2.1, 7.0, 7.3, 9.0] {
            let (u, v) = (s.eval(x).unwrap(), e.eval(x).unwrap());
            assert!((u - v).abs() <= 1e-9 * u.abs().max(1e-300), "x = {x}: {u} vs {v}");
        }
        // at most one term is active, so the series equals that term
        for x in [2.3, -4.6, 7.5] {
            let k = s.active(x).unwrap();
            assert_eq!(s.eval(x).unwrap(), s.term(k).eval(x).unwrap());
        }
    }

    #[test]
    fn preconditions() {
        let cfg = Config::default();
        assert!(build_witness_cond_i(&parse("x^2").unwrap(), None, 4, &cfg).is_err());
        assert!(build_witness_cond_ii(&parse("x^3").unwrap(), 4, &cfg).is_err());
        assert!(lemma1_witness(&parse("x^3").unwrap(), 4, &cfg).is_err());
        assert!(noncompact_family(&parse("sin(x)").unwrap(), 0.0, std::f64::consts::PI, 2, 1.0, 3, &cfg).is_err());
        assert!(noncompact_family(&parse("sin(x)").unwrap(), 0.1, 1.4, 2, 1.0, 3, &cfg).is_ok());
        assert!(norm_gap_function(0.0, 1.0, 0, 1.0, &cfg).is_err());
    }

    #[test]
    fn norm_gap() {
        let cfg = Config::default();
        let g = norm_gap_function(0.0, 1.0, 0, 10.0, &cfg).unwrap();
        assert!(g.norm_n1 >= 10.0 * g.norm_n);
        assert!(g.f.omega > 1.0 && g.f.omega < 100.0, "{}", g.f.omega);
    }
}
