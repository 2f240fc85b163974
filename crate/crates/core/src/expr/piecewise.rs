//! Functions given by finitely many expression pieces covering ℝ.
//!
//! A gap between consecutive pieces is filled by a Hermite bridge: the
//! polynomial of degree `2J+1` in `t = (x-a)/h` matching the derivatives of
//! the left piece at `a` and of the right piece at `b = a+h` up to order `J`.
//! Bridge coefficients are exact rationals solved from the (exactly
//! converted) double derivative data.

use std::fmt;

use num_traits::{One, Zero};
use serde_json::json;
use thiserror::Error;

use super::ast::Expr;
use super::jet::{EvalError, Jet};
use super::poly::{rat, rat_from_f64, rat_to_f64, Polynomial, Rational};
use crate::verdict::Verdict;

pub const DEFAULT_BLEND_ORDER: usize = 8;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PiecewiseError {
    #[error("overlapping pieces at offset {0}")]
    Overlap(usize),
    #[error("non-monotone breakpoints at offset {0}")]
    NonMonotone(usize),
    #[error("empty interval at offset {0}")]
    EmptyInterval(usize),
    #[error("pieces do not cover {0}")]
    Uncovered(String),
    #[error("cannot build blend on gap [{a}, {b}]: {reason}")]
    Blend { a: String, b: String, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl Bound {
    pub fn to_f64(&self) -> f64 {
        match self {
            Bound::NegInf => f64::NEG_INFINITY,
            Bound::PosInf => f64::INFINITY,
            Bound::Finite(q) => rat_to_f64(q),
        }
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Bound::Finite(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => write!(f, "-inf"),
            Bound::PosInf => write!(f, "inf"),
            Bound::Finite(q) => write!(f, "{q}"),
        }
    }
}

/// A piece as written by the user, before validation.
#[derive(Clone, Debug)]
pub struct PieceSpec {
    pub lo: Bound,
    pub lo_closed: bool,
    pub hi: Bound,
    pub hi_closed: bool,
    pub body: Expr,
    /// Source offset for diagnostics.
    pub offset: usize,
}

/// Hermite bridge on `[a, a+h]`, stored in the local variable `t`.
/// `poly_s` is the same polynomial re-expanded around `t = 1`; evaluating
/// each half from its own end avoids cancellation in the high coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Bridge {
    pub a: Rational,
    pub h: Rational,
    pub poly_t: Polynomial,
    pub poly_s: Polynomial,
    pub order: usize,
    /// Number of times the bridge has been differentiated.
    pub derived: usize,
}

impl Bridge {
    fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        let n = x.order();
        let t = x
            .sub(&Jet::constant(rat_to_f64(&self.a), n))?
            .scale(1.0 / rat_to_f64(&self.h))?;
        let (t, poly) = if t.value() > 0.5 {
            (t.sub(&Jet::constant(1.0, n))?, &self.poly_s)
        } else {
            (t, &self.poly_t)
        };
        let mut acc = Jet::zero(n);
        for c in poly.approx_coeffs().iter().rev() {
            acc = acc.mul(&t)?.add(&Jet::constant(*c, n))?;
        }
        Ok(acc)
    }

    fn new(a: Rational, h: Rational, poly_t: Polynomial, order: usize) -> Bridge {
        let poly_s = poly_t.compose(&Polynomial::from_ints(&[1, 1]));
        Bridge { a, h, poly_t, poly_s, order, derived: 0 }
    }

    fn differentiate(&self) -> Bridge {
        let inv = Rational::one() / &self.h;
        Bridge {
            a: self.a.clone(),
            h: self.h.clone(),
            poly_t: self.poly_t.derivative().scale(&inv),
            poly_s: self.poly_s.derivative().scale(&inv),
            order: self.order,
            derived: self.derived + 1,
        }
    }

    /// The bridge as a polynomial in `x`.
    pub fn to_polynomial(&self) -> Polynomial {
        let inv = Rational::one() / &self.h;
        let t = Polynomial::new(vec![-&self.a * &inv, inv]);
        self.poly_t.compose(&t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PieceBody {
    Expr(Expr),
    Bridge(Bridge),
}

impl PieceBody {
    pub fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        match self {
            PieceBody::Expr(e) => e.eval_jet(x),
            PieceBody::Bridge(b) => b.eval_jet(x),
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            PieceBody::Expr(e) => e.clone(),
            PieceBody::Bridge(b) => Expr::Poly(b.to_polynomial()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub lo: Bound,
    pub lo_closed: bool,
    pub hi: Bound,
    pub hi_closed: bool,
    pub body: PieceBody,
    lo_f: f64,
    hi_f: f64,
}

impl Piece {
    fn new(lo: Bound, lo_closed: bool, hi: Bound, hi_closed: bool, body: PieceBody) -> Piece {
        let (lo_f, hi_f) = (lo.to_f64(), hi.to_f64());
        Piece { lo, lo_closed, hi, hi_closed, body, lo_f, hi_f }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = x > self.lo_f || (self.lo_closed && x == self.lo_f);
        let below = x < self.hi_f || (self.hi_closed && x == self.hi_f);
        above && below
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo_f
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi_f
    }

    pub fn is_bridge(&self) -> bool {
        matches!(self.body, PieceBody::Bridge(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseFn {
    pieces: Vec<Piece>,
    blend: Option<usize>,
}

impl PiecewiseFn {
    pub fn single(e: Expr) -> PiecewiseFn {
        PiecewiseFn {
            pieces: vec![Piece::new(Bound::NegInf, false, Bound::PosInf, false, PieceBody::Expr(e))],
            blend: None,
        }
    }

    pub fn from_specs(specs: Vec<PieceSpec>, blend: Option<usize>) -> Result<PiecewiseFn, PiecewiseError> {
        for s in &specs {
            if s.lo >= s.hi || s.lo == Bound::PosInf || s.hi == Bound::NegInf {
                return Err(PiecewiseError::EmptyInterval(s.offset));
            }
        }
        if specs[0].lo != Bound::NegInf {
            return Err(PiecewiseError::Uncovered(format!("({}, {})", Bound::NegInf, specs[0].lo)));
        }
        let last = specs.last().unwrap();
        if last.hi != Bound::PosInf {
            return Err(PiecewiseError::Uncovered(format!("({}, {})", last.hi, Bound::PosInf)));
        }
        let order = blend.unwrap_or(DEFAULT_BLEND_ORDER);
        let mut pieces: Vec<Piece> = Vec::new();
        for (i, s) in specs.iter().enumerate() {
            if i > 0 {
                let prev = &specs[i - 1];
                if s.lo < prev.lo {
                    return Err(PiecewiseError::NonMonotone(s.offset));
                }
                if s.lo < prev.hi {
                    return Err(PiecewiseError::Overlap(s.offset));
                }
                if s.lo == prev.hi {
                    if !s.lo_closed && !prev.hi_closed {
                        return Err(PiecewiseError::Uncovered(s.lo.to_string()));
                    }
                } else {
                    let a = prev.hi.finite().unwrap().clone();
                    let b = s.lo.finite().unwrap().clone();
                    let bridge = hermite_bridge(&prev.body, &s.body, &a, &b, order)?;
                    pieces.push(Piece::new(
                        prev.hi.clone(),
                        !prev.hi_closed,
                        s.lo.clone(),
                        !s.lo_closed,
                        PieceBody::Bridge(bridge),
                    ));
                }
            }
            pieces.push(Piece::new(
                s.lo.clone(),
                s.lo_closed,
                s.hi.clone(),
                s.hi_closed,
                PieceBody::Expr(s.body.clone()),
            ));
        }
        Ok(PiecewiseFn { pieces, blend })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn blend_order(&self) -> Option<usize> {
        self.blend
    }

    /// The expression of a one-piece function.
    pub fn as_single(&self) -> Option<&Expr> {
        match self.pieces.as_slice() {
            [p] => match &p.body {
                PieceBody::Expr(e) => Some(e),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        self.as_single().and_then(Expr::as_polynomial)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.lo_f).collect()
    }

    pub fn breakpoints_exact(&self) -> Vec<Rational> {
        self.pieces.iter().skip(1).filter_map(|p| p.lo.finite().cloned()).collect()
    }

    /// Index of the piece used at `x`: the left one at a shared breakpoint.
    pub fn piece_index(&self, x: f64) -> usize {
        self.pieces
            .iter()
            .position(|p| p.contains(x))
            .unwrap_or(if x.is_nan() || x < 0.0 { 0 } else { self.pieces.len() - 1 })
    }

    pub fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        let v = x.value();
        if v.is_nan() {
            return Err(EvalError::Domain("argument is not a number".into()));
        }
        self.pieces[self.piece_index(v)].body.eval_jet(x)
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.eval_jet(&Jet::var(x, 0))?.value())
    }

    /// Exact value when the active piece is polynomial and `x` is exact.
    pub fn eval_exact(&self, x: &Rational) -> Option<Rational> {
        let i = self.piece_index(rat_to_f64(x));
        match &self.pieces[i].body {
            PieceBody::Expr(e) => e.eval_exact(x),
            PieceBody::Bridge(b) => Some(b.to_polynomial().eval(x)),
        }
    }

    pub fn differentiate(&self, order: usize) -> PiecewiseFn {
        let mut out = self.clone();
        for _ in 0..order {
            for p in out.pieces.iter_mut() {
                p.body = match &p.body {
                    PieceBody::Expr(e) => PieceBody::Expr(e.differentiate()),
                    PieceBody::Bridge(b) => PieceBody::Bridge(b.differentiate()),
                };
            }
        }
        out
    }

    /// Map every expression piece (bridges are expanded to polynomials).
    pub fn map_pieces(&self, f: impl Fn(&Expr) -> Expr) -> PiecewiseFn {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                Piece::new(p.lo.clone(), p.lo_closed, p.hi.clone(), p.hi_closed, PieceBody::Expr(f(&p.body.to_expr())))
            })
            .collect();
        PiecewiseFn { pieces, blend: None }
    }

    /// Pointwise combination of two functions on the common refinement of
    /// their pieces.
    pub fn combine(&self, other: &PiecewiseFn, f: impl Fn(&Expr, &Expr) -> Expr) -> PiecewiseFn {
        let mut cuts: Vec<(Bound, bool)> = Vec::new();
        for p in self.pieces.iter().chain(other.pieces.iter()) {
            if p.lo != Bound::NegInf {
                cuts.push((p.lo.clone(), p.lo_closed));
            }
        }
        cuts.sort();
        cuts.dedup_by(|a, b| a.0 == b.0);
        let mut pieces = Vec::new();
        let mut lo = (Bound::NegInf, false);
        for (b, closed) in cuts.iter().chain(std::iter::once(&(Bound::PosInf, false))) {
            let hi_closed = !*closed && *b != Bound::PosInf;
            let mid = midpoint(&lo.0, b);
            let pa = &self.pieces[self.piece_index(mid)].body;
            let pb = &other.pieces[other.piece_index(mid)].body;
            pieces.push(Piece::new(
                lo.0.clone(),
                lo.1,
                b.clone(),
                hi_closed,
                PieceBody::Expr(f(&pa.to_expr(), &pb.to_expr())),
            ));
            lo = (b.clone(), *closed);
        }
        PiecewiseFn { pieces, blend: None }
    }

    /// Compare one-sided derivatives up to `order` at every interior
    /// breakpoint.
    pub fn smoothness_check(&self, order: usize, tol: f64) -> Verdict {
        let mut worst = 0.0f64;
        for w in self.pieces.windows(2) {
            let b = w[0].hi_f;
            let left = one_sided_jet(&w[0].body, b, order);
            let right = one_sided_jet(&w[1].body, b, order);
            let (l, r) = match (left, right) {
                (Ok(l), Ok(r)) => (l, r),
                (Err(e), _) | (_, Err(e)) => {
                    return Verdict::inconclusive(format!("cannot evaluate derivatives at breakpoint {b}: {e}"))
                }
            };
            for k in 0..=order {
                let (dl, dr) = (l.derivative(k), r.derivative(k));
                if !dl.is_finite() || !dr.is_finite() {
                    return Verdict::inconclusive(format!("derivative {k} overflows at breakpoint {b}"));
                }
                let scale = dl.abs().max(dr.abs()).max(1.0);
                let jump = (dl - dr).abs();
                worst = worst.max(jump / scale);
                if jump > tol * scale {
                    return Verdict::fails_with(
                        format!("derivative {k} jumps"),
                        vec![b],
                        vec![jump],
                        json!({"order": k, "left": dl, "right": dr, "jump": dr - dl}),
                    );
                }
            }
        }
        Verdict::holds(json!({
            "order": order,
            "tol": tol,
            "breakpoints": self.breakpoints(),
            "max_relative_mismatch": worst,
        }))
    }
}

fn midpoint(a: &Bound, b: &Bound) -> f64 {
    match (a, b) {
        (Bound::NegInf, Bound::PosInf) => 0.0,
        (Bound::NegInf, Bound::Finite(q)) => rat_to_f64(q) - 1.0,
        (Bound::Finite(q), Bound::PosInf) => rat_to_f64(q) + 1.0,
        (Bound::Finite(p), Bound::Finite(q)) => rat_to_f64(&((p + q) / rat(2))),
        _ => 0.0,
    }
}

/// Derivatives of a piece at its endpoint `b`.
fn one_sided_jet(body: &PieceBody, b: f64, order: usize) -> Result<Jet, EvalError> {
    match body.eval_jet(&Jet::var(b, order)) {
        Ok(j) if j.is_finite() => Ok(j),
        Ok(_) => Err(EvalError::Overflow("breakpoint jet")),
        Err(e) => Err(e),
    }
}

/// Solve for the Hermite bridge on `[a, b]`.
fn hermite_bridge(
    left: &Expr,
    right: &Expr,
    a: &Rational,
    b: &Rational,
    order: usize,
) -> Result<Bridge, PiecewiseError> {
    let fail = |reason: String| PiecewiseError::Blend { a: a.to_string(), b: b.to_string(), reason };
    let h = b - a;
    let hf = rat_to_f64(&h);
    let data = |e: &Expr, at: &Rational| -> Result<Vec<Rational>, PiecewiseError> {
        let j = e.eval_jet(&Jet::var(rat_to_f64(at), order)).map_err(|e| fail(e.to_string()))?;
        (0..=order)
            .map(|k| {
                // Taylor coefficient in t: h^k f^(k) / k!
                let v = j.derivative(k) * hf.powi(k as i32) / factorial(k);
                rat_from_f64(v).ok_or_else(|| fail(format!("derivative {k} is not finite")))
            })
            .collect()
    };
    let l = data(left, a)?;
    let r = data(right, b)?;
    let n = order + 1;
    let deg = 2 * order + 1;
    let mut coeffs = vec![Rational::zero(); deg + 1];
    coeffs[..n].clone_from_slice(&l);
    // Conditions at t = 1 on the unknown high coefficients c_n..c_deg:
    // sum_i C(i,k) c_i = r_k  for k = 0..order.
    let mut m: Vec<Vec<Rational>> = Vec::with_capacity(n);
    for (k, rk) in r.iter().enumerate() {
        let mut rhs = rk.clone();
        for (i, c) in l.iter().enumerate() {
            rhs -= rat(binom(i, k)) * c;
        }
        let mut row: Vec<Rational> = (n..=deg).map(|i| rat(binom(i, k))).collect();
        row.push(rhs);
        m.push(row);
    }
    let sol = solve(m).ok_or_else(|| fail("singular Hermite system".into()))?;
    coeffs[n..].clone_from_slice(&sol);
    Ok(Bridge::new(a.clone(), h, Polynomial::new(coeffs), order))
}

fn factorial(k: usize) -> f64 {
    (2..=k).map(|i| i as f64).product()
}

fn binom(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}

/// Gaussian elimination on an augmented rational matrix.
fn solve(mut m: Vec<Vec<Rational>>) -> Option<Vec<Rational>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v /= &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (v, pv) in m[r].iter_mut().zip(pivot_row.iter()) {
                    *v -= &f * pv;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

impl fmt::Display for PiecewiseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let [p] = self.pieces.as_slice() {
            if let PieceBody::Expr(e) = &p.body {
                return write!(f, "{e}");
            }
        }
        let compact = self
            .pieces
            .iter()
            .all(|p| !matches!(&p.body, PieceBody::Bridge(b) if b.derived > 0));
        let mut parts = Vec::new();
        for p in &self.pieces {
            if compact && p.is_bridge() {
                continue;
            }
            parts.push(format!(
                "{}{}, {}{}: {}",
                if p.lo_closed { '[' } else { '(' },
                p.lo,
                p.hi,
                if p.hi_closed { ']' } else { ')' },
                p.body.to_expr()
            ));
        }
        let blend = if compact { self.blend } else { None };
        if let Some(j) = blend {
            parts.push(format!("blend: {j}"));
        }
        write!(f, "piecewise({})", parts.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse;

    #[test]
    fn sign_exp_abs_has_three_pieces() {
        let f = parse("piecewise((-inf,-1]: -exp(-x); [1,inf): exp(x); blend: 8)").unwrap();
        assert_eq!(f.pieces().len(), 3);
        assert!(f.pieces()[1].is_bridge());
        assert_eq!(f.breakpoints(), vec![-1.0, 1.0]);
        assert!(f.smoothness_check(8, 1e-6).is_holds());
        // odd function: the bridge is odd as well
        let v = f.eval(0.5).unwrap();
        let w = f.eval(-0.5).unwrap();
        assert!((v + w).abs() < 1e-12);
    }

    #[test]
    fn kink_is_detected() {
        let f = parse("piecewise((-inf,0]: -x; (0,inf): x)").unwrap();
        let v = f.smoothness_check(1, 1e-9);
        let w = v.witness().unwrap();
        assert_eq!(w.points, vec![0.0]);
        assert_eq!(w.detail["order"], 1);
        assert_eq!(w.detail["jump"], 2.0);
    }

    #[test]
    fn breakpoint_uses_left_piece() {
        let f = parse("piecewise((-inf,0]: 1; [0,inf): 2)").unwrap();
        assert_eq!(f.eval(0.0).unwrap(), 1.0);
        let g = parse("piecewise((-inf,0): 1; [0,inf): 2)").unwrap();
        assert_eq!(g.eval(0.0).unwrap(), 2.0);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            parse("piecewise((-inf,1]: x; [0,inf): x)"),
            Err(crate::expr::parse::ParseError::Piecewise(PiecewiseError::Overlap(_)))
        ));
        assert!(matches!(
            parse("piecewise((-inf,1]: x; [3,4]: x; [2,inf): x)"),
            Err(crate::expr::parse::ParseError::Piecewise(PiecewiseError::NonMonotone(_)))
        ));
        assert!(parse("piecewise((-inf,0): x; (0,inf): x)").is_err());
        assert!(parse("piecewise([0,inf): x)").is_err());
    }

    #[test]
    fn derivatives_act_piecewise() {
        let f = parse("piecewise((-inf,-1]: -exp(-x); [1,inf): exp(x); blend: 8)").unwrap();
        let d = f.differentiate(1);
        assert_eq!(d.breakpoints(), f.breakpoints());
        let e = std::f64::consts::E;
        assert!((d.eval(1.0).unwrap() - e).abs() < 1e-12);
        assert!((d.eval(-1.0).unwrap() - e).abs() < 1e-12);
        // bridge derivative matches the pieces at the joints
        assert!((d.eval(1.0 - 1e-9).unwrap() - e).abs() < 1e-6);
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "piecewise((-inf, -1]: -exp(-x); [1, inf): exp(x); blend: 8)",
            "piecewise((-inf, 0]: -x; (0, inf): x)",
            "x^2 + 1",
        ] {
            let f = parse(s).unwrap();
            assert_eq!(f.to_string(), s);
            assert_eq!(parse(&f.to_string()).unwrap(), f);
        }
    }
}
