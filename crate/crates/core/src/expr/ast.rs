//! Expression trees in the variable `x`.
//!
//! Every tree is built through the smart constructors below, which keep a
//! canonical shape: polynomial subtrees collapse into a single `Poly`, sums
//! and products are flattened and sorted, like terms are merged and
//! exponentials in a product are combined. Structural equality is therefore
//! a cheap (sound, incomplete) equality test; `normalize` expands further.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::jet::{EvalError, Jet};
use super::poly::{rat, rat_to_f64, Polynomial, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    E,
    Pi,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::E => std::f64::consts::E,
            Constant::Pi => std::f64::consts::PI,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Constant::E => "e",
            Constant::Pi => "pi",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Poly(Polynomial),
    Const(Constant),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    /// Integer power of a base that is not itself a polynomial raised to a
    /// nonnegative power.
    Pow(Box<Expr>, i64),
    Func(Func, Box<Expr>),
}

impl Expr {
    pub fn x() -> Expr {
        Expr::Poly(Polynomial::x())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Poly(Polynomial::constant(rat(n)))
    }

    pub fn rational(q: Rational) -> Expr {
        Expr::Poly(Polynomial::constant(q))
    }

    pub fn zero() -> Expr {
        Expr::Poly(Polynomial::zero())
    }

    pub fn one() -> Expr {
        Expr::Poly(Polynomial::one())
    }

    pub fn constant(c: Constant) -> Expr {
        Expr::Const(c)
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match self {
            Expr::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.as_polynomial().and_then(|p| p.as_constant())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Poly(p) if p.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Poly(p) if p.is_one())
    }

    /// True when the expression does not depend on `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Poly(p) => p.is_constant(),
            Expr::Const(_) => true,
            Expr::Add(v) | Expr::Mul(v) => v.iter().all(Expr::is_constant),
            Expr::Pow(b, _) => b.is_constant(),
            Expr::Func(_, a) => a.is_constant(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Poly(_) | Expr::Const(_) => 1,
            Expr::Add(v) | Expr::Mul(v) => 1 + v.iter().map(Expr::node_count).sum::<usize>(),
            Expr::Pow(b, _) => 1 + b.node_count(),
            Expr::Func(_, a) => 1 + a.node_count(),
        }
    }

    // ---- smart constructors ----

    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                Expr::Add(v) => flat.extend(v),
                other => flat.push(other),
            }
        }
        let mut poly = Polynomial::zero();
        let mut groups: BTreeMap<Expr, Polynomial> = BTreeMap::new();
        for t in flat {
            let (coef, core) = split_coefficient(t);
            match core {
                None => poly = poly.add(&coef),
                Some(core) => {
                    let e = groups.entry(core).or_insert_with(Polynomial::zero);
                    *e = e.add(&coef);
                }
            }
        }
        let mut out = Vec::new();
        if !poly.is_zero() {
            out.push(Expr::Poly(poly));
        }
        for (core, coef) in groups {
            if !coef.is_zero() {
                out.push(attach_coefficient(coef, core));
            }
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        let mut pending = factors;
        loop {
            let mut poly = Polynomial::one();
            let mut exp_args = Vec::new();
            let mut bases: BTreeMap<Expr, i64> = BTreeMap::new();
            let mut stack = pending;
            while let Some(f) = stack.pop() {
                match f {
                    Expr::Mul(v) => stack.extend(v),
                    Expr::Poly(p) => poly = poly.mul(&p),
                    Expr::Func(Func::Exp, a) => exp_args.push(*a),
                    Expr::Pow(b, k) => *bases.entry(*b).or_insert(0) += k,
                    other => *bases.entry(other).or_insert(0) += 1,
                }
            }
            if poly.is_zero() {
                return Expr::zero();
            }
            // cancel polynomial denominators that divide the numerator
            for (b, k) in bases.iter_mut() {
                if let Expr::Poly(d) = b {
                    while *k < 0 && !d.is_constant() {
                        let (q, r) = poly.div_rem(d);
                        if !r.is_zero() {
                            break;
                        }
                        poly = q;
                        *k += 1;
                    }
                }
            }
            let mut factors = Vec::new();
            let mut again = Vec::new();
            for (b, k) in bases {
                if k == 0 {
                    continue;
                }
                match Expr::powi(b, k) {
                    Expr::Poly(p) => poly = poly.mul(&p),
                    e @ (Expr::Mul(_) | Expr::Func(Func::Exp, _)) => again.push(e),
                    e => factors.push(e),
                }
            }
            if !exp_args.is_empty() {
                match Expr::func(Func::Exp, Expr::sum(exp_args)) {
                    Expr::Poly(p) => poly = poly.mul(&p),
                    e => factors.push(e),
                }
            }
            if !again.is_empty() {
                factors.push(Expr::Poly(poly));
                factors.extend(again);
                pending = factors;
                continue;
            }
            factors.sort();
            if !poly.is_one() || factors.is_empty() {
                factors.insert(0, Expr::Poly(poly));
            }
            return if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                Expr::Mul(factors)
            };
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, b])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, Expr::neg(b)])
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::product(vec![a, b])
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::product(vec![Expr::int(-1), a])
    }

    pub fn scale(q: Rational, a: Expr) -> Expr {
        Expr::product(vec![Expr::rational(q), a])
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::product(vec![a, Expr::powi(b, -1)])
    }

    pub fn powi(b: Expr, k: i64) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return b;
        }
        match b {
            Expr::Poly(p) => {
                if k > 0 {
                    Expr::Poly(p.pow(k as u32))
                } else if let Some(c) = p.as_constant().filter(|c| !c.is_zero()) {
                    let inv = Rational::one() / c;
                    Expr::Poly(Polynomial::constant(rational_pow(&inv, (-k) as u32)))
                } else {
                    Expr::Pow(Box::new(Expr::Poly(p)), k)
                }
            }
            Expr::Pow(c, m) => Expr::powi(*c, m * k),
            Expr::Mul(fs) => Expr::product(fs.into_iter().map(|f| Expr::powi(f, k)).collect()),
            Expr::Func(Func::Exp, a) => Expr::func(Func::Exp, Expr::scale(rat(k), *a)),
            Expr::Func(Func::Sqrt, a) if k % 2 == 0 => Expr::powi(*a, k / 2),
            other => Expr::Pow(Box::new(other), k),
        }
    }

    pub fn func(f: Func, a: Expr) -> Expr {
        if let Some(c) = a.as_rational() {
            match f {
                Func::Exp if c.is_zero() => return Expr::one(),
                Func::Log if c.is_one() => return Expr::zero(),
                Func::Sin if c.is_zero() => return Expr::zero(),
                Func::Cos if c.is_zero() => return Expr::one(),
                Func::Sqrt => {
                    if let Some(r) = rational_sqrt(&c) {
                        return Expr::rational(r);
                    }
                }
                _ => {}
            }
        }
        match (f, a) {
            (Func::Log, Expr::Func(Func::Exp, inner)) => *inner,
            (Func::Log, Expr::Const(Constant::E)) => Expr::one(),
            (f, a) => Expr::Func(f, Box::new(a)),
        }
    }

    // ---- calculus ----

    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Poly(p) => Expr::Poly(p.derivative()),
            Expr::Const(_) => Expr::zero(),
            Expr::Add(v) => Expr::sum(v.iter().map(Expr::differentiate).collect()),
            Expr::Mul(v) => {
                let mut terms = Vec::with_capacity(v.len());
                for i in 0..v.len() {
                    let d = v[i].differentiate();
                    if d.is_zero() {
                        continue;
                    }
                    let mut fs = v.clone();
                    fs[i] = d;
                    terms.push(Expr::product(fs));
                }
                Expr::sum(terms)
            }
            Expr::Pow(b, k) => Expr::product(vec![
                Expr::int(*k),
                Expr::powi((**b).clone(), k - 1),
                b.differentiate(),
            ]),
            Expr::Func(f, a) => {
                let da = a.differentiate();
                if da.is_zero() {
                    return Expr::zero();
                }
                let a = (**a).clone();
                let outer = match f {
                    Func::Exp => Expr::func(Func::Exp, a),
                    Func::Log => Expr::powi(a, -1),
                    Func::Sin => Expr::func(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::func(Func::Sin, a)),
                    Func::Sqrt => Expr::scale(
                        Rational::new(BigInt::from(1), BigInt::from(2)),
                        Expr::powi(Expr::func(Func::Sqrt, a), -1),
                    ),
                };
                Expr::mul(outer, da)
            }
        }
    }

    pub fn nth_derivative(&self, n: usize) -> Expr {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.differentiate();
        }
        e
    }

    /// Substitute `inner` for `x`.
    pub fn compose(&self, inner: &Expr) -> Expr {
        match self {
            Expr::Poly(p) => {
                if let Expr::Poly(q) = inner {
                    return Expr::Poly(p.compose(q));
                }
                let terms = p
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| Expr::scale(c.clone(), Expr::powi(inner.clone(), i as i64)))
                    .collect();
                Expr::sum(terms)
            }
            Expr::Const(_) => self.clone(),
            Expr::Add(v) => Expr::sum(v.iter().map(|t| t.compose(inner)).collect()),
            Expr::Mul(v) => Expr::product(v.iter().map(|t| t.compose(inner)).collect()),
            Expr::Pow(b, k) => Expr::powi(b.compose(inner), *k),
            Expr::Func(f, a) => Expr::func(*f, a.compose(inner)),
        }
    }

    // ---- evaluation ----

    /// Exact value on the polynomial subclass.
    pub fn eval_exact(&self, x: &Rational) -> Option<Rational> {
        self.as_polynomial().map(|p| p.eval(x))
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.eval_jet(&Jet::var(x, 0))?.value())
    }

    /// Evaluate with `x` replaced by the jet `t`.
    pub fn eval_jet(&self, t: &Jet) -> Result<Jet, EvalError> {
        let order = t.order();
        match self {
            Expr::Poly(p) => {
                let c = p.approx_coeffs();
                let mut acc = Jet::zero(order);
                for a in c.iter().rev() {
                    acc = acc.mul(t)?.add(&Jet::constant(*a, order))?;
                }
                Ok(acc)
            }
            Expr::Const(k) => Ok(Jet::constant(k.value(), order)),
            Expr::Add(v) => {
                let mut acc = v[0].eval_jet(t)?;
                for e in &v[1..] {
                    acc = acc.add(&e.eval_jet(t)?)?;
                }
                Ok(acc)
            }
            Expr::Mul(v) => {
                let mut acc = v[0].eval_jet(t)?;
                for e in &v[1..] {
                    acc = acc.mul(&e.eval_jet(t)?)?;
                }
                Ok(acc)
            }
            Expr::Pow(b, k) => {
                let bj = b.eval_jet(t)?;
                if *k < 0 && bj.is_zero() {
                    return Err(domain(format!("division by zero in {self}"), t));
                }
                bj.powi(*k).map_err(|e| locate(e, self, t))
            }
            Expr::Func(f, a) => {
                let aj = a.eval_jet(t)?;
                let r = match f {
                    Func::Exp => aj.exp(),
                    Func::Log => aj.ln(),
                    Func::Sqrt => aj.sqrt(),
                    Func::Sin => aj.sin_cos().map(|p| p.0),
                    Func::Cos => aj.sin_cos().map(|p| p.1),
                };
                r.map_err(|e| locate(e, self, t))
            }
        }
    }
}

fn domain(msg: String, t: &Jet) -> EvalError {
    EvalError::Domain(format!("{msg} at x = {}", t.value()))
}

fn locate(e: EvalError, at: &Expr, t: &Jet) -> EvalError {
    match e {
        EvalError::Domain(m) => domain(format!("{m} in {at}"), t),
        other => other,
    }
}

/// Split a sum term into its polynomial coefficient and the remaining
/// non-polynomial factor (None for a pure polynomial).
fn split_coefficient(t: Expr) -> (Polynomial, Option<Expr>) {
    match t {
        Expr::Poly(p) => (p, None),
        Expr::Mul(mut v) => {
            if let Expr::Poly(_) = v[0] {
                let Expr::Poly(p) = v.remove(0) else { unreachable!() };
                let core = if v.len() == 1 { v.pop().unwrap() } else { Expr::Mul(v) };
                (p, Some(core))
            } else {
                (Polynomial::one(), Some(Expr::Mul(v)))
            }
        }
        other => (Polynomial::one(), Some(other)),
    }
}

fn attach_coefficient(coef: Polynomial, core: Expr) -> Expr {
    if coef.is_one() {
        return core;
    }
    let mut v = vec![Expr::Poly(coef)];
    match core {
        Expr::Mul(fs) => v.extend(fs),
        other => v.push(other),
    }
    Expr::Mul(v)
}

fn rational_pow(q: &Rational, k: u32) -> Rational {
    let mut r = Rational::one();
    for _ in 0..k {
        r *= q;
    }
    r
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Approximate value of a constant expression.
pub fn constant_value(e: &Expr) -> Option<f64> {
    if !e.is_constant() {
        return None;
    }
    if let Some(q) = e.as_rational() {
        return Some(rat_to_f64(&q));
    }
    e.eval(0.0).ok()
}

/// Integer value of a rational, if it is one and fits.
pub fn as_small_integer(q: &Rational) -> Option<i64> {
    if q.is_integer() {
        q.numer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::x()
    }

    #[test]
    fn polynomial_subtrees_collapse() {
        let e = Expr::add(Expr::mul(x(), x()), Expr::int(1));
        assert_eq!(e, Expr::Poly(Polynomial::from_ints(&[1, 0, 1])));
        let q = Expr::div(Expr::mul(x(), x()), x());
        assert_eq!(q, x());
    }

    #[test]
    fn like_terms_merge() {
        let ex = Expr::func(Func::Exp, x());
        let e = Expr::sum(vec![
            Expr::mul(x(), ex.clone()),
            Expr::mul(Expr::int(2), ex.clone()),
            Expr::neg(Expr::mul(x(), ex.clone())),
        ]);
        assert_eq!(e, Expr::mul(Expr::int(2), ex));
    }

    #[test]
    fn chain_rule() {
        let f = Expr::func(Func::Exp, Expr::mul(x(), x()));
        let d = f.differentiate();
        let expected = Expr::product(vec![Expr::int(2), x(), f.clone()]);
        assert_eq!(d, expected);
        let cube = Expr::powi(x(), 3);
        assert_eq!(cube.nth_derivative(2), Expr::Poly(Polynomial::from_ints(&[0, 6])));
    }

    #[test]
    fn exponentials_combine() {
        let a = Expr::func(Func::Exp, x());
        let b = Expr::func(Func::Exp, Expr::neg(x()));
        assert!(Expr::mul(a.clone(), b).is_one());
        assert_eq!(Expr::powi(a, 2), Expr::func(Func::Exp, Expr::scale(rat(2), x())));
    }

    #[test]
    fn jet_evaluation() {
        let f = Expr::func(Func::Exp, Expr::neg(Expr::powi(x(), 2)));
        let v = f.eval(1.0).unwrap();
        assert!((v - 0.367_879_441_171_442_3).abs() < 1e-15);
        let g = Expr::func(Func::Log, x());
        assert!(g.eval(-1.0).unwrap_err().is_domain());
    }
}
