//! Dense univariate polynomials with exact rational coefficients.
//!
//! Besides ring arithmetic this module carries the exact real-root
//! machinery used for zero sets of polynomial multipliers: Yun square-free
//! decomposition followed by Sturm-sequence isolation on rational intervals.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Exact rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact rational `n/d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact rational equal to the binary value of `x` (finite only).
pub fn rat_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Nearest double to a rational. Falls back to a quotient of doubles when the
/// direct conversion is unavailable.
pub fn rat_to_f64(q: &Rational) -> f64 {
    match q.to_f64() {
        Some(v) => v,
        None => {
            let n = q.numer().to_f64().unwrap_or(f64::NAN);
            let d = q.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// `c_0 + c_1 x + … + c_d x^d`, trailing zeros stripped. The zero polynomial
/// has no coefficients.
#[derive(Clone)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
    approx: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let approx = coeffs.iter().map(rat_to_f64).collect();
        Polynomial { coeffs, approx }
    }

    pub fn zero() -> Self {
        Polynomial::new(Vec::new())
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::new(vec![c])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Polynomial::new(vec![Rational::zero(), Rational::one()])
    }

    /// `c·x^k`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut v = vec![Rational::zero(); k + 1];
        v[k] = c;
        Polynomial::new(v)
    }

    /// Polynomial from integer coefficients, lowest degree first.
    pub fn from_ints(c: &[i64]) -> Self {
        Polynomial::new(c.iter().map(|&v| rat(v)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn approx_coeffs(&self) -> &[f64] {
        &self.approx
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, s: &Rational) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut result = Polynomial::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat(i as i64))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Polynomial {
        let mut p = self.clone();
        for _ in 0..n {
            if p.is_zero() {
                break;
            }
            p = p.derivative();
        }
        p
    }

    /// `self(inner(x))`.
    pub fn compose(&self, inner: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&Polynomial::constant(c.clone()));
        }
        acc
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.approx.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let dd = divisor.coeffs.len() - 1;
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Polynomial::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = &rem[k + dd] / &lead;
            if !q.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &q * dc;
                }
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        (Polynomial::new(quot), Polynomial::new(rem))
    }

    pub fn monic(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.leading();
        self.scale(&(Rational::one() / l))
    }

    pub fn gcd(&self, other: &Polynomial) -> Polynomial {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's algorithm: returns `(factor, multiplicity)` pairs with monic,
    /// square-free, pairwise coprime factors. Constants yield an empty list.
    pub fn square_free_decomposition(&self) -> Vec<(Polynomial, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let mut a = f.gcd(&fp);
        let mut b = f.div_rem(&a).0;
        let mut c = fp.div_rem(&a).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        loop {
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.monic(), i));
            }
            b = b.div_rem(&a).0;
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Sturm sequence of a square-free polynomial.
    pub fn sturm_sequence(&self) -> Vec<Polynomial> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.neg());
        }
        seq
    }

    /// Cauchy bound: every real root lies in `(-B, B)`.
    pub fn root_bound(&self) -> Rational {
        let lead = self.leading().abs();
        let max = self
            .coeffs
            .iter()
            .take(self.coeffs.len().saturating_sub(1))
            .map(|c| c.abs() / &lead)
            .max()
            .unwrap_or_else(Rational::zero);
        max + Rational::one() + Rational::one()
    }

    /// Whether `self ≥ 0` on `[a, ∞)` (`right`) or on `(-∞, a]`.
    pub fn nonnegative_on_ray(&self, a: &Rational, right: bool) -> bool {
        if !right {
            let q = self.compose(&Polynomial::x().neg());
            return q.nonnegative_on_ray(&-a.clone(), true);
        }
        if self.is_zero() {
            return true;
        }
        if self.is_constant() || !self.leading().is_positive() {
            return self.is_constant() && !self.leading().is_negative();
        }
        // odd-multiplicity part changes sign at each of its roots
        let odd = self
            .square_free_decomposition()
            .into_iter()
            .filter(|(_, m)| m % 2 == 1)
            .fold(Polynomial::one(), |acc, (f, _)| acc.mul(&f));
        if odd.is_constant() {
            return true;
        }
        let seq = odd.sturm_sequence();
        let at_inf = {
            let mut count = 0;
            let mut last = 0;
            for p in &seq {
                let s = if p.leading().is_positive() { 1 } else { -1 };
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
            count
        };
        sign_variations(&seq, a) - at_inf == 0 && !self.eval(a).is_negative()
    }

    /// Exact real roots with multiplicities, sorted ascending.
    pub fn real_roots(&self) -> Vec<RealRoot> {
        let mut roots = Vec::new();
        for (factor, mult) in self.square_free_decomposition() {
            for (lo, hi, exact) in factor.isolate_roots() {
                let approx = match &exact {
                    Some(q) => rat_to_f64(q),
                    None => rat_to_f64(&((&lo + &hi) / rat(2))),
                };
                roots.push(RealRoot {
                    approx,
                    exact,
                    lo,
                    hi,
                    multiplicity: mult,
                });
            }
        }
        roots.sort_by(|a, b| a.approx.partial_cmp(&b.approx).unwrap_or(Ordering::Equal));
        roots
    }

    /// Isolating intervals `(lo, hi, exact)` for a square-free polynomial,
    /// refined until each has width below 2^-60 or hits a rational root.
    fn isolate_roots(&self) -> Vec<(Rational, Rational, Option<Rational>)> {
        if self.degree() == Some(1) {
            let r = -self.coeff(0) / self.coeff(1);
            return vec![(r.clone(), r.clone(), Some(r))];
        }
        let seq = self.sturm_sequence();
        let bound = self.root_bound();
        let mut pending = vec![(-bound.clone(), bound)];
        let mut isolated = Vec::new();
        while let Some((lo, hi)) = pending.pop() {
            let count = sign_variations(&seq, &lo) - sign_variations(&seq, &hi);
            if count == 0 {
                continue;
            }
            if count == 1 {
                isolated.push((lo, hi));
                continue;
            }
            let mid = (&lo + &hi) / rat(2);
            if self.eval(&mid).is_zero() {
                isolated.push((mid.clone(), mid.clone()));
                // nudge both halves away from the exact root
                let eps = (&hi - &lo) / rat(1 << 20);
                pending.push((lo, &mid - &eps));
                pending.push((&mid + eps, hi));
            } else {
                pending.push((lo, mid.clone()));
                pending.push((mid, hi));
            }
        }
        let tol = Rational::new(BigInt::one(), BigInt::one() << 60);
        isolated
            .into_iter()
            .map(|(mut lo, mut hi)| {
                if lo == hi {
                    return (lo.clone(), hi, Some(lo));
                }
                // root lies in (lo, hi]
                if self.eval(&hi).is_zero() {
                    return (hi.clone(), hi.clone(), Some(hi));
                }
                let s_hi = self.eval(&hi).signum();
                while &hi - &lo > tol {
                    let mid = (&lo + &hi) / rat(2);
                    let v = self.eval(&mid);
                    if v.is_zero() {
                        return (mid.clone(), mid.clone(), Some(mid));
                    }
                    if v.signum() == s_hi {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                (lo, hi, None)
            })
            .collect()
    }
}

fn sign_variations(seq: &[Polynomial], x: &Rational) -> i64 {
    let mut count = 0;
    let mut last = 0i32;
    for p in seq {
        let v = p.eval(x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// A real root located exactly (rational) or within a rational bracket.
#[derive(Clone, Debug)]
pub struct RealRoot {
    pub approx: f64,
    pub exact: Option<Rational>,
    pub lo: Rational,
    pub hi: Rational,
    pub multiplicity: usize,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for Polynomial {}

impl PartialOrd for Polynomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Polynomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl Hash for Polynomial {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial(")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_composition() {
        let p = Polynomial::from_ints(&[1, 0, 1]); // x^2 + 1
        let q = p.compose(&p); // (x^2+1)^2 + 1
        assert_eq!(q, Polynomial::from_ints(&[2, 0, 2, 0, 1]));
        assert_eq!(q.nth_derivative(4), Polynomial::from_ints(&[24]));
        assert_eq!(p.eval(&rat(3)), rat(10));
    }

    #[test]
    fn division_round_trips() {
        let a = Polynomial::from_ints(&[-1, 0, 0, 1]);
        let b = Polynomial::from_ints(&[-1, 1]);
        let (q, r) = a.div_rem(&b);
        assert!(r.is_zero());
        assert_eq!(q, Polynomial::from_ints(&[1, 1, 1]));
    }

    #[test]
    fn yun_recovers_multiplicities() {
        // x^2 (x - 1)
        let p = Polynomial::from_ints(&[0, 0, -1, 1]);
        let sf = p.square_free_decomposition();
        assert_eq!(sf.len(), 2);
        assert_eq!(sf[0], (Polynomial::from_ints(&[-1, 1]), 1));
        assert_eq!(sf[1], (Polynomial::x(), 2));
    }

    #[test]
    fn roots_of_factored_form_are_exact() {
        let p = Polynomial::from_ints(&[0, 0, -1, 1]);
        let roots = p.real_roots();
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].exact, Some(rat(0)));
        assert_eq!(roots[0].multiplicity, 2);
        assert_eq!(roots[1].exact, Some(rat(1)));
        assert_eq!(roots[1].multiplicity, 1);
    }

    #[test]
    fn irrational_roots_are_bracketed() {
        // x^2 - 2
        let p = Polynomial::from_ints(&[-2, 0, 1]);
        let roots = p.real_roots();
        assert_eq!(roots.len(), 2);
        assert!((roots[1].approx - 2f64.sqrt()).abs() < 1e-15);
        assert!(roots[1].exact.is_none());
        assert!(Polynomial::from_ints(&[1, 0, 1]).real_roots().is_empty());
    }
}
