//! Truncated Taylor series ("jets") with a shared binary exponent.
//!
//! A jet of order `n` at a point stores the Taylor coefficients
//! `f^(k)(x)/k!` for `k = 0..=n` as `c_k · 2^exp2`. Keeping the exponent
//! outside the mantissas lets `exp(x^2)` at `x = 10^4`, or `(1+x^2)^20` at
//! `x = 10^300`, be carried without overflow, and every magnitude can be
//! read back in log-domain.

use std::f64::consts::LN_2;

use thiserror::Error;

/// Failure while evaluating a jet.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    /// A magnitude left the representable exponent range, or a trigonometric
    /// argument was not a finite double.
    #[error("overflow in {0}")]
    Overflow(&'static str),
}

impl EvalError {
    pub fn is_domain(&self) -> bool {
        matches!(self, EvalError::Domain(_))
    }
}

// Split ln 2 so that n·LN2_HI is exact for |n| < 2^31.
const LN2_HI: f64 = 6.931_471_803_691_238_164_9e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;

const EXP2_LIMIT: i64 = 1 << 60;

/// `x · 2^e`, saturating to ±inf or 0.
pub fn ldexp(x: f64, e: i64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    if e > 2200 {
        return x.signum() * f64::INFINITY;
    }
    if e < -2200 {
        return 0.0 * x.signum();
    }
    let mut v = x;
    let mut e = e as i32;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e)
}

/// Binary exponent `e` with `|x| = m·2^e`, `m ∈ [0.5, 1)`.
fn frexp_exponent(x: f64) -> i64 {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() {
        return 0;
    }
    let bits = a.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // subnormal
        return frexp_exponent(a * 2f64.powi(64)) - 64;
    }
    raw - 1022
}

fn log_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

fn factorial_f64(k: usize) -> f64 {
    (2..=k).map(|i| i as f64).product()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    exp2: i64,
    c: Vec<f64>,
}

impl Jet {
    /// The identity function at `x`, carried to `order`.
    pub fn var(x: f64, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        c[0] = x;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { exp2: 0, c }.normalized()
    }

    pub fn constant(v: f64, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { exp2: 0, c }.normalized()
    }

    pub fn zero(order: usize) -> Jet {
        Jet::constant(0.0, order)
    }

    /// Jet from Taylor coefficients `c_k · 2^exp2`.
    pub fn from_taylor(exp2: i64, c: Vec<f64>) -> Jet {
        Jet { exp2, c }.normalized()
    }

    /// Jet from plain derivative values `f^(k)(x)`.
    pub fn from_derivatives(d: &[f64]) -> Jet {
        let c = d
            .iter()
            .enumerate()
            .map(|(k, v)| v / factorial_f64(k))
            .collect();
        Jet { exp2: 0, c }.normalized()
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    pub fn mantissas(&self) -> &[f64] {
        &self.c
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|v| *v == 0.0)
    }

    /// Sign of the value: -1, 0 or 1.
    pub fn sign(&self) -> i32 {
        if self.c[0] > 0.0 {
            1
        } else if self.c[0] < 0.0 {
            -1
        } else {
            0
        }
    }

    /// The value, saturating to ±inf.
    pub fn value(&self) -> f64 {
        ldexp(self.c[0], self.exp2)
    }

    /// `f^(k)(x)`, saturating to ±inf.
    pub fn derivative(&self, k: usize) -> f64 {
        if k >= self.c.len() {
            return 0.0;
        }
        ldexp(self.c[k], self.exp2) * factorial_f64(k)
    }

    /// `ln |f^(k)(x)|`; `-inf` for an exact zero.
    pub fn log_abs_derivative(&self, k: usize) -> f64 {
        match self.c.get(k) {
            Some(&v) if v != 0.0 => v.abs().ln() + self.exp2 as f64 * LN_2 + log_factorial(k),
            _ => f64::NEG_INFINITY,
        }
    }

    pub fn log_abs_value(&self) -> f64 {
        self.log_abs_derivative(0)
    }

    /// Compare the value against a finite double.
    pub fn cmp_value(&self, q: f64) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        let v = self.value();
        if v.is_finite() {
            return v.partial_cmp(&q).unwrap_or(Equal);
        }
        if self.c[0] > 0.0 {
            Greater
        } else {
            Less
        }
    }

    /// Unscaled coefficients, or an overflow error.
    fn unscaled(&self, what: &'static str) -> Result<Vec<f64>, EvalError> {
        let v: Vec<f64> = self.c.iter().map(|&c| ldexp(c, self.exp2)).collect();
        if v.iter().all(|x| x.is_finite()) {
            Ok(v)
        } else {
            Err(EvalError::Overflow(what))
        }
    }

    fn normalized(mut self) -> Jet {
        let m = self.c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if m == 0.0 {
            self.exp2 = 0;
            return self;
        }
        if !m.is_finite() {
            return self;
        }
        if !(2f64.powi(-64)..=2f64.powi(64)).contains(&m) {
            let e = frexp_exponent(m);
            for v in self.c.iter_mut() {
                *v = ldexp(*v, -e);
            }
            self.exp2 += e;
        }
        self
    }

    fn checked(self, what: &'static str) -> Result<Jet, EvalError> {
        if self.exp2.abs() > EXP2_LIMIT || !self.is_finite() {
            Err(EvalError::Overflow(what))
        } else {
            Ok(self)
        }
    }

    fn aligned(&self, other: &Jet) -> (i64, Vec<f64>, Vec<f64>) {
        if self.is_zero() {
            return (other.exp2, vec![0.0; self.c.len()], other.c.clone());
        }
        if other.is_zero() {
            return (self.exp2, self.c.clone(), vec![0.0; other.c.len()]);
        }
        let e = self.exp2.max(other.exp2);
        let a = self.c.iter().map(|&v| ldexp(v, self.exp2 - e)).collect();
        let b = other.c.iter().map(|&v| ldexp(v, other.exp2 - e)).collect();
        (e, a, b)
    }

    pub fn add(&self, other: &Jet) -> Result<Jet, EvalError> {
        let (e, a, b) = self.aligned(other);
        let c = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        Jet { exp2: e, c }.normalized().checked("addition")
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet, EvalError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Jet {
        Jet {
            exp2: self.exp2,
            c: self.c.iter().map(|v| -v).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Result<Jet, EvalError> {
        Jet {
            exp2: self.exp2,
            c: self.c.iter().map(|v| v * s).collect(),
        }
        .normalized()
        .checked("scaling")
    }

    /// Multiply by `2^e` exactly.
    pub fn shift_exp2(&self, e: i64) -> Jet {
        Jet {
            exp2: self.exp2 + e,
            c: self.c.clone(),
        }
    }

    pub fn mul(&self, other: &Jet) -> Result<Jet, EvalError> {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for (i, a) in self.c.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for j in 0..n - i {
                c[i + j] += a * other.c[j];
            }
        }
        Jet {
            exp2: self.exp2 + other.exp2,
            c,
        }
        .normalized()
        .checked("multiplication")
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, EvalError> {
        let b = &other.c;
        if b[0] == 0.0 {
            return Err(EvalError::Domain("division by zero".into()));
        }
        let n = self.c.len();
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut s = self.c[k];
            for i in 1..=k {
                s -= b[i] * q[k - i];
            }
            q[k] = s / b[0];
        }
        Jet {
            exp2: self.exp2 - other.exp2,
            c: q,
        }
        .normalized()
        .checked("division")
    }

    pub fn powi(&self, k: i64) -> Result<Jet, EvalError> {
        if k < 0 {
            let p = self.powi(-k)?;
            return Jet::constant(1.0, self.order()).div(&p);
        }
        let mut result = Jet::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn exp(&self) -> Result<Jet, EvalError> {
        let a = self.unscaled("exp argument")?;
        let a0 = a[0];
        let n = a.len();
        // exp(a0 + h) = e^{a0} · exp(h), h(0) = 0
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        for k in 1..n {
            let mut s = 0.0;
            for i in 1..=k {
                s += i as f64 * a[i] * b[k - i];
            }
            b[k] = s / k as f64;
        }
        let q = (a0 / LN_2).floor();
        if q.abs() > EXP2_LIMIT as f64 {
            return Err(EvalError::Overflow("exp"));
        }
        let r = if q.abs() < 2f64.powi(31) {
            (a0 - q * LN2_HI) - q * LN2_LO
        } else {
            a0 - q * LN_2
        };
        let m = r.exp();
        for v in b.iter_mut() {
            *v *= m;
        }
        Jet {
            exp2: q as i64,
            c: b,
        }
        .normalized()
        .checked("exp")
    }

    pub fn ln(&self) -> Result<Jet, EvalError> {
        let c = &self.c;
        if c[0] <= 0.0 {
            return Err(EvalError::Domain("log of a nonpositive value".into()));
        }
        let n = c.len();
        let mut l = vec![0.0; n];
        l[0] = c[0].ln() + self.exp2 as f64 * LN_2;
        for k in 1..n {
            let mut s = c[k];
            for i in 1..k {
                s -= (i as f64 / k as f64) * l[i] * c[k - i];
            }
            l[k] = s / c[0];
        }
        Jet { exp2: 0, c: l }.normalized().checked("log")
    }

    pub fn sqrt(&self) -> Result<Jet, EvalError> {
        if self.c[0] <= 0.0 {
            return Err(EvalError::Domain("sqrt of a nonpositive value".into()));
        }
        let (mut c, mut e) = (self.c.clone(), self.exp2);
        if e.rem_euclid(2) == 1 {
            for v in c.iter_mut() {
                *v *= 2.0;
            }
            e -= 1;
        }
        let n = c.len();
        let mut s = vec![0.0; n];
        s[0] = c[0].sqrt();
        for k in 1..n {
            let mut acc = c[k];
            for i in 1..k {
                acc -= s[i] * s[k - i];
            }
            s[k] = acc / (2.0 * s[0]);
        }
        Jet { exp2: e / 2, c: s }.normalized().checked("sqrt")
    }

    /// `(sin f, cos f)`.
    pub fn sin_cos(&self) -> Result<(Jet, Jet), EvalError> {
        let a = self.unscaled("trigonometric argument")?;
        let n = a.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = a[0].sin();
        c[0] = a[0].cos();
        for k in 1..n {
            let (mut ss, mut cc) = (0.0, 0.0);
            for i in 1..=k {
                ss += i as f64 * a[i] * c[k - i];
                cc -= i as f64 * a[i] * s[k - i];
            }
            s[k] = ss / k as f64;
            c[k] = cc / k as f64;
        }
        let s = Jet { exp2: 0, c: s }.normalized().checked("sin")?;
        let c = Jet { exp2: 0, c }.normalized().checked("cos")?;
        Ok((s, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn gaussian_derivatives() {
        // f = exp(-x^2) at x = 1: f' = -2x f, f'' = (4x^2 - 2) f
        let x = Jet::var(1.0, 3);
        let f = x.mul(&x).unwrap().neg().exp().unwrap();
        let e = (-1.0f64).exp();
        assert!(close(f.value(), e, 1e-15));
        assert!(close(f.derivative(1), -2.0 * e, 1e-14));
        assert!(close(f.derivative(2), 2.0 * e, 1e-14));
        assert!(close(f.derivative(3), 4.0 * e, 1e-13)); // (12x - 8x^3) f
    }

    #[test]
    fn huge_exponent_stays_in_log_domain() {
        let x = Jet::var(1.0e4, 2);
        let f = x.mul(&x).unwrap().exp().unwrap();
        assert!(f.value().is_infinite());
        assert!(close(f.log_abs_value(), 1.0e8, 1e-15));
        // f' = 2x f
        assert!(close(f.log_abs_derivative(1), 1.0e8 + (2.0e4f64).ln(), 1e-15));
        let g = x.mul(&x).unwrap().neg().exp().unwrap();
        assert!(close(g.log_abs_value(), -1.0e8, 1e-15));
    }

    #[test]
    fn far_tail_polynomials_do_not_overflow() {
        let x = Jet::var(1.0e300, 1);
        let one = Jet::constant(1.0, 1);
        let w = one.add(&x.mul(&x).unwrap()).unwrap().powi(20).unwrap();
        assert!(close(w.log_abs_value(), 40.0 * 1.0e300f64.ln(), 1e-14));
        let l = w.ln().unwrap();
        assert!(close(l.value(), 40.0 * 1.0e300f64.ln(), 1e-14));
    }

    #[test]
    fn log_sqrt_trig_series() {
        let x = Jet::var(2.0, 2);
        let l = x.ln().unwrap();
        assert!(close(l.derivative(1), 0.5, 1e-15));
        assert!(close(l.derivative(2), -0.25, 1e-15));
        let s = x.sqrt().unwrap();
        assert!(close(s.derivative(1), 0.5 / 2f64.sqrt(), 1e-15));
        let (sn, cs) = x.sin_cos().unwrap();
        assert!(close(sn.derivative(2), -(2f64).sin(), 1e-15));
        assert!(close(cs.derivative(1), -(2f64).sin(), 1e-15));
    }

    #[test]
    fn domain_errors() {
        let x = Jet::var(-1.0, 1);
        assert!(x.ln().unwrap_err().is_domain());
        assert!(Jet::constant(1.0, 1).div(&Jet::zero(1)).unwrap_err().is_domain());
    }

    #[test]
    fn ldexp_saturates() {
        assert_eq!(ldexp(1.0, 3000), f64::INFINITY);
        assert_eq!(ldexp(3.0, -3), 0.375);
        assert_eq!(frexp_exponent(0.75), 0);
        assert_eq!(frexp_exponent(8.0), 4);
    }
}
