//! Faà di Bruno and Leibniz rules.
//!
//! `(f∘φ)^(n) = Σ n!/(k_1!…k_n!) f^(K)(φ) Π (φ^(i)/i!)^{k_i}` over all
//! `k` with `Σ i·k_i = n`, `K = Σ k_i`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Expr, PiecewiseFn, Rational};

pub const DEFAULT_MAX_ORDER: usize = 20;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FdbError {
    #[error("order {n} outside 1..={max}")]
    OrderOutOfRange { n: usize, max: usize },
    #[error("outer function must be a single expression")]
    PiecewiseOuter,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    pub n: usize,
    /// `k[i-1]` is the multiplicity of part `i`.
    pub k: Vec<usize>,
}

impl Partition {
    pub fn k_total(&self) -> usize {
        self.k.iter().sum()
    }

    pub fn is_valid(&self) -> bool {
        self.k.len() == self.n && self.k.iter().enumerate().map(|(i, k)| (i + 1) * k).sum::<usize>() == self.n
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdbTerm {
    pub partition: Partition,
    #[serde(serialize_with = "ser_bigint")]
    pub coefficient: BigInt,
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

type Table = RwLock<HashMap<usize, Arc<Vec<Partition>>>>;

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| RwLock::new(HashMap::new()))
}

/// All partitions of `n` in reverse-lexicographic order of `k`.
pub fn enumerate_partitions(n: usize) -> Result<Arc<Vec<Partition>>, FdbError> {
    enumerate_partitions_max(n, DEFAULT_MAX_ORDER)
}

pub fn enumerate_partitions_max(n: usize, max: usize) -> Result<Arc<Vec<Partition>>, FdbError> {
    if n == 0 || n > max {
        return Err(FdbError::OrderOutOfRange { n, max });
    }
    if let Some(v) = table().read().unwrap().get(&n) {
        return Ok(v.clone());
    }
    let mut out = Vec::new();
    let mut k = vec![0usize; n];
    fill(n, 1, &mut k, &mut out);
    out.sort_by(|a: &Partition, b| b.k.cmp(&a.k));
    let out = Arc::new(out);
    table().write().unwrap().insert(n, out.clone());
    Ok(out)
}

// assign multiplicities to parts i, i+1, …, n with `rest` still to cover
fn fill(rest: usize, i: usize, k: &mut Vec<usize>, out: &mut Vec<Partition>) {
    let n = k.len();
    if rest == 0 {
        out.push(Partition { n, k: k.clone() });
        return;
    }
    if i > n {
        return;
    }
    for m in (0..=rest / i).rev() {
        k[i - 1] = m;
        fill(rest - m * i, i + 1, k, out);
    }
    k[i - 1] = 0;
}

fn factorial(n: usize) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * i)
}

pub fn fdb_coefficient(p: &Partition) -> BigInt {
    let mut den = BigInt::one();
    for (idx, &k) in p.k.iter().enumerate() {
        den *= factorial(k);
        den *= factorial(idx + 1).pow(k as u32);
    }
    factorial(p.n) / den
}

pub fn fdb_terms(n: usize) -> Result<Vec<FdbTerm>, FdbError> {
    Ok(enumerate_partitions(n)?
        .iter()
        .map(|p| FdbTerm { partition: p.clone(), coefficient: fdb_coefficient(p) })
        .collect())
}

fn fdb_expr(f: &Expr, g: &Expr, n: usize) -> Result<Expr, FdbError> {
    if n == 0 {
        return Ok(f.compose(g));
    }
    let dg: Vec<Expr> = {
        let mut v = Vec::with_capacity(n);
        let mut d = g.clone();
        for _ in 0..n {
            d = d.differentiate();
            v.push(d.clone());
        }
        v
    };
    let mut df = vec![f.clone()];
    for _ in 0..n {
        let next = df.last().unwrap().differentiate();
        df.push(next);
    }
    let mut terms = Vec::new();
    for t in fdb_terms(n)? {
        let mut factors = vec![
            Expr::rational(Rational::from_integer(t.coefficient.clone())),
            df[t.partition.k_total()].compose(g),
        ];
        for (i, &k) in t.partition.k.iter().enumerate() {
            if k > 0 {
                factors.push(Expr::powi(dg[i].clone(), k as i64));
            }
        }
        terms.push(Expr::product(factors));
    }
    Ok(Expr::sum(terms))
}

/// Symbolic `(f∘φ)^(n)` assembled from the Faà di Bruno terms, piece by
/// piece of `φ`.
pub fn compose_derivative(f: &PiecewiseFn, phi: &PiecewiseFn, n: usize) -> Result<PiecewiseFn, FdbError> {
    let fe = f.as_single().ok_or(FdbError::PiecewiseOuter)?;
    if n > 0 {
        enumerate_partitions(n)?;
    }
    Ok(phi.map_pieces(|g| fdb_expr(fe, g, n).expect("order checked")))
}

fn binomial(n: usize, k: usize) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Symbolic `(f·g)^(n) = Σ C(n,m) f^(m) g^(n-m)`.
pub fn leibniz_derivative(f: &PiecewiseFn, g: &PiecewiseFn, n: usize) -> PiecewiseFn {
    f.combine(g, |a, b| leibniz_expr(a, b, n))
}

fn leibniz_expr(a: &Expr, b: &Expr, n: usize) -> Expr {
    let mut da = vec![a.clone()];
    let mut db = vec![b.clone()];
    for _ in 0..n {
        da.push(da.last().unwrap().differentiate());
        db.push(db.last().unwrap().differentiate());
    }
    Expr::sum(
        (0..=n)
            .map(|m| {
                Expr::product(vec![
                    Expr::rational(Rational::from_integer(binomial(n, m))),
                    da[m].clone(),
                    db[n - m].clone(),
                ])
            })
            .collect(),
    )
}

/// Pointwise `(f∘φ)^(n)(x)` from `outer[k] = f^(k)(φ(x))` and
/// `inner[i] = φ^(i)(x)` (index 0 unused).
pub fn fold_terms(outer: &[f64], inner: &[f64], n: usize) -> Result<f64, FdbError> {
    if n == 0 {
        return Ok(outer[0]);
    }
    let mut s = 0.0;
    for p in enumerate_partitions(n)?.iter() {
        s += term_value(p, inner) * outer[p.k_total()];
    }
    Ok(s)
}

fn term_value(p: &Partition, inner: &[f64]) -> f64 {
    let mut v = fdb_coefficient(p).to_f64().unwrap_or(f64::INFINITY);
    for (i, &k) in p.k.iter().enumerate() {
        if k > 0 {
            v *= inner[i + 1].powi(k as i32);
        }
    }
    v
}

/// The cofactor of `f^(m)(φ)` in `(f∘φ)^(n)`: the partial Bell polynomial
/// `B_{n,m}(φ', …, φ^(n-m+1))`.
pub fn bell_cofactor(n: usize, m: usize, inner: &[f64]) -> Result<f64, FdbError> {
    Ok(enumerate_partitions(n)?
        .iter()
        .filter(|p| p.k_total() == m)
        .map(|p| term_value(p, inner))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, SmoothFn};

    // independent oracle: count all k with Σ i k_i = n by nested search
    fn brute_force(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut k = vec![0usize; n];
        loop {
            if k.iter().enumerate().map(|(i, v)| (i + 1) * v).sum::<usize>() == n {
                out.push(k.clone());
            }
            let mut i = 0;
            loop {
                if i == n {
                    return out;
                }
                k[i] += 1;
                if k[i] * (i + 1) <= n {
                    break;
                }
                k[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn small_cases() {
        let p1 = enumerate_partitions(1).unwrap();
        assert_eq!(p1[0].k, vec![1]);
        let p3: Vec<Vec<usize>> = enumerate_partitions(3).unwrap().iter().map(|p| p.k.clone()).collect();
        assert_eq!(p3, vec![vec![3, 0, 0], vec![1, 1, 0], vec![0, 0, 1]]);
        let mut oracle = brute_force(3);
        oracle.sort();
        oracle.reverse();
        assert_eq!(p3, oracle);
        assert!(enumerate_partitions(0).is_err());
        assert!(enumerate_partitions(21).is_err());
    }

    #[test]
    fn coefficients_are_positive_integers() {
        for n in 1..=10 {
            for p in enumerate_partitions(n).unwrap().iter() {
                assert!(p.is_valid());
                let c = fdb_coefficient(p);
                assert!(c > BigInt::from(0));
                // exact divisibility: multiply back
                let mut den = BigInt::one();
                for (i, &k) in p.k.iter().enumerate() {
                    den *= factorial(k) * factorial(i + 1).pow(k as u32);
                }
                assert_eq!(c * den, factorial(n));
            }
        }
    }

    #[test]
    fn pointwise_fold_matches_jets() {
        let f = parse("sin(x)").unwrap();
        let phi = parse("x^3 + exp(x)").unwrap();
        let x = 0.7;
        let n = 6;
        let inner = phi.jet(x, n).unwrap();
        let outer = f.jet(inner.value(), n).unwrap();
        let iv: Vec<f64> = (0..=n).map(|k| inner.derivative(k)).collect();
        let ov: Vec<f64> = (0..=n).map(|k| outer.derivative(k)).collect();
        let direct = f.eval_jet(&phi.jet(x, n).unwrap()).unwrap().derivative(n);
        let folded = fold_terms(&ov, &iv, n).unwrap();
        assert!((direct - folded).abs() < 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn composite_square_example() {
        // f = x^2, φ = x^2 + 1: (f∘φ)'''' = 24
        let f = parse("x^2").unwrap();
        let phi = parse("x^2 + 1").unwrap();
        let d = compose_derivative(&f, &phi, 4).unwrap();
        assert_eq!(d.as_polynomial().unwrap(), &crate::expr::Polynomial::from_ints(&[24]));
    }
}
