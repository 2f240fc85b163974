//! Printing in the input grammar. The output parses back to the same tree.

use std::fmt;

use num_traits::{One, Signed, Zero};

use super::ast::Expr;
use super::poly::{Polynomial, Rational};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self).0)
    }
}

pub fn format_polynomial(p: &Polynomial) -> String {
    render_poly(p).0
}

fn wrap(s: (String, u8), min: u8) -> String {
    if s.1 >= min {
        s.0
    } else {
        format!("({})", s.0)
    }
}

fn monomial_body(c: &Rational, k: usize) -> (String, u8) {
    let var = match k {
        0 => String::new(),
        1 => "x".to_string(),
        _ => format!("x^{k}"),
    };
    if k == 0 {
        let prec = if c.is_integer() { ATOM } else { PRODUCT };
        return (c.to_string(), prec);
    }
    if c.is_one() {
        let prec = if k == 1 { ATOM } else { POWER };
        (var, prec)
    } else {
        (format!("{c}*{var}"), PRODUCT)
    }
}

fn render_poly(p: &Polynomial) -> (String, u8) {
    if p.is_zero() {
        return ("0".into(), ATOM);
    }
    let terms: Vec<(usize, &Rational)> = p
        .coeffs()
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !c.is_zero())
        .collect();
    let mut out = String::new();
    for (i, (k, c)) in terms.iter().enumerate() {
        let (body, prec) = monomial_body(&c.abs(), *k);
        if i == 0 {
            if c.is_negative() {
                out.push('-');
                if terms.len() == 1 {
                    let prec = if prec == ATOM || prec == POWER { UNARY } else { PRODUCT };
                    return (format!("-{body}"), prec);
                }
            } else if terms.len() == 1 {
                return (body, prec);
            }
            out.push_str(&body);
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
            out.push_str(&body);
        }
    }
    (out, SUM)
}

fn render(e: &Expr) -> (String, u8) {
    match e {
        Expr::Poly(p) => render_poly(p),
        Expr::Const(c) => (c.name().to_string(), ATOM),
        Expr::Func(f, a) => (format!("{}({})", f.name(), render(a).0), ATOM),
        Expr::Add(v) => {
            let mut out = String::new();
            for (i, t) in v.iter().enumerate() {
                let s = render(t).0;
                if i == 0 {
                    out.push_str(&s);
                } else if let Some(rest) = s.strip_prefix('-') {
                    out.push_str(" - ");
                    out.push_str(rest);
                } else {
                    out.push_str(" + ");
                    out.push_str(&s);
                }
            }
            (out, SUM)
        }
        Expr::Pow(b, k) => {
            if *k > 0 {
                (format!("{}^{k}", wrap(render(b), ATOM)), POWER)
            } else {
                (format!("1/{}", render_denominator(&[(b, -k)])), PRODUCT)
            }
        }
        Expr::Mul(v) => {
            let mut num: Vec<String> = Vec::new();
            let mut den: Vec<(&Expr, i64)> = Vec::new();
            let mut sign = "";
            for (i, fct) in v.iter().enumerate() {
                match fct {
                    Expr::Pow(b, k) if *k < 0 => den.push((b, -k)),
                    Expr::Poly(p) if i == 0 => {
                        if let Some(c) = p.as_constant() {
                            if c == -Rational::one() {
                                sign = "-";
                                continue;
                            }
                            num.push(render_poly(p).0);
                        } else {
                            num.push(wrap(render_poly(p), PRODUCT));
                        }
                    }
                    other => num.push(wrap(render(other), PRODUCT)),
                }
            }
            let mut s = if num.is_empty() { "1".to_string() } else { num.join("*") };
            if !den.is_empty() {
                s = format!("{s}/{}", render_denominator(&den));
            }
            (format!("{sign}{s}"), PRODUCT)
        }
    }
}

fn render_denominator(den: &[(&Expr, i64)]) -> String {
    let parts: Vec<String> = den
        .iter()
        .map(|(b, k)| {
            if *k == 1 {
                wrap(render(b), ATOM)
            } else {
                format!("{}^{k}", wrap(render(b), ATOM))
            }
        })
        .collect();
    if parts.len() == 1 {
        parts.into_iter().next().unwrap()
    } else {
        format!("({})", parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ast::Func;

    #[test]
    fn renders_readably() {
        let x = Expr::x();
        let p = Expr::Poly(Polynomial::from_ints(&[1, -3, 1]));
        assert_eq!(p.to_string(), "x^2 - 3*x + 1");
        let g = Expr::func(Func::Exp, Expr::neg(Expr::powi(x.clone(), 2)));
        assert_eq!(g.to_string(), "exp(-x^2)");
        let r = Expr::div(Expr::one(), Expr::Poly(Polynomial::from_ints(&[1, 0, 1])));
        assert_eq!(r.to_string(), "1/(x^2 + 1)");
        let s = Expr::sub(x.clone(), Expr::func(Func::Exp, x));
        assert_eq!(s.to_string(), "x - exp(x)");
    }
}
