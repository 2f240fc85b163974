//! Recursive-descent parser for expressions and piecewise functions.
//!
//! Unary minus binds looser than `^` and tighter than `*`, so `-x^2` is
//! `-(x^2)` and `-2*x` is `(-2)*x`. Exponents are integer literals,
//! optionally negative. Decimal literals are exact.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::ast::{Constant, Expr, Func};
use super::piecewise::{Bound, PieceSpec, PiecewiseError, PiecewiseFn};
use super::poly::Rational;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error(transparent)]
    Piecewise(#[from] PiecewiseError),
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. } => Some(*offset),
            _ => None,
        }
    }
}

pub fn parse(text: &str) -> Result<PiecewiseFn, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    let f = if p.peek_word("piecewise") {
        p.piecewise()?
    } else {
        PiecewiseFn::single(p.expr()?)
    };
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

/// Parse an interval bound: a rational, `-inf` or `inf`.
pub fn parse_bound(text: &str) -> Result<Bound, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let b = p.bound()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(b)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn peek_word(&mut self, w: &str) -> bool {
        self.skip_ws();
        let end = self.pos + w.len();
        end <= self.src.len()
            && &self.src[self.pos..end] == w.as_bytes()
            && !self.src.get(end).is_some_and(|c| c.is_ascii_alphanumeric())
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(Expr::neg(self.term()?));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::sum(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = Expr::mul(acc, self.unary()?);
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let d = self.unary()?;
                if d.is_zero() {
                    return Err(ParseError::Syntax { offset: at, message: "division by zero".into() });
                }
                acc = Expr::div(acc, d);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::neg(self.unary()?));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let k = if self.eat(b'(') {
            let k = self.integer()?;
            self.expect(b')')?;
            k
        } else {
            self.integer()?
        };
        if k < 0 && base.is_zero() {
            return Err(self.error("division by zero"));
        }
        Ok(Expr::powi(base, k))
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            self.pos = start;
            return Err(self.error("expected integer exponent"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: i64 = s.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: "exponent out of range".into(),
        })?;
        Ok(if neg { -v } else { v })
    }

    fn number(&mut self) -> Result<Rational, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut digits = String::new();
        let mut frac = 0u32;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c as char);
                if seen_dot {
                    frac += 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            self.pos = start;
            return Err(self.error("expected number"));
        }
        let n: BigInt = digits.parse().unwrap();
        Ok(Rational::new(n, BigInt::from(10).pow(frac)))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::rational(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "x" => Ok(Expr::x()),
                    "e" => Ok(Expr::constant(Constant::E)),
                    "pi" => Ok(Expr::constant(Constant::Pi)),
                    _ => match Func::from_name(&name) {
                        Some(f) => {
                            self.expect(b'(')?;
                            let a = self.expr()?;
                            self.expect(b')')?;
                            Ok(Expr::func(f, a))
                        }
                        None => Err(ParseError::Syntax {
                            offset: start,
                            message: format!("unknown identifier '{name}'"),
                        }),
                    },
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn bound(&mut self) -> Result<Bound, ParseError> {
        let neg = self.eat(b'-');
        if self.peek_word("inf") {
            self.pos += 3;
            return Ok(if neg { Bound::NegInf } else { Bound::PosInf });
        }
        let mut q = self.number()?;
        if self.eat(b'/') {
            let d = self.number()?;
            if d.is_zero() {
                return Err(self.error("zero denominator"));
            }
            q /= d;
        }
        Ok(Bound::Finite(if neg { -q } else { q }))
    }

    fn piecewise(&mut self) -> Result<PiecewiseFn, ParseError> {
        self.pos += "piecewise".len();
        self.expect(b'(')?;
        let mut pieces = Vec::new();
        let mut blend = None;
        loop {
            if self.peek_word("blend") {
                self.pos += "blend".len();
                self.expect(b':')?;
                let j = self.integer()?;
                if !(0..=64).contains(&j) {
                    return Err(self.error("blend order out of range"));
                }
                blend = Some(j as usize);
                break;
            }
            let at = self.pos;
            let lo_closed = match self.peek() {
                Some(b'[') => true,
                Some(b'(') => false,
                _ => return Err(self.error("expected interval")),
            };
            self.pos += 1;
            let lo = self.bound()?;
            self.expect(b',')?;
            let hi = self.bound()?;
            let hi_closed = match self.peek() {
                Some(b']') => true,
                Some(b')') => false,
                _ => return Err(self.error("expected ']' or ')'")),
            };
            self.pos += 1;
            self.expect(b':')?;
            let body = self.expr()?;
            pieces.push(PieceSpec { lo, lo_closed, hi, hi_closed, body, offset: at });
            if !self.eat(b';') {
                break;
            }
        }
        self.expect(b')')?;
        if pieces.is_empty() {
            return Err(self.error("piecewise needs at least one piece"));
        }
        Ok(PiecewiseFn::from_specs(pieces, blend)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::poly::Polynomial;

    #[test]
    fn precedence() {
        assert_eq!(parse_expr("-x^2").unwrap(), Expr::Poly(Polynomial::from_ints(&[0, 0, -1])));
        assert_eq!(parse_expr("-2*x").unwrap(), Expr::Poly(Polynomial::from_ints(&[0, -2])));
        assert_eq!(parse_expr("2^-1").unwrap().as_rational().unwrap(), Rational::new(1.into(), 2.into()));
        assert_eq!(
            parse_expr("1.25 - 2/5").unwrap().as_rational().unwrap(),
            Rational::new(17.into(), 20.into())
        );
    }

    #[test]
    fn syntax_errors_report_offsets() {
        let e = parse("x^^2").unwrap_err();
        assert_eq!(e.offset(), Some(2));
        assert_eq!(parse("foo(x)").unwrap_err().offset(), Some(0));
        assert!(parse("x + ").is_err());
        assert!(parse("x/0").is_err());
    }

    #[test]
    fn round_trip() {
        for s in [
            "x^2 + 1",
            "exp(-x^2)",
            "1/(x^2 + 1)",
            "x + sin(exp(x^2))",
            "1 + log(x^2 + 1)",
            "-exp(-x) + 2",
            "sqrt(x^2 + 1)*cos(pi*x)/(x^4 + 2)^3",
            "e^2*x - 2/5*x^3",
        ] {
            let e = parse_expr(s).unwrap();
            let again = parse_expr(&e.to_string()).unwrap();
            assert_eq!(e, again, "{s} -> {e}");
        }
    }
}
