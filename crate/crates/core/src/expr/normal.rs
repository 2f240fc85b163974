//! Expanded normal form: products distributed over sums and positive powers
//! of sums multiplied out, recursively inside function arguments. Two
//! expressions that agree after `normalize` are equal as functions.

use super::ast::Expr;

pub fn normalize(e: &Expr) -> Expr {
    match e {
        Expr::Poly(_) | Expr::Const(_) => e.clone(),
        Expr::Add(v) => Expr::sum(v.iter().map(normalize).collect()),
        Expr::Mul(v) => {
            let mut acc = vec![Expr::one()];
            for f in v {
                acc = distribute(&acc, &normalize(f));
            }
            Expr::sum(acc)
        }
        Expr::Pow(b, k) => {
            let b = normalize(b);
            if *k > 0 {
                if let Expr::Add(_) = b {
                    let mut acc = vec![Expr::one()];
                    for _ in 0..*k {
                        acc = distribute(&acc, &b);
                    }
                    return Expr::sum(acc);
                }
            }
            Expr::powi(b, *k)
        }
        Expr::Func(f, a) => Expr::func(*f, normalize(a)),
    }
}

fn distribute(acc: &[Expr], f: &Expr) -> Vec<Expr> {
    let terms: Vec<Expr> = match f {
        Expr::Add(v) => v.clone(),
        other => vec![other.clone()],
    };
    let mut out = Vec::with_capacity(acc.len() * terms.len());
    for a in acc {
        for t in &terms {
            match Expr::mul(a.clone(), t.clone()) {
                Expr::Add(v) => out.extend(v),
                p => out.push(p),
            }
        }
    }
    out
}

/// Equality up to expansion.
pub fn equivalent(a: &Expr, b: &Expr) -> bool {
    normalize(&Expr::sub(a.clone(), b.clone())).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ast::Func;

    #[test]
    fn expands_products_of_sums() {
        let x = Expr::x();
        let s = Expr::add(Expr::func(Func::Sin, x.clone()), Expr::one());
        let lhs = Expr::powi(s.clone(), 2);
        let sin = Expr::func(Func::Sin, x);
        let rhs = Expr::sum(vec![
            Expr::powi(sin.clone(), 2),
            Expr::scale(crate::expr::poly::rat(2), sin),
            Expr::one(),
        ]);
        assert!(equivalent(&lhs, &rhs));
        assert!(!equivalent(&lhs, &s));
    }
}
