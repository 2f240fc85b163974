use proptest::prelude::*;

use schwartz_core::expr::{parse, parse_expr, Expr, PiecewiseFn};
use schwartz_core::fdb::compose_derivative;
use schwartz_core::multiplier::{check_conditions_ab, closed_range_multiplier, ClosedRangeParams};
use schwartz_core::norms::grid::Region;
use schwartz_core::norms::{d_norm, seminorm_pi};
use schwartz_core::Config;

// smooth everywhere: no log, sqrt or division
fn smooth_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![Just("x".to_string()), (-5i32..=5).prop_map(|k| format!("({k})"))];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), 0u32..=3).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.prop_map(|a| format!("exp(({a})/4)")),
        ]
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(src in smooth_text()) {
        let e = parse_expr(&src).unwrap();
        let printed = e.to_string();
        let back = parse_expr(&printed).unwrap();
        prop_assert_eq!(back.to_string(), printed.clone());
        for x in [-1.3, 0.0, 0.7, 2.1] {
            match (e.eval(x), back.eval(x)) {
                (Ok(a), Ok(b)) => prop_assert!(close(a, b, 1e-12), "{} vs {} at {}", a, b, x),
                (a, b) => prop_assert_eq!(a.is_ok(), b.is_ok()),
            }
        }
    }

    #[test]
    fn composition_rule_matches_chain_rule(f in smooth_text(), g in smooth_text(), n in 1usize..=4, x in -1.5f64..1.5) {
        let (fe, ge) = (parse_expr(&f).unwrap(), parse_expr(&g).unwrap());
        let viafdb = compose_derivative(&PiecewiseFn::single(fe.clone()), &PiecewiseFn::single(ge.clone()), n).unwrap();
        let direct: Expr = fe.compose(&ge).nth_derivative(n);
        if let (Ok(a), Ok(b)) = (viafdb.eval(x), direct.eval(x)) {
            prop_assume!(a.is_finite() && b.is_finite() && a.abs() < 1e12);
            prop_assert!(close(a, b, 1e-7), "{} vs {}", a, b);
        }
    }

    #[test]
    fn piecewise_round_trip(a in -3i32..=3, b in 1i32..=4) {
        let src = format!("piecewise((-inf,0]: {a}*x; [1,inf): x^2 + {b}; blend: 4)");
        let p = parse(&src).unwrap();
        let again = parse(&p.to_string()).unwrap();
        prop_assert_eq!(again.to_string(), p.to_string());
        for x in [-2.0, 0.25, 0.5, 0.9, 3.0] {
            prop_assert!(close(p.eval(x).unwrap(), again.eval(x).unwrap(), 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn seminorm_monotone_in_order(a in 1i32..=4, c in -3i32..=3, n in 0usize..=3) {
        let f = parse(&format!("(x^2 + ({c})*x + 1)*exp(-x^2*{a}/2)")).unwrap();
        let cfg = Config::default();
        let lo = seminorm_pi(&f, n, Region::Full, &cfg).unwrap().value;
        let hi = seminorm_pi(&f, n + 1, Region::Full, &cfg).unwrap().value;
        prop_assert!(lo <= hi * (1.0 + 1e-9), "{} > {}", lo, hi);
    }

    #[test]
    fn d_norm_monotone_in_order(w in 1i32..=6, n in 0usize..=3) {
        let f = parse(&format!("sin({w}*x)*exp(-x^2)")).unwrap();
        let cfg = Config::default();
        let lo = d_norm(&f, n, -1.0, 2.0, &cfg).unwrap().value;
        let hi = d_norm(&f, n + 1, -1.0, 2.0, &cfg).unwrap().value;
        prop_assert!(lo <= hi * (1.0 + 1e-9), "{} > {}", lo, hi);
    }

    #[test]
    fn certificate_survives_smaller_c(k in 0u32..=3, a in 1i32..=5, b in -4i32..=4) {
        let f = parse(&format!("{a}*x^{k} + ({b})*x^{}", k.saturating_sub(1))).unwrap();
        let cfg = Config::default();
        let r = closed_range_multiplier(&f, Region::Full, &cfg).unwrap();
        if let (Some(p), Some(z)) = (r.params, &r.zeros) {
            prop_assert!(r.verdict.is_holds());
            let smaller = ClosedRangeParams { c: p.c / 2.0, ..p };
            prop_assert!(check_conditions_ab(&f, smaller, r.region, z, &r.samples).unwrap().is_holds());
        }
    }

    #[test]
    fn verdict_invariant_under_scaling(src in prop_oneof![
        Just("1"), Just("x"), Just("x^2 - 1"), Just("exp(-x^2)"), Just("x*exp(-x^2)"), Just("sin(x) + 2")
    ], s in prop_oneof![Just("2"), Just("-3"), Just("1/5")]) {
        let cfg = Config::default();
        let f = parse(src).unwrap();
        let g = parse(&format!("({s})*({src})")).unwrap();
        let a = closed_range_multiplier(&f, Region::Full, &cfg).unwrap().verdict.status();
        let b = closed_range_multiplier(&g, Region::Full, &cfg).unwrap().verdict.status();
        prop_assert_eq!(a, b, "{} scaled by {}", src, s);
    }
}
