//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints its line even when all pass; exits non-zero if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use schwartz_core::closed_range::{decide, AssumptionSet, ClosedRangeVerdict, CrStatus};
use schwartz_core::corpus::{builtin, corpus_report, PHI1_HAT, PHI2_HAT, SIGN_EXP_ABS, SIGN_EXP_SQ};
use schwartz_core::expr::{parse, PiecewiseFn};
use schwartz_core::fdb::{compose_derivative, enumerate_partitions, fdb_terms};
use schwartz_core::multiplier::{closed_range_multiplier, verify_certificate};
use schwartz_core::norms::grid::Region;
use schwartz_core::norms::{membership_s, seminorm_pi};
use schwartz_core::symbol::analyze;
use schwartz_core::witness::{build_witness_cond_i, build_witness_cond_ii, noncompact_family, Profile};
use schwartz_core::{Config, Status};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    check(t.elapsed() < limit, || format!("took {:?}, limit {:?}", t.elapsed(), limit))
}

fn pf(s: &str) -> PiecewiseFn {
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

// ------------------------------------------------------------------ AC1

// dense coefficient vectors, constant term first
type Q = BigRational;

fn q_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn q_compose(f: &[Q], g: &[Q]) -> Vec<Q> {
    // Horner in polynomial arithmetic
    let mut acc = vec![Q::zero()];
    for c in f.iter().rev() {
        acc = q_mul(&acc, g);
        acc[0] += c;
    }
    acc
}

fn q_deriv(p: &[Q]) -> Vec<Q> {
    if p.len() <= 1 {
        return vec![Q::zero()];
    }
    p.iter().enumerate().skip(1).map(|(i, c)| c * Q::from_integer(BigInt::from(i))).collect()
}

fn q_eval(p: &[Q], x: &Q) -> Q {
    p.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
}

fn q_text(p: &[Q]) -> String {
    let terms: Vec<String> = p.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| format!("({c})*x^{i}")).collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn random_poly(rng: &mut ChaCha8Rng) -> Vec<Q> {
    let deg = rng.gen_range(0..=5);
    (0..=deg)
        .map(|_| Q::new(BigInt::from(rng.gen_range(-9i64..=9)), BigInt::from(rng.gen_range(1i64..=4))))
        .collect()
}

fn ac1() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checks = 0;
    for pair in 0..50 {
        let (f, g) = (random_poly(&mut rng), random_poly(&mut rng));
        let (fe, ge) = (pf(&q_text(&f)), pf(&q_text(&g)));
        let mut oracle = q_compose(&f, &g);
        for n in 1..=6 {
            oracle = q_deriv(&oracle);
            let got = compose_derivative(&fe, &ge, n).map_err(|e| format!("pair {pair} n={n}: {e}"))?;
            // degree ≤ 25, so 27 distinct exact points decide equality
            for k in -13i64..=13 {
                let x = Q::new(BigInt::from(k), BigInt::from(3));
                let v = got.eval_exact(&x).ok_or_else(|| format!("pair {pair} n={n}: no exact value at {x}"))?;
                check(v == q_eval(&oracle, &x), || format!("pair {pair} n={n} at {x}: {v} vs {}", q_eval(&oracle, &x)))?;
                checks += 1;
            }
        }
    }
    within(t, Duration::from_secs(10))?;
    Ok(format!("50 pairs, n ≤ 6, {checks} exact point checks in {:?}", t.elapsed()))
}

// ------------------------------------------------------------------ AC2

// partitions of n as non-increasing part lists
fn brute_partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=max.min(n)).rev() {
        for mut rest in brute_partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn multiplicities(parts: &[usize], n: usize) -> Vec<usize> {
    let mut k = vec![0; n];
    for &p in parts {
        k[p - 1] += 1;
    }
    k
}

// (f∘g)^(n) expanded by repeated product-rule differentiation.
// Key: (m, k) for f^(m)(g)·Π (g^(i))^{k_i}.
fn expanded_derivative(n: usize) -> BTreeMap<(usize, Vec<usize>), BigInt> {
    let mut terms: BTreeMap<(usize, Vec<usize>), BigInt> = BTreeMap::new();
    terms.insert((0, vec![0; n + 1]), BigInt::one());
    for _ in 0..n {
        let mut next: BTreeMap<(usize, Vec<usize>), BigInt> = BTreeMap::new();
        for ((m, k), c) in &terms {
            let mut k1 = k.clone();
            k1[0] += 1;
            *next.entry((m + 1, k1)).or_insert_with(BigInt::zero) += c;
            for i in 0..n {
                if k[i] > 0 {
                    let mut k2 = k.clone();
                    k2[i] -= 1;
                    k2[i + 1] += 1;
                    *next.entry((*m, k2)).or_insert_with(BigInt::zero) += c * BigInt::from(k[i]);
                }
            }
        }
        terms = next;
    }
    terms
        .into_iter()
        .map(|((m, mut k), c)| {
            k.truncate(n);
            ((m, k), c)
        })
        .collect()
}

fn ac2() -> Outcome {
    for n in 1..=12 {
        let brute: Vec<Vec<usize>> = brute_partitions(n, n).iter().map(|p| multiplicities(p, n)).collect();
        let mut ours: Vec<Vec<usize>> = enumerate_partitions(n).map_err(|e| e.to_string())?.iter().map(|p| p.k.clone()).collect();
        let mut b = brute.clone();
        b.sort();
        ours.sort();
        check(ours == b, || format!("n={n}: partition sets differ ({} vs {})", ours.len(), b.len()))?;
    }
    let p12 = brute_partitions(12, 12).len();
    check(p12 == 77, || format!("brute force p(12) = {p12}"))?;
    for n in 1..=8 {
        let oracle = expanded_derivative(n);
        let terms = fdb_terms(n).map_err(|e| e.to_string())?;
        check(terms.len() == oracle.len(), || format!("n={n}: {} terms vs {}", terms.len(), oracle.len()))?;
        for t in &terms {
            let key = (t.partition.k_total(), t.partition.k.clone());
            let o = oracle.get(&key);
            check(o == Some(&t.coefficient), || format!("n={n} {:?}: {} vs {o:?}", t.partition.k, t.coefficient))?;
        }
    }
    let mut c4: Vec<i64> = fdb_terms(4).unwrap().iter().map(|t| t.coefficient.to_i64().unwrap()).collect();
    c4.sort();
    check(c4 == vec![1, 1, 3, 4, 6], || format!("n=4 coefficients {c4:?}"))?;
    Ok("p(1..12) match brute force, p(12)=77; n=4 coefficients {1,6,3,4,1}; n ≤ 8 match expanded derivatives".into())
}

// ------------------------------------------------------------------ AC3

fn ac3() -> Outcome {
    let t = Instant::now();
    let cfg = Config::default();
    let est = seminorm_pi(&pf("exp(-x^2)"), 1, Region::Full, &cfg).map_err(|e| e.to_string())?;
    let n = 1_000_000;
    let (mut best, mut bx) = (0.0f64, 0.0);
    for i in 0..n {
        let x = -20.0 + 40.0 * i as f64 / (n - 1) as f64;
        let e = (-x * x).exp();
        let v = (1.0 + x * x) * e.max((2.0 * x * e).abs());
        if v > best {
            best = v;
            bx = x;
        }
    }
    within(t, Duration::from_secs(5))?;
    let exact = 4.0 / std::f64::consts::E;
    check((best - exact).abs() < 1e-5, || format!("grid oracle {best} vs 4/e"))?;
    check((est.value - best).abs() < 1e-5, || format!("estimate {} vs oracle {best}", est.value))?;
    // exp(-x²) is even: both x = ±1 attain the supremum
    check((est.witness_x.abs() - 1.0).abs() < 1e-3, || format!("witness x = {}", est.witness_x))?;
    Ok(format!(
        "value {:.9} oracle {:.9} (at {bx:.4}) witness x {:.6} in {:?}",
        est.value,
        best,
        est.witness_x,
        t.elapsed()
    ))
}

// ------------------------------------------------------------------ AC4

fn ac4() -> Outcome {
    let cfg = Config::default();
    let cases: &[(&str, &str)] = &[
        ("x", "holds"),
        ("x^2+1", "holds"),
        ("x^3", "holds"),
        ("exp(x^2)", "holds"),
        ("sin(x)", "lemma1"),
        ("exp(x)", "lemma1"),
        ("7", "lemma1"),
        ("-3/2", "lemma1"),
        ("1+log(1+x^2)", "ii"),
        ("x+sin(exp(x^2))", "i"),
    ];
    for (phi, want) in cases {
        let r = analyze(&pf(phi), cfg.max_order, &cfg).map_err(|e| e.to_string())?;
        let got = match r.is_symbol.status() {
            Status::Holds => "holds",
            Status::Fails => r.failed_condition().unwrap_or("?"),
            Status::Inconclusive => "inconclusive",
        };
        check(got == *want, || format!("{phi}: expected {want}, got {got} ({})", r.is_symbol.summary()))?;
    }
    Ok(format!("{} symbol verdicts, none inconclusive", cases.len()))
}

// ------------------------------------------------------------------ AC5

fn psi(t: f64) -> f64 {
    if 4.0 * t * t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - 4.0 * t * t)).exp()
    }
}

fn ac5() -> Outcome {
    let cfg = Config::default();

    let phi = pf("1+log(1+x^2)");
    let (series, rep) = build_witness_cond_ii(&phi, 10, &cfg).map_err(|e| e.to_string())?;
    check(rep.rows.len() == 10, || format!("(ii): {} rows", rep.rows.len()))?;
    check(series.disjoint(), || "(ii): supports overlap".into())?;
    let mut worst_ii = f64::INFINITY;
    for r in &rep.rows {
        let ax = r.x.abs();
        // φ(x) = 1 + 2 ln|x| + ln(1 + x⁻²), safe for huge |x|
        let y = 1.0 + 2.0 * ax.ln() + (1.0 / (ax * ax)).ln_1p();
        let k = series
            .centers
            .iter()
            .position(|c| (y - c).abs() < 0.5)
            .ok_or_else(|| format!("(ii): φ(x_{}) hits no bump", r.j))?;
        let ln_val = ax.ln() + series.log_weights[k] + psi(y - series.centers[k]).ln();
        worst_ii = worst_ii.min(ln_val.exp());
        check(ln_val >= 0.9f64.ln(), || format!("(ii): |x f(φ(x))| = {} at j={}", ln_val.exp(), r.j))?;
    }
    let m = membership_s(&series, 4, Region::Full, &cfg).map_err(|e| e.to_string())?;
    check(m.is_holds(), || format!("(ii): truncated series not in S: {}", m.summary()))?;

    let phi = pf("x+sin(exp(x^2))");
    let (series, rep) = build_witness_cond_i(&phi, Some(1), 8, &cfg).map_err(|e| e.to_string())?;
    check(rep.rows.len() == 8, || format!("(i): {} rows", rep.rows.len()))?;
    let Profile::Rho(bump) = &series.profile else { return Err("(i): profile is not ρ".into()) };
    let p: Vec<f64> = bump.coeffs.iter().map(|c| c.to_f64().unwrap()).collect();
    let rho = |t: f64| p.iter().rev().fold(0.0, |a, c| a * t + c) * psi(t);
    let mut worst_i = f64::INFINITY;
    for r in &rep.rows {
        let x = r.x;
        let e = (x * x).exp();
        let y = x + e.sin();
        let dphi = 1.0 + 2.0 * x * e * e.cos();
        let k = series
            .centers
            .iter()
            .position(|c| (y - c).abs() < 0.5)
            .ok_or_else(|| format!("(i): φ(x_{}) hits no bump", r.j))?;
        let t = y - series.centers[k];
        let h = 1e-5;
        let drho = (rho(t + h) - rho(t - h)) / (2.0 * h);
        let ln_val = drho.abs().ln() + series.log_weights[k] + dphi.abs().ln();
        let ratio = ln_val.exp() / r.j as f64;
        worst_i = worst_i.min(ratio);
        check(ratio >= 0.9, || format!("(i): |(f∘φ)'(x_{})| = {} < 0.9·{}", r.j, ln_val.exp(), r.j))?;
    }
    Ok(format!("(ii) min |x f(φ(x))| = {worst_ii:.4}, series in S to order 4; (i) min |(f∘φ)'(x_k)|/k = {worst_i:.3e}"))
}

// ------------------------------------------------------------------ AC6

fn ac6() -> Outcome {
    let t = Instant::now();
    let cfg = Config::default();
    let fam = noncompact_family(&pf("x^3+x"), 1.0, 2.0, 2, 1.0, 20, &cfg).map_err(|e| e.to_string())?;
    check(fam.members.len() == 20, || format!("{} members", fam.members.len()))?;
    let (c, d) = fam.image;
    let (mut lo_norm, mut hi_norm, mut worst) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    for m in &fam.members {
        let g = &m.f;
        let f = |y: f64| g.amplitude * (g.omega * (y - g.mid)).sin() * psi((y - g.mid) / g.width);
        let h = 1e-6;
        let n = 200_000;
        let (mut s0, mut s1) = (0.0f64, 0.0f64);
        for i in 0..=n {
            let y = c + (d - c) * i as f64 / n as f64;
            s0 = s0.max(f(y).abs());
            s1 = s1.max(((f(y + h) - f(y - h)) / (2.0 * h)).abs());
        }
        let norm1 = s0 + s1;
        lo_norm = lo_norm.min(norm1);
        hi_norm = hi_norm.max(norm1);
        check((0.999..=1.001).contains(&norm1), || format!("member {}: ‖f‖₁ = {norm1}", m.j))?;
        let comp = |x: f64| f(x * x * x + x);
        let h = 1e-4;
        let mut s2 = 0.0f64;
        for i in 0..=n {
            let x = 1.0 + i as f64 / n as f64;
            s2 = s2.max(((comp(x + h) - 2.0 * comp(x) + comp(x - h)) / (h * h)).abs());
        }
        worst = worst.min(s2 / m.j as f64);
        check(s2 >= m.j as f64, || format!("member {}: sup|(f∘φ)''| = {s2}", m.j))?;
    }
    within(t, Duration::from_secs(30))?;
    Ok(format!(
        "20 members, ‖f_j‖₁ ∈ [{lo_norm:.6}, {hi_norm:.6}], min sup|(f_j∘φ)''|/j = {worst:.3} in {:?}",
        t.elapsed()
    ))
}

// ------------------------------------------------------------------ AC7

fn ac7() -> Outcome {
    let cfg = Config::default();
    let mut certs = Vec::new();
    for f in ["1", "2*x", "3*x^2"] {
        let fe = pf(f);
        let r = closed_range_multiplier(&fe, Region::Full, &cfg).map_err(|e| e.to_string())?;
        check(r.verdict.is_holds(), || format!("{f}: {}", r.verdict.summary()))?;
        let p = r.params.ok_or_else(|| format!("{f}: no (N,T,c)"))?;
        check(verify_certificate(&fe, &r).map_err(|e| e.to_string())?, || format!("{f}: certificate does not re-verify"))?;
        check(!r.samples.is_empty(), || format!("{f}: empty sample set"))?;
        certs.push(format!("{f}: N={} T={} c={}", p.n, p.t, p.c));
    }
    let r = closed_range_multiplier(&pf("exp(-x^2)"), Region::Full, &cfg).map_err(|e| e.to_string())?;
    check(r.verdict.is_fails(), || format!("exp(-x^2): {}", r.verdict.summary()))?;
    Ok(format!("{}; exp(-x^2) fails", certs.join(", ")))
}

// ------------------------------------------------------------------ AC8

fn cr(phi: &str) -> Result<ClosedRangeVerdict, String> {
    decide(&pf(phi), &AssumptionSet::default(), &Config::default()).map_err(|e| e.to_string())
}

fn ac8() -> Outcome {
    let fired = |v: &ClosedRangeVerdict, r: &str| v.rule(r).is_some_and(|x| x.fired);
    let v = cr("x^2")?;
    check(v.status == CrStatus::Closed && fired(&v, "suf-om"), || format!("x^2: {:?} {:?}", v.status, v.fired))?;
    let v = cr(PHI2_HAT)?;
    check(v.status == CrStatus::Closed && fired(&v, "suf-nonsurj"), || format!("glued hump: {:?} {:?}", v.status, v.fired))?;
    let note = v.rule("suf-nonsurj").and_then(|r| r.note.clone()).unwrap_or_default();
    let lo: f64 = note.trim_start_matches("I = ").split(':').next().and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
    let x0 = 2678347.0 / 1e6;
    check((lo - 2.0 * x0).abs() < 1e-6 && note.ends_with(":inf"), || format!("glued hump interval '{note}'"))?;
    for (name, phi) in [("sign·exp|x|", SIGN_EXP_ABS), ("sign·exp(x²)", SIGN_EXP_SQ), ("glued exponential", PHI1_HAT)] {
        let v = cr(phi)?;
        check(v.status == CrStatus::NotClosed && fired(&v, "asterisco"), || format!("{name}: {:?} {:?}", v.status, v.fired))?;
    }
    Ok(format!("x² closed (suf-om), glued hump closed on [{lo}, ∞) (suf-nonsurj), three extensions not closed (asterisco)"))
}

// ------------------------------------------------------------------ AC9

fn ac9() -> Outcome {
    let cfg = Config::default();
    let (a, ra) = corpus_report(&builtin(), &cfg);
    let (b, _) = corpus_report(&builtin(), &cfg);
    let (ja, jb) = (a.to_json(), b.to_json());
    check(ja == jb, || "corpus JSON differs between runs".into())?;
    check(ra.mismatches.is_empty(), || format!("corpus mismatches: {:?}", ra.mismatches))?;
    Ok(format!("{} entries, {} bytes, identical across runs", ra.total, ja.len()))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("AC1", "composition derivative exactness", ac1),
        ("AC2", "partitions and coefficients", ac2),
        ("AC3", "seminorm against grid oracle", ac3),
        ("AC4", "symbol corpus", ac4),
        ("AC5", "witness fidelity", ac5),
        ("AC6", "non-compactness family", ac6),
        ("AC7", "multiplier certificates", ac7),
        ("AC8", "closed-range conclusions", ac8),
        ("AC9", "determinism", ac9),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let out = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match out {
            Ok(msg) => println!("PASS {id} {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {id} {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
