//! Closed range of multiplication operators `M_F f = F·f` on `S(ℝ)` and on
//! `S(I)` for closed half-lines `I`.
//!
//! `M_F` has closed range iff `F ∈ O_M` and for some `N, T, c > 0`, with
//! `I_{x,T} = [x - (1+x²)^{-T}, x + (1+x²)^{-T}]` (∩ I):
//! (a) fewer than `N` zeros of `F` (with multiplicity) lie in `I_{x,T}`;
//! (b) `(1+x²)^T |F(x)| > c Π |x - x_i|` over those zeros.

use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::expr::{EvalError, PiecewiseFn};
use crate::norms::grid::{self, Region};
use crate::norms::log_weight;
use crate::norms::tail::{classify_tail, TailStatus};
use crate::symbol::{check_om, closed_form, sample_at, sample_points, Form, Sample};
use crate::verdict::Verdict;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroCluster {
    pub location: f64,
    /// Exact rational location, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub multiplicity: usize,
    pub isolation_radius: f64,
    /// On the boundary of the region.
    pub endpoint: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroScan {
    pub zeros: Vec<ZeroCluster>,
    pub method: &'static str,
    /// All zeros in the scan window were resolved.
    pub complete: bool,
    /// Scan window; zeros beyond it are not known.
    pub window: (f64, f64),
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedRangeParams {
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "T")]
    pub t: f64,
    pub c: f64,
}

fn region_lo(region: Region) -> Option<f64> {
    match region {
        Region::From { a } | Region::Interval { a, .. } => Some(a),
        _ => None,
    }
}

fn region_hi(region: Region) -> Option<f64> {
    match region {
        Region::UpTo { b } | Region::Interval { b, .. } => Some(b),
        _ => None,
    }
}

/// `I_{x,T}`, clipped to the region.
pub fn interval_ixt(x: f64, t: f64, region: Region) -> (f64, f64) {
    let r = (-t * log_weight(x)).exp();
    let mut lo = x - r;
    let mut hi = x + r;
    if let Some(a) = region_lo(region) {
        lo = lo.max(a);
    }
    if let Some(b) = region_hi(region) {
        hi = hi.min(b);
    }
    (lo, hi)
}

fn finish_clusters(mut zs: Vec<(f64, Option<String>, usize)>, region: Region) -> Vec<ZeroCluster> {
    zs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let n = zs.len();
    (0..n)
        .map(|i| {
            let mut d = f64::INFINITY;
            if i > 0 {
                d = d.min(zs[i].0 - zs[i - 1].0);
            }
            if i + 1 < n {
                d = d.min(zs[i + 1].0 - zs[i].0);
            }
            let x = zs[i].0;
            let endpoint = region_lo(region) == Some(x) || region_hi(region) == Some(x);
            ZeroCluster {
                location: x,
                exact: zs[i].1.clone(),
                multiplicity: zs[i].2,
                isolation_radius: if d.is_finite() { d / 2.0 } else { 1.0 },
                endpoint,
            }
        })
        .collect()
}

/// Multiplicity from the Taylor coefficients at a located zero; `None` when
/// every coefficient up to `max_mult` vanishes.
fn multiplicity(s: &Sample, max_mult: usize, fact: &[f64]) -> Option<usize> {
    let tay: Vec<f64> = (0..s.logs.len()).map(|k| s.logs[k] - fact[k]).collect();
    let scale = tay[1..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if scale == f64::NEG_INFINITY {
        return None;
    }
    let tol = scale + (1e-6f64).ln();
    (1..=max_mult.min(tay.len() - 1)).find(|&k| tay[k] > tol)
}

/// Zeros of `F` in the region with multiplicities.
pub fn find_zeros(f: &PiecewiseFn, region: Region, max_mult: usize, cfg: &Config) -> Result<ZeroScan, EvalError> {
    if let Some(Form::Poly(p)) = closed_form(f) {
        if p.is_zero() {
            return Ok(ZeroScan {
                zeros: vec![],
                method: "exact",
                complete: false,
                window: (f64::NEG_INFINITY, f64::INFINITY),
                notes: vec!["identically zero".into()],
            });
        }
        let zs = p
            .real_roots()
            .into_iter()
            .filter(|r| region.contains(r.approx))
            .map(|r| (r.approx, r.exact.map(|q| q.to_string()), r.multiplicity))
            .collect();
        return Ok(ZeroScan {
            zeros: finish_clusters(zs, region),
            method: "exact",
            complete: true,
            window: (f64::NEG_INFINITY, f64::INFINITY),
            notes: vec![],
        });
    }
    let xs = grid::base_grid(cfg, region, &f.breakpoints());
    let order = max_mult + 1;
    let pts = sample_points(f, &xs, order)?;
    let fact: Vec<f64> = (0..=order).map(|k| (1..=k).map(|i| (i as f64).ln()).sum()).collect();
    let mut zs: Vec<(f64, Option<String>, usize)> = Vec::new();
    let mut notes = Vec::new();
    let mut complete = true;
    let mut candidates: Vec<f64> = Vec::new();
    let n = xs.len();
    for i in 0..n {
        let Some(p) = &pts[i] else { continue };
        if p.logs[0] == f64::NEG_INFINITY {
            candidates.push(xs[i]);
            continue;
        }
        if i + 1 < n {
            if let Some(q) = &pts[i + 1] {
                if q.logs[0] > f64::NEG_INFINITY && p.sign * q.sign < 0 {
                    // bisection on the sign
                    let (mut a, mut b) = (xs[i], xs[i + 1]);
                    for _ in 0..200 {
                        let m = 0.5 * (a + b);
                        if m <= a || m >= b {
                            break;
                        }
                        match sample_at(f, m, 0)? {
                            Some(s) if s.logs[0] == f64::NEG_INFINITY => {
                                a = m;
                                b = m;
                                break;
                            }
                            Some(s) if s.sign == p.sign => a = m,
                            _ => b = m,
                        }
                    }
                    candidates.push(if a == b { a } else { 0.5 * (a + b) });
                }
            }
        }
        // touching zeros: interior local minima of |F|
        if i > 0 && i + 1 < n {
            if let (Some(l), Some(r)) = (&pts[i - 1], &pts[i + 1]) {
                if p.logs[0] < l.logs[0] && p.logs[0] < r.logs[0] && l.sign == p.sign && r.sign == p.sign {
                    let g = |x: f64| sample_at(f, x, 0).ok().flatten().map(|s| -s.logs[0]);
                    if let Some((x, _)) = grid::golden_max(&g, xs[i - 1], xs[i + 1], 200) {
                        candidates.push(x);
                    }
                }
            }
        }
    }
    for x in candidates {
        let Some(s) = sample_at(f, x, order)? else { continue };
        let tay1 = (1..=order).map(|k| s.logs[k] - fact[k]).fold(f64::NEG_INFINITY, f64::max);
        // a zero: |F| negligible against its own Taylor coefficients
        if s.logs[0] != f64::NEG_INFINITY && s.logs[0] > tay1 + (1e-9f64).ln() {
            continue;
        }
        match multiplicity(&s, max_mult, &fact) {
            Some(m) => {
                if zs.iter().all(|z| (z.0 - x).abs() > 1e-9 * x.abs().max(1.0)) {
                    zs.push((x, None, m));
                }
            }
            None => {
                complete = false;
                notes.push(format!("zero near {x} with multiplicity above {max_mult}"));
            }
        }
    }
    let window = (
        region_lo(region).unwrap_or(-cfg.x_max),
        region_hi(region).unwrap_or(cfg.x_max),
    );
    Ok(ZeroScan { zeros: finish_clusters(zs, region), method: "scan", complete, window, notes })
}

/// Samples for conditions (a), (b): the base grid plus points closing in on
/// every zero.
pub fn sample_set(f: &PiecewiseFn, region: Region, zeros: &ZeroScan, cfg: &Config) -> Vec<f64> {
    let mut v = grid::base_grid(cfg, region, &f.breakpoints());
    for z in &zeros.zeros {
        for i in 0..48 {
            let d = 2f64.powi(-i) * z.isolation_radius.min(1.0);
            v.push(z.location - d);
            v.push(z.location + d);
        }
    }
    grid::finish(v, region)
}

/// Per-sample data for a fixed `T`.
struct Margins {
    /// zeros (with multiplicity) in `I_{x,T}`
    count: Vec<usize>,
    /// `ln((1+x²)^T|F(x)|) - Σ ln|x - x_i|`; `NaN` at zeros or where `F`
    /// is not evaluable
    margin: Vec<f64>,
    /// no zero in `I_{x,T}`
    free: Vec<bool>,
}

fn margins(xs: &[f64], logf: &[Option<f64>], zeros: &[ZeroCluster], t: f64, region: Region) -> Margins {
    let loc: Vec<f64> = zeros.iter().map(|z| z.location).collect();
    let mut count = Vec::with_capacity(xs.len());
    let mut margin = Vec::with_capacity(xs.len());
    let mut free = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        let (lo, hi) = interval_ixt(x, t, region);
        let a = loc.partition_point(|z| *z < lo);
        let b = loc.partition_point(|z| *z <= hi);
        let inside = &zeros[a..b];
        count.push(inside.iter().map(|z| z.multiplicity).sum());
        free.push(inside.is_empty());
        let m = match logf[i] {
            Some(l) if l > f64::NEG_INFINITY && inside.iter().all(|z| z.location != x) => {
                let prod: f64 = inside.iter().map(|z| z.multiplicity as f64 * (x - z.location).abs().ln()).sum();
                t * log_weight(x) + l - prod
            }
            _ => f64::NAN,
        };
        margin.push(m);
    }
    Margins { count, margin, free }
}

fn log_abs_values(f: &PiecewiseFn, xs: &[f64]) -> Result<Vec<Option<f64>>, EvalError> {
    Ok(sample_points(f, xs, 0)?.into_iter().map(|s| s.map(|s| s.logs[0])).collect())
}

/// Conditions (a) and (b) for fixed parameters on a given sample set.
pub fn check_conditions_ab(
    f: &PiecewiseFn,
    params: ClosedRangeParams,
    region: Region,
    zeros: &ZeroScan,
    samples: &[f64],
) -> Result<Verdict, EvalError> {
    if !zeros.complete {
        return Ok(Verdict::inconclusive("zero scan incomplete"));
    }
    let logf = log_abs_values(f, samples)?;
    let m = margins(samples, &logf, &zeros.zeros, params.t, region);
    let lc = params.c.ln();
    let mut bad_a = Vec::new();
    let mut bad_b = Vec::new();
    for i in 0..samples.len() {
        if m.count[i] >= params.n as usize {
            bad_a.push(i);
        }
        if !m.margin[i].is_nan() && m.margin[i] <= lc {
            bad_b.push(i);
        }
    }
    if let Some(&i) = bad_a.first() {
        let pts: Vec<f64> = bad_a.iter().take(16).map(|&i| samples[i]).collect();
        let vals: Vec<f64> = bad_a.iter().take(16).map(|&i| m.count[i] as f64).collect();
        return Ok(Verdict::fails_with(
            "condition (a): too many zeros in I_{x,T}",
            pts,
            vals,
            json!({"first": samples[i], "N": params.n, "T": params.t}),
        ));
    }
    if !bad_b.is_empty() {
        let pts: Vec<f64> = bad_b.iter().take(16).map(|&i| samples[i]).collect();
        let vals: Vec<f64> = bad_b.iter().take(16).map(|&i| m.margin[i]).collect();
        return Ok(Verdict::fails_with(
            "condition (b): (1+x^2)^T |F| <= c prod |x - x_i|",
            pts,
            vals,
            json!({"c": params.c, "T": params.t, "values": "ln((1+x^2)^T|F|/prod|x-x_i|)"}),
        ));
    }
    let min = m.margin.iter().cloned().filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min);
    Ok(Verdict::holds(json!({
        "N": params.n, "T": params.t, "c": params.c,
        "samples": samples.len(),
        "max_zero_count": m.count.iter().max().copied().unwrap_or(0),
        "min_margin": min.exp(),
    })))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplierReport {
    pub region: Region,
    /// Multiplier (growth) condition on the region.
    pub om: Verdict,
    pub zeros: Option<ZeroScan>,
    pub verdict: Verdict,
    pub params: Option<ClosedRangeParams>,
    /// The sample set the certificate was checked on.
    #[serde(skip)]
    pub samples: Vec<f64>,
}

/// Search the `(N, T, c)` lattice in order `N`, then `T` (config order),
/// then `c = 1, 1/2, …`.
pub fn closed_range_multiplier(f: &PiecewiseFn, region: Region, cfg: &Config) -> Result<MultiplierReport, EvalError> {
    let om = check_om(f, cfg.max_order, region, cfg)?;
    let done = |om: Verdict, zeros, verdict| MultiplierReport { region, om, zeros, verdict, params: None, samples: vec![] };
    match &om {
        Verdict::Fails { witness } => {
            let mut w = witness.clone();
            w.label = format!("not a multiplier: {}", w.label);
            return Ok(done(om.clone(), None, Verdict::Fails { witness: w }));
        }
        Verdict::Inconclusive { reason } => {
            let v = Verdict::inconclusive(format!("multiplier condition: {reason}"));
            return Ok(done(om.clone(), None, v));
        }
        _ => {}
    }
    let zeros = find_zeros(f, region, cfg.n_max as usize, cfg)?;
    if !zeros.complete {
        let v = Verdict::inconclusive(format!("zero scan incomplete: {}", zeros.notes.join("; ")));
        return Ok(done(om, Some(zeros), v));
    }
    let samples = sample_set(f, region, &zeros, cfg);
    let logf = log_abs_values(f, &samples)?;
    let ok: Vec<bool> = logf.iter().map(Option::is_some).collect();
    let mut lattice_t = cfg.t_lattice.clone();
    // structural obstructions at the widest weight
    let t_big = lattice_t.iter().cloned().fold(0.0, f64::max);
    let mb = margins(&samples, &logf, &zeros.zeros, t_big, region);
    for right in [false, true] {
        let has = if right { region.has_right_tail() } else { region.has_left_tail() };
        if !has {
            continue;
        }
        let idx: Vec<usize> = grid::tail_window(&samples, &ok, right, cfg).into_iter().filter(|&i| mb.free[i]).collect();
        let xs: Vec<f64> = idx.iter().map(|&i| samples[i]).collect();
        let ls: Vec<f64> = idx.iter().map(|&i| logf[i].unwrap()).collect();
        let fit = classify_tail(&xs, &ls, cfg);
        if fit.status == TailStatus::Decaying && fit.super_polynomial && !fit.points.is_empty() {
            let pts = fit.points.clone();
            let vals: Vec<f64> = pts.iter().map(|&x| {
                let i = samples.partition_point(|s| *s < x);
                mb.margin.get(i).copied().unwrap_or(f64::NAN)
            }).collect();
            let v = Verdict::fails_with(
                "condition (b) fails for every T: |F| decays faster than any power",
                pts,
                vals,
                json!({"side": if right { "right" } else { "left" }, "T": t_big,
                       "values": "ln((1+x^2)^T|F(x)|)"}),
            );
            return Ok(MultiplierReport { region, om, zeros: Some(zeros), verdict: v, params: None, samples });
        }
        let counts: Vec<usize> = grid::tail_window(&samples, &ok, right, cfg).into_iter().map(|i| mb.count[i]).collect();
        if counts.iter().any(|&c| c >= cfg.n_max as usize) && counts.last().is_some_and(|&c| c >= cfg.n_max as usize) {
            let idx = grid::tail_window(&samples, &ok, right, cfg);
            let pts: Vec<f64> = idx.iter().filter(|&&i| mb.count[i] >= cfg.n_max as usize).take(16).map(|&i| samples[i]).collect();
            let vals: Vec<f64> = idx.iter().filter(|&&i| mb.count[i] >= cfg.n_max as usize).take(16).map(|&i| mb.count[i] as f64).collect();
            let v = Verdict::fails_with(
                "condition (a) fails: zeros accumulate faster than I_{x,T} shrinks",
                pts,
                vals,
                json!({"T": t_big, "N_max": cfg.n_max}),
            );
            return Ok(MultiplierReport { region, om, zeros: Some(zeros), verdict: v, params: None, samples });
        }
    }
    lattice_t.dedup();
    let mut per_t = Vec::new();
    for &t in &lattice_t {
        let m = margins(&samples, &logf, &zeros.zeros, t, region);
        let max_count = m.count.iter().max().copied().unwrap_or(0);
        let min = m.margin.iter().cloned().filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min);
        // the margin must not be shrinking away on the tails
        let mut stable = true;
        for right in [false, true] {
            let has = if right { region.has_right_tail() } else { region.has_left_tail() };
            if !has {
                continue;
            }
            let idx: Vec<usize> = grid::tail_window(&samples, &ok, right, cfg).into_iter().filter(|&i| !m.margin[i].is_nan()).collect();
            let xs: Vec<f64> = idx.iter().map(|&i| samples[i]).collect();
            let ls: Vec<f64> = idx.iter().map(|&i| m.margin[i]).collect();
            if classify_tail(&xs, &ls, cfg).status == TailStatus::Decaying {
                stable = false;
            }
        }
        per_t.push((t, max_count, min, stable));
    }
    for n in 1..=cfg.n_max {
        for &(t, max_count, min, stable) in &per_t {
            if max_count >= n as usize || !stable {
                continue;
            }
            for e in 0..=cfg.c_min_exp {
                let c = 2f64.powi(-(e as i32));
                if c.ln() < min - 1e-12 {
                    let params = ClosedRangeParams { n, t, c };
                    let v = check_conditions_ab(f, params, region, &zeros, &samples)?;
                    debug_assert!(v.is_holds());
                    let mut v = v;
                    if let Verdict::Holds { certificate } = &mut v {
                        let ez: Vec<f64> = zeros.zeros.iter().filter(|z| z.endpoint).map(|z| z.location).collect();
                        certificate.insert("endpoint_zeros".into(), json!(ez));
                        certificate.insert("om".into(), json!(om.certificate()));
                    }
                    return Ok(MultiplierReport { region, om, zeros: Some(zeros), verdict: v, params: Some(params), samples });
                }
            }
        }
    }
    let v = Verdict::inconclusive("no (N, T, c) on the lattice certifies (a) and (b), and no structural obstruction found");
    Ok(MultiplierReport { region, om, zeros: Some(zeros), verdict: v, params: None, samples })
}

/// Re-check a certificate pointwise on its stored sample set.
pub fn verify_certificate(f: &PiecewiseFn, report: &MultiplierReport) -> Result<bool, EvalError> {
    let (Some(params), Some(zeros)) = (report.params, &report.zeros) else { return Ok(false) };
    Ok(check_conditions_ab(f, params, report.region, zeros, &report.samples)?.is_holds())
}

/// Exact zero locations as `f64` (used in reports).
pub fn zero_locations(z: &ZeroScan) -> Vec<f64> {
    z.zeros.iter().map(|c| c.location).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn run(src: &str, region: Region) -> MultiplierReport {
        closed_range_multiplier(&parse(src).unwrap(), region, &Config::default()).unwrap()
    }

    #[test]
    fn intervals() {
        assert_eq!(interval_ixt(0.0, 1.0, Region::Full), (-1.0, 1.0));
        assert_eq!(interval_ixt(1.0, 1.0, Region::Full), (0.5, 1.5));
        assert_eq!(interval_ixt(0.0, 1.0, Region::From { a: 0.0 }), (0.0, 1.0));
    }

    #[test]
    fn polynomial_zeros() {
        let z = find_zeros(&parse("x^2*(x-1)").unwrap(), Region::Full, 8, &Config::default()).unwrap();
        let got: Vec<(f64, usize)> = z.zeros.iter().map(|c| (c.location, c.multiplicity)).collect();
        assert_eq!(got, vec![(0.0, 2), (1.0, 1)]);
        assert!(find_zeros(&parse("exp(-x^2)").unwrap(), Region::Full, 8, &Config::default()).unwrap().zeros.is_empty());
    }

    #[test]
    fn scanned_zeros() {
        let z = find_zeros(&parse("sin(x)*exp(-x^2/100)").unwrap(), Region::Interval { a: -4.0, b: 4.0 }, 8, &Config::default()).unwrap();
        let locs = zero_locations(&z);
        assert_eq!(locs.len(), 3, "{locs:?}");
        assert!((locs[0] + std::f64::consts::PI).abs() < 1e-9);
        let z = find_zeros(&parse("(1-cos(x))*exp(-x^2/100)").unwrap(), Region::Interval { a: -1.0, b: 1.0 }, 8, &Config::default()).unwrap();
        assert_eq!(z.zeros.len(), 1);
        assert_eq!(z.zeros[0].multiplicity, 2);
    }

    #[test]
    fn lattice_certificates() {
        let cfg = Config::default();
        for (src, want) in [("1", (1, 1.0, 0.5)), ("2*x", (2, 1.0, 1.0)), ("3*x^2", (3, 1.0, 1.0))] {
            let r = run(src, Region::Full);
            let p = r.params.unwrap_or_else(|| panic!("{src}: {:?}", r.verdict));
            assert_eq!((p.n, p.t, p.c), want, "{src}");
            assert!(verify_certificate(&parse(src).unwrap(), &r).unwrap());
        }
        let g = run("exp(-x^2)", Region::Full);
        assert!(g.verdict.is_fails());
        let _ = cfg;
    }

    #[test]
    fn half_line_exponential() {
        let f = parse("-exp(-x)").unwrap();
        let region = Region::UpTo { b: 0.0 };
        let cfg = Config::default();
        let z = find_zeros(&f, region, 8, &cfg).unwrap();
        let s = sample_set(&f, region, &z, &cfg);
        let ab = check_conditions_ab(&f, ClosedRangeParams { n: 1, t: 1.0, c: 0.5 }, region, &z, &s).unwrap();
        assert!(ab.is_holds());
        // but e^{-x} is not a multiplier on (-∞, 0]
        assert!(run("-exp(-x)", region).verdict.is_fails());
    }

    #[test]
    fn monotone_in_c() {
        let f = parse("x^3 - x").unwrap();
        let cfg = Config::default();
        let z = find_zeros(&f, Region::Full, 8, &cfg).unwrap();
        let s = sample_set(&f, Region::Full, &z, &cfg);
        let holds: Vec<bool> = (0..12)
            .map(|e| {
                let c = 2f64.powi(-e);
                check_conditions_ab(&f, ClosedRangeParams { n: 4, t: 1.0, c }, Region::Full, &z, &s).unwrap().is_holds()
            })
            .collect();
        // c decreases along the vector: once it holds it keeps holding
        let first = holds.iter().position(|h| *h).expect("some c works");
        assert!(holds[first..].iter().all(|h| *h));
    }
}
