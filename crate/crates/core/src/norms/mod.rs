//! Weighted sup seminorms, tail decay reports, S-membership and the
//! sup norms on compact intervals.
//!
//! All weighted magnitudes are handled as logarithms:
//! `m·ln(1+x²) + ln|f^(j)(x)|`. Derivative order `j = 0` is always included.

pub mod grid;
pub mod tail;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::expr::{EvalError, SmoothFn};
use crate::verdict::Verdict;
pub use grid::Region;
pub use tail::{classify_tail, TailFit, TailStatus};

/// `ln(1+x²)` without overflow.
pub fn log_weight(x: f64) -> f64 {
    let a = x.abs();
    if a > 1e150 {
        2.0 * a.ln()
    } else {
        (a * a).ln_1p()
    }
}

/// `ln|f^(j)(x)|` for `j = 0..=order` at each point. `None` marks points
/// whose magnitudes left the representable range; domain errors abort.
pub fn log_derivatives(
    f: &dyn SmoothFn,
    xs: &[f64],
    order: usize,
) -> Result<Vec<Option<Vec<f64>>>, EvalError> {
    let rows: Vec<Result<Option<Vec<f64>>, EvalError>> = xs
        .par_iter()
        .map(|&x| match f.jet(x, order) {
            Ok(j) => Ok(Some((0..=order).map(|k| j.log_abs_derivative(k)).collect())),
            Err(EvalError::Overflow(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    rows.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_max: f64,
    pub points: usize,
    pub refine_depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeminormEstimate {
    /// Certified lower bound of the sup (may be `inf` beyond `f64`).
    pub value: f64,
    pub log_value: f64,
    pub witness_x: f64,
    pub witness_j: usize,
    pub tail_status: TailStatus,
    pub grid: GridSpec,
    pub skipped_points: usize,
}

fn weighted_max(logs: &[f64], x: f64, m: usize) -> (f64, usize) {
    let w = m as f64 * log_weight(x);
    let mut best = (f64::NEG_INFINITY, 0);
    for (j, l) in logs.iter().enumerate() {
        let v = w + l;
        if v > best.0 {
            best = (v, j);
        }
    }
    best
}

/// Tail windows of the base grid on each side of the region.
fn tail_points(xs: &[f64], logs: &[Option<Vec<f64>>], cfg: &Config, region: Region) -> (Vec<usize>, Vec<usize>) {
    let ok: Vec<bool> = logs.iter().map(|l| l.is_some()).collect();
    let left = if region.has_left_tail() { grid::tail_window(xs, &ok, false, cfg) } else { vec![] };
    let right = if region.has_right_tail() { grid::tail_window(xs, &ok, true, cfg) } else { vec![] };
    (left, right)
}

fn fit_side(
    xs: &[f64],
    logs: &[Option<Vec<f64>>],
    idx: &[usize],
    m: usize,
    j: usize,
    cfg: &Config,
) -> Option<TailFit> {
    if idx.is_empty() {
        return None;
    }
    let px: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
    let pl: Vec<f64> = idx
        .iter()
        .map(|&i| match &logs[i] {
            Some(l) => m as f64 * log_weight(xs[i]) + l[j],
            None => f64::NAN,
        })
        .collect();
    Some(classify_tail(&px, &pl, cfg))
}

/// `sup_x sup_{0≤j≤n} (1+x²)^n |f^(j)(x)|` over the region.
pub fn seminorm_pi(
    f: &dyn SmoothFn,
    n: usize,
    region: Region,
    cfg: &Config,
) -> Result<SeminormEstimate, EvalError> {
    let xs = grid::base_grid(cfg, region, &f.breakpoints());
    let logs = log_derivatives(f, &xs, n)?;
    let skipped = logs.iter().filter(|l| l.is_none()).count();
    let vals: Vec<f64> = xs
        .iter()
        .zip(&logs)
        .map(|(&x, l)| l.as_ref().map_or(f64::NAN, |l| weighted_max(l, x, n).0))
        .collect();
    let g = |x: f64| -> Option<f64> {
        if !region.contains(x) {
            return None;
        }
        let j = f.jet(x, n).ok()?;
        let l: Vec<f64> = (0..=n).map(|k| j.log_abs_derivative(k)).collect();
        Some(weighted_max(&l, x, n).0)
    };
    let best = grid::refine_max(&xs, &vals, &g, cfg.refine_top, cfg.refine_depth);
    let (wx, lv, wj) = match best {
        Some((x, _)) => {
            let j = f.jet(x, n)?;
            let l: Vec<f64> = (0..=n).map(|k| j.log_abs_derivative(k)).collect();
            let (v, wj) = weighted_max(&l, x, n);
            (x, v, wj)
        }
        None => (0.0, f64::NEG_INFINITY, 0),
    };
    let (left, right) = tail_points(&xs, &logs, cfg, region);
    let mut status = TailStatus::Decaying;
    for j in 0..=n {
        for side in [&left, &right] {
            if let Some(fit) = fit_side(&xs, &logs, side, n, j, cfg) {
                status = status.worst(fit.status);
            }
        }
    }
    Ok(SeminormEstimate {
        value: lv.exp(),
        log_value: lv,
        witness_x: wx,
        witness_j: wj,
        tail_status: status,
        grid: GridSpec { x_max: cfg.x_max, points: xs.len(), refine_depth: cfg.refine_depth },
        skipped_points: skipped,
    })
}

/// One CSV row: `(x, j, weight exponent m, value, ln value)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRow {
    pub x: f64,
    pub j: usize,
    pub m: usize,
    pub value: f64,
    pub log_value: f64,
}

pub fn seminorm_rows(
    f: &dyn SmoothFn,
    n: usize,
    region: Region,
    cfg: &Config,
) -> Result<Vec<SampleRow>, EvalError> {
    let xs = grid::base_grid(cfg, region, &f.breakpoints());
    let logs = log_derivatives(f, &xs, n)?;
    let mut rows = Vec::new();
    for (x, l) in xs.iter().zip(&logs) {
        if let Some(l) = l {
            for (j, lj) in l.iter().enumerate() {
                let lv = n as f64 * log_weight(*x) + lj;
                rows.push(SampleRow { x: *x, j, m: n, value: lv.exp(), log_value: lv });
            }
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "x,j,m,value,log_value";

pub fn rows_to_csv(rows: &[SampleRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{},{},{},{}\n", r.x, r.j, r.m, r.value, r.log_value));
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayEntry {
    pub m: usize,
    pub j: usize,
    pub status: TailStatus,
    /// Largest fitted exponent over the tails; `None` when super-polynomial
    /// or ambiguous.
    pub exponent: Option<f64>,
    pub super_polynomial: bool,
    pub left: Option<TailFit>,
    pub right: Option<TailFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub max_order: usize,
    pub entries: Vec<DecayEntry>,
    /// Largest `ln((1+x²)^m |f^(j)|)` on the whole grid over all pairs.
    pub grid_log_sup: f64,
    pub grid_sup_x: f64,
}

pub fn decay_report(
    f: &dyn SmoothFn,
    max_order: usize,
    region: Region,
    cfg: &Config,
) -> Result<DecayReport, EvalError> {
    let xs = grid::base_grid(cfg, region, &f.breakpoints());
    let logs = log_derivatives(f, &xs, max_order)?;
    let (left, right) = tail_points(&xs, &logs, cfg, region);
    let mut entries = Vec::new();
    for m in 0..=max_order {
        for j in 0..=max_order {
            let l = fit_side(&xs, &logs, &left, m, j, cfg);
            let r = fit_side(&xs, &logs, &right, m, j, cfg);
            let mut status = TailStatus::Decaying;
            let mut exponent: Option<f64> = None;
            let mut sp = false;
            let mut all_poly = true;
            for fit in [&l, &r].into_iter().flatten() {
                status = status.worst(fit.status);
                sp |= fit.super_polynomial;
                match fit.slope {
                    Some(s) => exponent = Some(exponent.map_or(s, |e: f64| e.max(s))),
                    None => all_poly = false,
                }
            }
            if !all_poly {
                exponent = None;
            }
            entries.push(DecayEntry { m, j, status, exponent, super_polynomial: sp, left: l, right: r });
        }
    }
    let mut sup = (f64::NEG_INFINITY, 0.0);
    for (x, l) in xs.iter().zip(&logs) {
        match l {
            Some(l) => {
                let v = weighted_max(l, *x, max_order).0;
                if v > sup.0 {
                    sup = (v, *x);
                }
            }
            None => sup = (f64::INFINITY, *x),
        }
    }
    Ok(DecayReport { max_order, entries, grid_log_sup: sup.0, grid_sup_x: sup.1 })
}

/// Finite-order, finite-window evidence for `f ∈ S`: every pair `(m, j)`
/// with `m, j ≤ max_order` must have non-growing tails.
pub fn membership_s(
    f: &dyn SmoothFn,
    max_order: usize,
    region: Region,
    cfg: &Config,
) -> Result<Verdict, EvalError> {
    let rep = decay_report(f, max_order, region, cfg)?;
    Ok(membership_from_report(&rep))
}

pub fn membership_from_report(rep: &DecayReport) -> Verdict {
    for e in &rep.entries {
        if e.status != TailStatus::Growing {
            continue;
        }
        let (side, fit) = match (&e.left, &e.right) {
            (Some(l), _) if l.status == TailStatus::Growing => ("left", l),
            (_, Some(r)) => ("right", r),
            (Some(l), None) => ("left", l),
            (None, None) => unreachable!(),
        };
        let mut pts = fit.points.clone();
        let mut vals = fit.log_values.clone();
        if pts.is_empty() {
            pts.push(rep.grid_sup_x);
            vals.push(rep.grid_log_sup);
        }
        return Verdict::fails_with(
            "weighted derivative grows",
            pts,
            vals,
            json!({"m": e.m, "j": e.j, "side": side, "exponent": e.exponent,
                   "super_polynomial": e.super_polynomial}),
        );
    }
    if rep.grid_log_sup == f64::INFINITY {
        return Verdict::fails("weighted derivative overflows", vec![rep.grid_sup_x], vec![f64::INFINITY]);
    }
    if let Some(e) = rep.entries.iter().find(|e| e.status == TailStatus::Ambiguous) {
        return Verdict::inconclusive(format!("ambiguous tail for pair m={}, j={}", e.m, e.j));
    }
    Verdict::holds(json!({
        "max_order": rep.max_order,
        "pairs": rep.entries.len(),
        "log_sup": rep.grid_log_sup,
        "sup_x": rep.grid_sup_x,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DNorm {
    pub value: f64,
    /// `sup |f^(k)|` for `k = 0..=n`.
    pub per_order: Vec<f64>,
    pub argmax: Vec<f64>,
    /// Largest `|f|` seen just outside `[a, b]`, when above tolerance.
    pub support_leak: Option<f64>,
}

/// `Σ_{k≤n} sup_{[a,b]} |f^(k)|`, a lower bound by grid refinement.
pub fn d_norm(f: &dyn SmoothFn, n: usize, a: f64, b: f64, cfg: &Config) -> Result<DNorm, EvalError> {
    let region = Region::Interval { a, b };
    let mut xs = grid::uniform_grid(a, b, cfg.interval_points);
    xs.extend(f.breakpoints().into_iter().filter(|x| region.contains(*x)));
    let xs = grid::finish(xs, region);
    let logs = log_derivatives(f, &xs, n)?;
    let mut per_order = Vec::with_capacity(n + 1);
    let mut argmax = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let vals: Vec<f64> = logs.iter().map(|l| l.as_ref().map_or(f64::INFINITY, |l| l[k])).collect();
        let g = |x: f64| -> Option<f64> {
            if !region.contains(x) {
                return None;
            }
            f.jet(x, k).ok().map(|j| j.log_abs_derivative(k))
        };
        match grid::refine_max(&xs, &vals, &g, cfg.refine_top, cfg.refine_depth) {
            Some((x, v)) => {
                per_order.push(v.exp());
                argmax.push(x);
            }
            None => {
                per_order.push(0.0);
                argmax.push(a);
            }
        }
    }
    let mut leak: f64 = 0.0;
    for x in grid::uniform_grid(a - 1.0, a, 65).into_iter().take(64).chain(grid::uniform_grid(b, b + 1.0, 65).into_iter().skip(1)) {
        if let Ok(v) = f.eval(x) {
            leak = leak.max(v.abs());
        }
    }
    Ok(DNorm {
        value: per_order.iter().sum(),
        per_order,
        argmax,
        support_leak: (leak > cfg.tol).then_some(leak),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn gaussian_first_seminorm() {
        let f = parse("exp(-x^2)").unwrap();
        let cfg = Config::default();
        let est = seminorm_pi(&f, 1, Region::Full, &cfg).unwrap();
        assert!((est.value - 4.0 / std::f64::consts::E).abs() < 1e-9);
        assert!((est.witness_x - 1.0).abs() < 1e-4);
        assert_eq!(est.witness_j, 1);
        assert_eq!(est.tail_status, TailStatus::Decaying);
    }

    #[test]
    fn zero_function() {
        let f = parse("0").unwrap();
        let est = seminorm_pi(&f, 3, Region::Full, &Config::default()).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn rational_decay_fails_at_second_weight() {
        let f = parse("1/(1+x^2)").unwrap();
        let cfg = Config::default();
        let est = seminorm_pi(&f, 2, Region::Full, &cfg).unwrap();
        assert_eq!(est.tail_status, TailStatus::Growing);
        let v = membership_s(&f, 2, Region::Full, &cfg).unwrap();
        let w = v.witness().unwrap();
        assert_eq!((w.detail["m"].as_u64(), w.detail["j"].as_u64()), (Some(2), Some(0)));
    }

    #[test]
    fn membership_examples() {
        let cfg = Config::default();
        assert!(membership_s(&parse("exp(-x^2)").unwrap(), 4, Region::Full, &cfg).unwrap().is_holds());
        let v = membership_s(&parse("exp(-x)").unwrap(), 1, Region::Full, &cfg).unwrap();
        assert!(v.witness().unwrap().points.iter().all(|x| *x < 0.0));
        // on a half-line the growing side is cut away
        assert!(membership_s(&parse("exp(-x)").unwrap(), 1, Region::From { a: 0.0 }, &cfg).unwrap().is_holds());
    }
}
