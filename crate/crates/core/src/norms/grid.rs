//! Sampling grids and sup refinement.

use serde::Serialize;

use crate::config::Config;

/// Where a sup is taken.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Full,
    /// `[a, ∞)`
    From { a: f64 },
    /// `(-∞, b]`
    UpTo { b: f64 },
    /// `[a, b]`
    Interval { a: f64, b: f64 },
}

impl Region {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Region::Full => true,
            Region::From { a } => x >= a,
            Region::UpTo { b } => x <= b,
            Region::Interval { a, b } => a <= x && x <= b,
        }
    }

    pub fn has_left_tail(&self) -> bool {
        matches!(self, Region::Full | Region::UpTo { .. })
    }

    pub fn has_right_tail(&self) -> bool {
        matches!(self, Region::Full | Region::From { .. })
    }

    /// Parse `full`, `a:inf`, `-inf:b` or `a:b`.
    pub fn parse(s: &str) -> Result<Region, String> {
        let s = s.trim();
        if s == "full" {
            return Ok(Region::Full);
        }
        let (l, r) = s.split_once(':').ok_or_else(|| format!("bad region '{s}'"))?;
        let bound = |t: &str| -> Result<Option<f64>, String> {
            match t.trim() {
                "inf" | "-inf" => Ok(None),
                v => crate::expr::parse::parse_expr(v)
                    .ok()
                    .and_then(|e| crate::expr::ast::constant_value(&e))
                    .map(Some)
                    .ok_or_else(|| format!("bad bound '{v}'")),
            }
        };
        match (bound(l)?, bound(r)?) {
            (None, None) => Ok(Region::Full),
            (Some(a), None) => Ok(Region::From { a }),
            (None, Some(b)) => Ok(Region::UpTo { b }),
            (Some(a), Some(b)) if a < b => Ok(Region::Interval { a, b }),
            _ => Err(format!("empty region '{s}'")),
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::Full => write!(f, "full"),
            Region::From { a } => write!(f, "{a}:inf"),
            Region::UpTo { b } => write!(f, "-inf:{b}"),
            Region::Interval { a, b } => write!(f, "{a}:{b}"),
        }
    }
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Base grid: log-spaced on both signs, zero, and points at and around
/// breakpoints, restricted to the region.
pub fn base_grid(cfg: &Config, region: Region, breakpoints: &[f64]) -> Vec<f64> {
    let pos = log_grid(cfg.x_min, cfg.x_max, cfg.base_points);
    let mut v: Vec<f64> = Vec::with_capacity(2 * pos.len() + 8);
    v.extend(pos.iter().map(|x| -x));
    v.push(0.0);
    v.extend(pos.iter().copied());
    for &b in breakpoints {
        let d = 1e-7 * b.abs().max(1.0);
        v.extend([b - d, b, b + d]);
    }
    match region {
        Region::From { a } => v.push(a),
        Region::UpTo { b } => v.push(b),
        Region::Interval { a, b } => {
            v.extend(uniform_grid(a, b, cfg.interval_points));
        }
        Region::Full => {}
    }
    finish(v, region)
}

pub fn finish(mut v: Vec<f64>, region: Region) -> Vec<f64> {
    v.retain(|x| x.is_finite() && region.contains(*x));
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// Golden-section iterations giving a bracket reduction of `2^-depth`.
pub fn golden_iterations(depth: usize) -> usize {
    (depth as f64 * std::f64::consts::LN_2 / 0.481_211_825_059_603_4).ceil() as usize
}

/// `(x, v)` beats `best`: larger by more than a relative `1e-12`, or tied
/// and closer to zero (positive side first on exact mirror ties).
fn better(x: f64, v: f64, best: Option<(f64, f64)>) -> bool {
    let Some((bx, b)) = best else { return true };
    let tol = 1e-12 * b.abs().max(1.0);
    if v > b + tol {
        return true;
    }
    if v < b - tol {
        return false;
    }
    (x.abs(), x < 0.0) < (bx.abs(), bx < 0.0)
}

/// Maximize `g` (which may return `None` where undefined) given its values
/// `vals` on the sorted grid `xs`. Local maxima are refined by golden
/// section; the result never falls more than the tie tolerance below the
/// grid maximum.
pub fn refine_max(
    xs: &[f64],
    vals: &[f64],
    g: &(dyn Fn(f64) -> Option<f64> + Sync),
    top: usize,
    depth: usize,
) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for (x, v) in xs.iter().zip(vals) {
        if v.is_nan() || *v == f64::NEG_INFINITY {
            continue;
        }
        if better(*x, *v, best) {
            best = Some((*x, *v));
        }
    }
    let mut peaks: Vec<usize> = (0..xs.len())
        .filter(|&i| {
            let v = vals[i];
            v.is_finite()
                && (i == 0 || !(vals[i - 1] > v))
                && (i + 1 == xs.len() || !(vals[i + 1] > v))
        })
        .collect();
    peaks.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap().then(a.cmp(&b)));
    peaks.truncate(top);
    peaks.sort();
    let iters = golden_iterations(depth);
    for i in peaks {
        let lo = if i == 0 { xs[0] } else { xs[i - 1] };
        let hi = if i + 1 == xs.len() { xs[i] } else { xs[i + 1] };
        if let Some((x, v)) = golden_max(g, lo, hi, iters) {
            if better(x, v, best) {
                best = Some((x, v));
            }
        }
    }
    best
}

/// Golden-section maximization of `g` on `[a, b]`; the best point seen.
pub fn golden_max(g: &(dyn Fn(f64) -> Option<f64> + Sync), mut a: f64, mut b: f64, iters: usize) -> Option<(f64, f64)> {
    const R: f64 = 0.618_033_988_749_895;
    let val = |x: f64| g(x).filter(|v| !v.is_nan()).unwrap_or(f64::NEG_INFINITY);
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut fc, mut fd) = (val(c), val(d));
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = val(c);
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = val(d);
            if fd > best.1 {
                best = (d, fd);
            }
        }
    }
    if best.1 == f64::NEG_INFINITY {
        None
    } else {
        Some(best)
    }
}

/// Indices of one tail window (`right` selects the side), by increasing `|x|`.
///
/// Normally `|x| ∈ [tail_lo, x_max]`. When evaluation stops earlier (`ok`
/// false), the window is the outer part `[max(R/ratio, √R), R]` of the
/// contiguous evaluable range `|x| ≤ R`, with `ratio = x_max/tail_lo`.
pub fn tail_window(xs: &[f64], ok: &[bool], right: bool, cfg: &Config) -> Vec<usize> {
    let mut side: Vec<usize> = (0..xs.len())
        .filter(|&i| if right { xs[i] > 0.0 } else { xs[i] < 0.0 })
        .collect();
    side.sort_by(|&a, &b| xs[a].abs().partial_cmp(&xs[b].abs()).unwrap());
    let reach = side.iter().position(|&i| !ok[i]).map(|p| if p == 0 { 0.0 } else { xs[side[p - 1]].abs() });
    let (lo, hi) = match reach {
        None => (cfg.tail_lo, cfg.x_max),
        Some(r) if r >= cfg.x_max => (cfg.tail_lo, cfg.x_max),
        Some(r) if r <= 4.0 => return vec![],
        Some(r) => {
            let lo = (r * cfg.tail_lo / cfg.x_max).max(r.sqrt());
            (lo.min(cfg.tail_lo), r)
        }
    };
    side.into_iter()
        .filter(|&i| ok[i] && xs[i].abs() >= lo && xs[i].abs() <= hi)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinement_finds_interior_peak() {
        let g = |x: f64| Some(-(x - 0.123_456).powi(2));
        let xs = uniform_grid(-1.0, 1.0, 11);
        let vals: Vec<f64> = xs.iter().map(|&x| g(x).unwrap()).collect();
        let (x, v) = refine_max(&xs, &vals, &g, 4, 20).unwrap();
        assert!((x - 0.123_456).abs() < 1e-5);
        assert!(v >= vals.iter().cloned().fold(f64::MIN, f64::max));
    }

    #[test]
    fn region_parsing() {
        assert_eq!(Region::parse("full").unwrap(), Region::Full);
        assert_eq!(Region::parse("2:inf").unwrap(), Region::From { a: 2.0 });
        assert_eq!(Region::parse("-inf:-1/2").unwrap(), Region::UpTo { b: -0.5 });
        assert!(Region::parse("3:1").is_err());
    }
}
