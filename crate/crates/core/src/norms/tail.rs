//! Tail behaviour from log–log regression of block maxima.

use serde::Serialize;

use crate::config::Config;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailStatus {
    Decaying,
    /// Neither growing nor decaying: finite sup, no decay.
    Bounded,
    Growing,
    Ambiguous,
}

impl TailStatus {
    /// Worst of two statuses: growing > ambiguous > bounded > decaying.
    pub fn worst(self, other: TailStatus) -> TailStatus {
        fn rank(s: TailStatus) -> u8 {
            match s {
                TailStatus::Decaying => 0,
                TailStatus::Bounded => 1,
                TailStatus::Ambiguous => 2,
                TailStatus::Growing => 3,
            }
        }
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailFit {
    pub status: TailStatus,
    /// Fitted exponent of `|x|`; `None` when the fit is not polynomial.
    pub slope: Option<f64>,
    pub residual: f64,
    pub super_polynomial: bool,
    /// Block-argmax abscissas (by increasing `|x|`) and their log values.
    pub points: Vec<f64>,
    pub log_values: Vec<f64>,
}

/// Classify samples `(x, ln v)` taken on one tail.
pub fn classify_tail(xs: &[f64], logs: &[f64], cfg: &Config) -> TailFit {
    let mut idx: Vec<usize> = (0..xs.len()).filter(|&i| !logs[i].is_nan()).collect();
    idx.sort_by(|&a, &b| xs[a].abs().partial_cmp(&xs[b].abs()).unwrap());
    let empty = TailFit {
        status: TailStatus::Ambiguous,
        slope: None,
        residual: f64::INFINITY,
        super_polynomial: false,
        points: vec![],
        log_values: vec![],
    };
    if idx.len() < cfg.tail_blocks {
        return empty;
    }
    let u0 = xs[idx[0]].abs().ln();
    let u1 = xs[*idx.last().unwrap()].abs().ln();
    let k = cfg.tail_blocks;
    let mut blocks: Vec<Option<(f64, f64)>> = vec![None; k];
    for &i in &idx {
        let u = xs[i].abs().ln();
        let b = (((u - u0) / (u1 - u0) * k as f64) as usize).min(k - 1);
        let l = logs[i];
        if blocks[b].is_none_or(|(_, m)| l > m) {
            blocks[b] = Some((xs[i], l));
        }
    }
    let filled: Vec<(f64, f64)> = blocks.iter().flatten().copied().collect();
    let points: Vec<f64> = filled.iter().map(|p| p.0).collect();
    let log_values: Vec<f64> = filled.iter().map(|p| p.1).collect();
    let finite: Vec<(f64, f64)> = filled
        .iter()
        .filter(|p| p.1.is_finite())
        .map(|p| (p.0.abs().ln(), p.1))
        .collect();
    let base = TailFit { points, log_values, ..empty };
    if filled.iter().any(|p| p.1 == f64::INFINITY) {
        return TailFit { status: TailStatus::Growing, super_polynomial: true, ..base };
    }
    // identically zero far out
    let last_zero = filled.last().is_some_and(|p| p.1 == f64::NEG_INFINITY);
    if finite.is_empty() || (last_zero && finite.len() < 4) {
        return TailFit { status: TailStatus::Decaying, residual: 0.0, ..base };
    }
    if finite.len() < 4 {
        return base;
    }
    let (slope, _, residual) = regress(&finite);
    if residual <= cfg.residual_threshold {
        let status = if slope > cfg.slope_threshold {
            TailStatus::Growing
        } else if slope < -cfg.slope_threshold {
            TailStatus::Decaying
        } else {
            TailStatus::Bounded
        };
        return TailFit { status, slope: Some(slope), residual, ..base };
    }
    let ls: Vec<f64> = finite.iter().map(|p| p.1).collect();
    let inc = ls.windows(2).all(|w| w[1] >= w[0]);
    let dec = ls.windows(2).all(|w| w[1] <= w[0]);
    let d1: Vec<f64> = finite.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let accel = d1.windows(2).filter(|w| w[1].abs() >= w[0].abs()).count() * 4 >= d1.len().saturating_sub(1) * 3;
    let last = *ls.last().unwrap();
    let status = if inc && accel && last > 0.0 {
        TailStatus::Growing
    } else if dec && accel {
        TailStatus::Decaying
    } else if last > 200.0 && slope > 0.0 {
        TailStatus::Growing
    } else if (last < -200.0 && slope < 0.0) || last_zero {
        TailStatus::Decaying
    } else {
        TailStatus::Ambiguous
    };
    let superpoly = matches!(status, TailStatus::Growing | TailStatus::Decaying);
    TailFit { status, slope: None, residual, super_polynomial: superpoly, ..base }
}

/// Least squares `l = s·u + c`; returns `(s, c, rms residual)`.
pub fn regress(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mu = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let suu: f64 = pts.iter().map(|p| (p.0 - mu).powi(2)).sum();
    let sul: f64 = pts.iter().map(|p| (p.0 - mu) * (p.1 - ml)).sum();
    let s = if suu > 0.0 { sul / suu } else { 0.0 };
    let c = ml - s * mu;
    let rss: f64 = pts.iter().map(|p| (p.1 - s * p.0 - c).powi(2)).sum();
    (s, c, (rss / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::grid::log_grid;

    fn fit(f: impl Fn(f64) -> f64) -> TailFit {
        let cfg = Config::default();
        let xs = log_grid(cfg.tail_lo, cfg.x_max, 1024);
        let ls: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        classify_tail(&xs, &ls, &cfg)
    }

    #[test]
    fn polynomial_slopes() {
        let g = fit(|x| 2.0 * x.ln());
        assert_eq!(g.status, TailStatus::Growing);
        assert!((g.slope.unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(fit(|x| -(x.ln())).status, TailStatus::Decaying);
        assert_eq!(fit(|_| 0.3).status, TailStatus::Bounded);
    }

    #[test]
    fn super_polynomial_tails() {
        let g = fit(|x| -x * x);
        assert_eq!(g.status, TailStatus::Decaying);
        assert!(g.super_polynomial);
        assert_eq!(fit(|x| x).status, TailStatus::Growing);
        assert_eq!(fit(|_| f64::NEG_INFINITY).status, TailStatus::Decaying);
    }

    #[test]
    fn oscillation_without_trend_is_ambiguous() {
        assert_eq!(fit(|x| 3.0 * (x.ln() * 7.0).sin()).status, TailStatus::Ambiguous);
    }
}
