//! Numeric settings shared by every analyzer.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    /// Sampling window `[-x_max, x_max]`.
    pub x_max: f64,
    /// Smallest positive sample of the log-spaced grid.
    pub x_min: f64,
    /// Log-spaced points per sign.
    pub base_points: usize,
    /// Golden-section refinement depth, in halvings of the bracket.
    pub refine_depth: usize,
    /// Number of local maxima refined.
    pub refine_top: usize,
    /// Tail fit window `|x| ∈ [tail_lo, x_max]`.
    pub tail_lo: f64,
    /// Blocks in the tail regression.
    pub tail_blocks: usize,
    pub residual_threshold: f64,
    pub slope_threshold: f64,
    /// Largest `ln|x|` probed by the deep-tail checks.
    pub deep_tail_u: f64,
    /// Highest derivative order examined by default.
    pub max_order: usize,
    pub p_max: u32,
    pub k_max: u32,
    pub q_max: u32,
    pub n_max: u32,
    pub t_lattice: Vec<f64>,
    /// The `c` lattice is `2^0, 2^-1, …, 2^-c_min_exp`.
    pub c_min_exp: u32,
    /// Uniform points for norms on compact intervals.
    pub interval_points: usize,
    /// Relative width of the range-endpoint neighborhood skipped by the
    /// preimage heuristic.
    pub endpoint_exclusion: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            x_max: 1e4,
            x_min: 1e-4,
            base_points: 4096,
            refine_depth: 12,
            refine_top: 16,
            tail_lo: 1e2,
            tail_blocks: 16,
            residual_threshold: 0.1,
            slope_threshold: 0.05,
            deep_tail_u: 700.0,
            max_order: 4,
            p_max: 32,
            k_max: 64,
            q_max: 32,
            n_max: 8,
            t_lattice: vec![1.0, 2.0, 4.0, 8.0, 0.5],
            c_min_exp: 10,
            interval_points: 4097,
            endpoint_exclusion: 1e-3,
            tol: 1e-9,
            seed: 0,
        }
    }
}

impl Config {
    /// Apply a flat `key = value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
            self.set(k.trim(), v.trim()).map_err(|e| format!("line {}: {e}", no + 1))?;
        }
        Ok(())
    }

    /// Set a field from its textual key, as used by config files and flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T, String> {
            v.trim().parse().map_err(|_| format!("invalid value '{v}' for {k}"))
        }
        match key {
            "x_max" => self.x_max = num(key, value)?,
            "x_min" => self.x_min = num(key, value)?,
            "base_points" => self.base_points = num(key, value)?,
            "refine_depth" => self.refine_depth = num(key, value)?,
            "refine_top" => self.refine_top = num(key, value)?,
            "tail_lo" => self.tail_lo = num(key, value)?,
            "tail_blocks" => self.tail_blocks = num(key, value)?,
            "residual_threshold" => self.residual_threshold = num(key, value)?,
            "slope_threshold" => self.slope_threshold = num(key, value)?,
            "deep_tail_u" => self.deep_tail_u = num(key, value)?,
            "max_order" => self.max_order = num(key, value)?,
            "p_max" => self.p_max = num(key, value)?,
            "k_max" => self.k_max = num(key, value)?,
            "q_max" => self.q_max = num(key, value)?,
            "n_max" => self.n_max = num(key, value)?,
            "c_min_exp" => self.c_min_exp = num(key, value)?,
            "interval_points" => self.interval_points = num(key, value)?,
            "endpoint_exclusion" => self.endpoint_exclusion = num(key, value)?,
            "tol" => self.tol = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "t_lattice" => {
                self.t_lattice = value
                    .split(',')
                    .map(|s| num::<f64>(key, s))
                    .collect::<Result<_, _>>()?;
            }
            _ => return Err(format!("unknown config key '{key}'")),
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.x_max > self.tail_lo && self.tail_lo > self.x_min && self.x_min > 0.0) {
            return Err("need 0 < x_min < tail_lo < x_max".into());
        }
        if self.base_points < 16 || self.tail_blocks < 4 {
            return Err("grid too coarse".into());
        }
        if self.t_lattice.iter().any(|t| *t <= 0.0) {
            return Err("T lattice entries must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_overrides() {
        let mut c = Config::default();
        c.apply_text("# window\nx_max = 1e5\n\nt_lattice = 1, 2\n").unwrap();
        assert_eq!(c.x_max, 1e5);
        assert_eq!(c.t_lattice, vec![1.0, 2.0]);
        assert!(c.apply_text("nonsense").is_err());
        assert!(c.apply_text("x_min = 1e6").is_err());
        assert!(c.apply_text("colour = 3").is_err());
    }
}
