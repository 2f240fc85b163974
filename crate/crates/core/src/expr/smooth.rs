//! Common evaluation interface for everything the analyzers sample.

use super::ast::Expr;
use super::jet::{EvalError, Jet};
use super::piecewise::PiecewiseFn;

pub trait SmoothFn: Sync {
    /// Evaluate with `x` replaced by the jet `x`.
    fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError>;

    /// Points where the definition changes.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.eval_jet(&Jet::var(x, 0))?.value())
    }

    /// Derivatives `0..=order` at `x`.
    fn jet(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        self.eval_jet(&Jet::var(x, order))
    }
}

impl SmoothFn for Expr {
    fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        Expr::eval_jet(self, x)
    }
}

impl SmoothFn for PiecewiseFn {
    fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        PiecewiseFn::eval_jet(self, x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        PiecewiseFn::breakpoints(self)
    }
}

/// `outer ∘ inner`.
pub struct Compose<'a> {
    pub outer: &'a dyn SmoothFn,
    pub inner: &'a dyn SmoothFn,
}

impl SmoothFn for Compose<'_> {
    fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        self.outer.eval_jet(&self.inner.eval_jet(x)?)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
}

/// `scale · f`.
pub struct Scaled<'a> {
    pub f: &'a dyn SmoothFn,
    pub scale: f64,
}

impl SmoothFn for Scaled<'_> {
    fn eval_jet(&self, x: &Jet) -> Result<Jet, EvalError> {
        self.f.eval_jet(x)?.scale(self.scale)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.f.breakpoints()
    }
}
