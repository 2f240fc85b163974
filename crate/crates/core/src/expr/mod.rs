//! Expressions in one real variable and piecewise functions built from them.

pub mod ast;
pub mod jet;
pub mod normal;
pub mod parse;
pub mod piecewise;
pub mod poly;
pub mod print;
pub mod smooth;

pub use ast::{Constant, Expr, Func};
pub use jet::{EvalError, Jet};
pub use normal::{equivalent, normalize};
pub use parse::{parse, parse_expr, ParseError};
pub use piecewise::{Bound, PieceBody, PiecewiseError, PiecewiseFn};
pub use poly::{rat, ratio, Polynomial, Rational};
pub use smooth::{Compose, SmoothFn};
