//! Composition operators on the Schwartz space of rapidly decreasing
//! functions: symbol recognition, multiplier closed-range tests,
//! closed-range rules for `f ↦ f∘φ`, and the constructive witnesses behind
//! them.

pub mod expr;
pub mod closed_range;
pub mod config;
pub mod corpus;
pub mod fdb;
pub mod multiplier;
pub mod norms;
pub mod report;
pub mod symbol;
pub mod verdict;
pub mod witness;

pub use config::Config;
pub use verdict::{Status, Verdict, Witness};
