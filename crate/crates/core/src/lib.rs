//! Ziv-Zakai lower bounds on the minimum mean-square error of estimating a
//! random input from a Gaussian-noise observation, and the baselines they are
//! compared against.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotic;
pub mod baseline;
pub mod channel;
pub mod detect;
pub mod diagnostics;
pub mod error;
pub mod numerics;
pub mod prior;
pub mod schema;
pub mod zz;

pub use channel::AwgnChannel;
pub use error::{Error, Result};
pub use zz::{BoundOptions, BoundReport, Family};
pub use prior::{PriorKind, ProductPrior, ScalarPrior};
