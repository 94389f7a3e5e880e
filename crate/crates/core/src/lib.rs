//! Total variation distance between folded random variables and the uniform
//! limit on `[0, 1)`.
//!
//! `X mod 1` for `X = n·log_b Y` is the base-`b` significand law of `Y^n` on a
//! log scale, so every quantity here also measures how far `S_b(Y^n)` is from
//! Benford's law.
//!
//! - [`density`]: piecewise densities, folding modulo 1, total variation.
//! - [`bounds`]: upper bounds on `δ(nX mod 1, U[0,1))` and the closed-form
//!   exact distance for the uniform-log family.
//! - [`oracle`]: independent numerical ground truth (quadrature, crossing
//!   point, Monte Carlo) and randomized property harnesses.
//! - [`cli`]: table reproduction, density descriptions, CSV/JSON rendering.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod density;
pub mod error;
pub mod oracle;
pub mod quad;

pub use error::{Error, Result};
