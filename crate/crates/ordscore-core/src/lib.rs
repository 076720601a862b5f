//! Numeric scores for ordered factors in linear and generalized linear models.
//!
//! An ordered factor with `K` levels normally enters a linear predictor
//! through `K - 1` orthogonal-polynomial contrast columns. This crate
//! constructs a single score column instead: the levels `1..K` are mapped to
//! the quantiles of a flexible two-parameter distribution family (Johnson
//! S_U, Tukey g-and-h, or sinh-arcsinh) evaluated at `k/(K+1)`, and the
//! shape parameters are chosen by minimizing the residual deviance of the
//! enclosing regression model.
//!
//! The crate is `no_std` (with `alloc`); everything that touches the file
//! system or a terminal lives in the companion `ordscore` crate.
//!
//! * [`special`] - scalar special functions (normal CDF/quantile,
//!   incomplete beta, Student t).
//! * [`score`] - the quantile-transform families and score grids.
//! * [`contrasts`] - orthogonal-polynomial contrast coding.
//! * [`design`] - model frames and design-matrix assembly.
//! * [`glm`] - least squares, grouped-binomial IRLS and Box-Cox profiling.
//! * [`optim`] - Nelder-Mead simplex minimizer.
//! * [`scorefit`] - the outer search over score-family shape parameters.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod contrasts;
pub mod design;
mod error;
pub mod glm;
pub mod optim;
pub mod score;
pub mod scorefit;
pub mod special;

pub(crate) mod linalg;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
