//! Invariant pairs and solvents of matrix polynomials from contour integrals.
//!
//! The pipeline: quadrature moments of `u^H P(z)^{-1} v` on a circle
//! ([`contour`]), Hankel pencils built from them ([`hankel`]), extraction of
//! an invariant pair `(X, S)`, Newton refinement with an optimal step
//! ([`refine`]), condition numbers and backward errors ([`conditioning`]),
//! and solvents ([`solvents`]).

// `!(x <= limit)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditioning;
pub mod contour;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod hankel;
pub mod linalg;
pub mod matpoly;
pub mod refine;
pub mod solvents;
pub mod spectrum;

pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{CMat, CVec, C64};
pub use matpoly::{InvariantPair, MatrixPolynomial};
