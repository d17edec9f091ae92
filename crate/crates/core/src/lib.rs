//! Solvers for linear systems `A x = b` viewed as fixed-point problems
//! `x = q(x) = M x + c` with `M = I - A`, together with diagnostics that
//! machine-check the algebraic relations the solver family is built on.
//!
//! The crate has four layers:
//!
//! * [`linalg`] — dense/sparse matrix storage, matrix-vector products, a
//!   rank-aware minimum-norm least-squares kernel and small eigenvalue
//!   helpers.
//! * [`problems`] — canned test systems (convection-diffusion stencils,
//!   shifted skew-symmetric variants, cyclic shift matrices, Matrix Market
//!   I/O) tagged with a verified symmetry class.
//! * [`solvers`] — GMRES, windowed and full-history NGMRES, Anderson
//!   acceleration, the minimal-residual iteration, a three-term NGMRES(1)
//!   recurrence and conjugate residuals, all recording a full
//!   [`solvers::IterationTrace`].
//! * [`diagnostics`] — residual-orthogonality checks, residual-polynomial
//!   tracking, convergence-bound evaluation and trace comparison.
//!
//! Residual convention: throughout the crate `r(x) = A x - b`, so the
//! fixed-point map satisfies `q(x) = x - r(x)` and `r(q(x)) = M r(x)`.

pub mod diagnostics;
mod error;
pub mod linalg;
pub mod problems;
pub mod solvers;

pub use error::Error;

/// Convenience alias used by every fallible API in the crate.
pub type Result<T> = std::result::Result<T, Error>;
