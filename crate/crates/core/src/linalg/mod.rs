//! Dense and sparse storage plus the handful of numerical kernels the
//! solver layer is built on: matrix-vector products, a rank-aware
//! minimum-norm least-squares solve, and symmetric/general eigenvalue
//! helpers for the diagnostics layer.

mod dense;
mod eig;
mod lstsq;
mod matrix;
mod sparse;
mod vector;

pub use dense::DenseMatrix;
pub use eig::{dense_inverse, spectral_radius, sym_eig_extremes, two_norm, two_norm_estimate, LuSolver};
pub use lstsq::{min_norm_lstsq, normal_equations_lstsq, LeastSquaresSolution};
pub use matrix::Matrix;
pub use sparse::SparseMatrix;
pub use vector::Vector;
