use nalgebra::{DMatrix, DVector};

use super::{DenseMatrix, Matrix, Vector};
use crate::{Error, Result};

/// Relative asymmetry above which [`sym_eig_extremes`] refuses its input.
const SYMMETRY_TOL: f64 = 1e-12;

/// Smallest and largest eigenvalue of a symmetric matrix.
///
/// The input is checked for symmetry to a relative tolerance of `1e-12`
/// in the max-abs norm; asymmetric matrices are rejected rather than
/// silently symmetrized.
pub fn sym_eig_extremes(s: &DenseMatrix) -> Result<(f64, f64)> {
    if s.rows() != s.cols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            s.rows(),
            s.cols()
        )));
    }
    let scale = s.max_abs();
    if scale == 0.0 {
        return Ok((0.0, 0.0));
    }
    let asym = s.sub(&s.transpose()).max_abs();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::SymmetryViolation(format!(
            "matrix is not symmetric: max |S - Sᵀ| = {asym:.3e} against scale {scale:.3e}"
        )));
    }
    let eig = nalgebra::SymmetricEigen::new(s.to_nalgebra());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &l in eig.eigenvalues.iter() {
        lo = lo.min(l);
        hi = hi.max(l);
    }
    Ok((lo, hi))
}

/// Spectral radius `max |λᵢ|` of a square matrix, from its complex
/// eigenvalues.
pub fn spectral_radius(m: &DenseMatrix) -> Result<f64> {
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "spectral radius of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let eigs = m.to_nalgebra().complex_eigenvalues();
    Ok(eigs.iter().fold(0.0, |a, l| a.max(l.norm())))
}

/// Operator 2-norm (largest singular value) of a dense matrix.
pub fn two_norm(m: &DenseMatrix) -> f64 {
    m.to_nalgebra().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Deterministic power-iteration estimate of the operator 2-norm, usable
/// for large sparse matrices where a dense SVD is wasteful. The estimate
/// approaches the true norm from below.
pub fn two_norm_estimate(m: &Matrix, iterations: usize) -> f64 {
    let n = m.cols();
    if n == 0 {
        return 0.0;
    }
    // Fixed, slightly tilted start vector so no direction of interest is
    // accidentally orthogonal to it.
    let mut v = Vector::from(
        (0..n).map(|i| 1.0 + (i as f64 + 1.0) / (n as f64)).collect::<Vec<_>>(),
    );
    let nv = v.norm();
    v.scale(1.0 / nv);
    let mut sigma = 0.0;
    for _ in 0..iterations {
        let av = m.matvec(&v);
        sigma = av.norm();
        if sigma == 0.0 {
            return 0.0;
        }
        let mut w = m.matvec_transpose(&av);
        let nw = w.norm();
        if nw == 0.0 {
            return sigma;
        }
        w.scale(1.0 / nw);
        v = w;
    }
    sigma
}

/// Dense LU solver that factors once and solves repeatedly.
pub struct LuSolver {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl LuSolver {
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                m.rows(),
                m.cols()
            )));
        }
        let lu = nalgebra::LU::new(m.to_nalgebra());
        if !lu.is_invertible() {
            return Err(Error::Singular("LU factorization found a zero pivot".into()));
        }
        Ok(Self { lu, n: m.rows() })
    }

    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side length {} for order-{} factorization",
                b.len(),
                self.n
            )));
        }
        let x = self
            .lu
            .solve(&DVector::from_column_slice(b.as_slice()))
            .ok_or_else(|| Error::Singular("LU solve failed".into()))?;
        Ok(Vector::from(x.as_slice()))
    }
}

/// Dense inverse; errors on singular input.
pub fn dense_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "inverse of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let inv: Option<DMatrix<f64>> = m.to_nalgebra().try_inverse();
    match inv {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => Ok(DenseMatrix::from_nalgebra(&inv)),
        _ => Err(Error::Singular("matrix has no finite inverse".into())),
    }
}
