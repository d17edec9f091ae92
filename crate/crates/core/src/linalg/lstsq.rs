use nalgebra::DVector;

use super::{DenseMatrix, Vector};
use crate::{Error, Result};

/// Outcome of a least-squares solve `min ‖f - W β‖₂`.
#[derive(Clone, Debug)]
pub struct LeastSquaresSolution {
    /// The coefficient vector `β`.
    pub coefficients: Vector,
    /// Number of singular values above the rank cutoff.
    pub numerical_rank: usize,
    /// True when `W` was rank-deficient and the minimum-norm solution among
    /// all minimizers was selected.
    pub min_norm_applied: bool,
    /// `‖f - W β‖₂`, recomputed from the returned coefficients.
    pub residual_norm: f64,
}

fn validate(w: &DenseMatrix, f: &Vector, rank_tol: f64) -> Result<()> {
    if w.rows() == 0 || w.cols() == 0 {
        return Err(Error::InvalidArgument("least-squares matrix is empty".into()));
    }
    if w.rows() != f.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows but right-hand side has length {}",
            w.rows(),
            f.len()
        )));
    }
    if !(rank_tol > 0.0 && rank_tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "rank tolerance must be positive and finite, got {rank_tol}"
        )));
    }
    if !f.is_finite() {
        return Err(Error::NonFinite("least-squares right-hand side".into()));
    }
    Ok(())
}

/// Minimum-norm least-squares solve via a singular value decomposition.
///
/// Singular values at or below `rank_tol` times the largest one are treated
/// as zero. When that truncation discards directions (numerical rank below
/// the column count) the solution returned is the minimizer of smallest
/// Euclidean norm and `min_norm_applied` is set.
pub fn min_norm_lstsq(w: &DenseMatrix, f: &Vector, rank_tol: f64) -> Result<LeastSquaresSolution> {
    validate(w, f, rank_tol)?;
    let p = w.cols();
    let wm = w.to_nalgebra();
    let svd = wm.svd(true, true);
    let u = svd.u.as_ref().expect("SVD with compute_u");
    let vt = svd.v_t.as_ref().expect("SVD with compute_v");
    let sigma = &svd.singular_values;

    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = rank_tol * sigma_max;
    let fm = DVector::from_column_slice(f.as_slice());

    let mut beta = DVector::zeros(p);
    let mut rank = 0usize;
    for i in 0..sigma.len() {
        if sigma[i] > cutoff && sigma[i] > 0.0 {
            rank += 1;
            let coeff = u.column(i).dot(&fm) / sigma[i];
            beta.axpy(coeff, &vt.row(i).transpose(), 1.0);
        }
    }

    let coefficients = Vector::from(beta.as_slice());
    let residual_norm = f.sub(&w.matvec(&coefficients)).norm();
    Ok(LeastSquaresSolution {
        coefficients,
        numerical_rank: rank,
        min_norm_applied: rank < p,
        residual_norm,
    })
}

/// Ratio of smallest to largest Cholesky pivot below which the Gram
/// matrix counts as singular. Forming `WᵀW` squares the conditioning, so
/// the factorization cannot resolve rank below roughly the square root of
/// machine precision; an exactly repeated column typically produces a
/// rounding-level positive pivot (ratio near 1e-8) instead of failing
/// outright, so the guard sits one decade above that.
const GRAM_PIVOT_REL: f64 = 1e-7;

/// Least-squares solve through the normal equations `(WᵀW) β = Wᵀ f`.
///
/// This is the textbook route the windowed solvers are often described
/// with; it is kept as a cross-check against [`min_norm_lstsq`] and loses
/// accuracy when `W` is ill-conditioned. If the Cholesky factorization of
/// `WᵀW` fails, or succeeds only with a pivot at rounding level
/// ([`GRAM_PIVOT_REL`]), the call falls back to the SVD path, so
/// rank-deficient windows still produce the flagged minimum-norm
/// solution.
pub fn normal_equations_lstsq(
    w: &DenseMatrix,
    f: &Vector,
    rank_tol: f64,
) -> Result<LeastSquaresSolution> {
    validate(w, f, rank_tol)?;
    let p = w.cols();
    let wm = w.to_nalgebra();
    let c = wm.transpose() * &wm;
    let rhs = wm.transpose() * DVector::from_column_slice(f.as_slice());
    match nalgebra::Cholesky::new(c) {
        Some(chol) => {
            let l = chol.l_dirty();
            let mut min_pivot = f64::INFINITY;
            let mut max_pivot = 0.0_f64;
            for i in 0..p {
                min_pivot = min_pivot.min(l[(i, i)]);
                max_pivot = max_pivot.max(l[(i, i)]);
            }
            if min_pivot <= GRAM_PIVOT_REL * max_pivot {
                return min_norm_lstsq(w, f, rank_tol);
            }
            let beta = chol.solve(&rhs);
            let coefficients = Vector::from(beta.as_slice());
            let residual_norm = f.sub(&w.matvec(&coefficients)).norm();
            Ok(LeastSquaresSolution {
                coefficients,
                numerical_rank: p,
                min_norm_applied: false,
                residual_norm,
            })
        }
        None => min_norm_lstsq(w, f, rank_tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn assert_close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= TOL, "{x} vs {y}");
        }
    }

    #[test]
    fn identity_system_is_exact() {
        let w = DenseMatrix::identity(2);
        let f = Vector::from(vec![1.0, 2.0]);
        let sol = min_norm_lstsq(&w, &f, 1e-12).unwrap();
        assert_close(sol.coefficients.as_slice(), &[1.0, 2.0]);
        assert_eq!(sol.numerical_rank, 2);
        assert!(!sol.min_norm_applied);
        assert!(sol.residual_norm <= TOL);
    }

    #[test]
    fn tall_full_rank_projects() {
        // Single column (1, 0); projecting (3, 4) leaves residual norm 4.
        let w = DenseMatrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let f = Vector::from(vec![3.0, 4.0]);
        let sol = min_norm_lstsq(&w, &f, 1e-12).unwrap();
        assert_close(sol.coefficients.as_slice(), &[3.0]);
        assert!((sol.residual_norm - 4.0).abs() <= TOL);
        assert_eq!(sol.numerical_rank, 1);
    }

    #[test]
    fn rank_deficient_square_takes_min_norm_solution() {
        // Both columns equal; any β with β₀+β₁ = 2 solves exactly, and the
        // smallest such β is (1, 1).
        let w = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let f = Vector::from(vec![2.0, 2.0]);
        let sol = min_norm_lstsq(&w, &f, 1e-12).unwrap();
        assert_close(sol.coefficients.as_slice(), &[1.0, 1.0]);
        assert_eq!(sol.numerical_rank, 1);
        assert!(sol.min_norm_applied);
        assert!(sol.residual_norm <= TOL);
    }

    #[test]
    fn rank_deficient_inconsistent_system() {
        // Columns (1,2,3) and twice it; best fit of (1,1,1) is 3/7 times
        // (1,2,3), reached by the minimum-norm pair (3/35, 6/35), leaving
        // residual norm sqrt(21)/7.
        let w = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        let f = Vector::ones(3);
        let sol = min_norm_lstsq(&w, &f, 1e-12).unwrap();
        assert_close(sol.coefficients.as_slice(), &[3.0 / 35.0, 6.0 / 35.0]);
        assert_eq!(sol.numerical_rank, 1);
        assert!(sol.min_norm_applied);
        assert!((sol.residual_norm - 21f64.sqrt() / 7.0).abs() <= TOL);
    }

    #[test]
    fn wide_system_takes_min_norm_solution() {
        let w = DenseMatrix::from_rows(&[vec![1.0, 0.0, 1.0]]).unwrap();
        let f = Vector::from(vec![3.0]);
        let sol = min_norm_lstsq(&w, &f, 1e-12).unwrap();
        assert_close(sol.coefficients.as_slice(), &[1.5, 0.0, 1.5]);
        assert!(sol.min_norm_applied);
        assert!(sol.residual_norm <= TOL);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let w = DenseMatrix::zeros(3, 2);
        let f = Vector::from(vec![1.0, 2.0, 2.0]);
        let sol = min_norm_lstsq(&w, &f, 1e-12).unwrap();
        assert_close(sol.coefficients.as_slice(), &[0.0, 0.0]);
        assert_eq!(sol.numerical_rank, 0);
        assert!(sol.min_norm_applied);
        assert!((sol.residual_norm - 3.0).abs() <= TOL);
    }

    #[test]
    fn normal_equations_agree_on_well_conditioned_input() {
        let w =
            DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let f = Vector::from(vec![1.0, 2.0, 3.0]);
        let ne = normal_equations_lstsq(&w, &f, 1e-12).unwrap();
        assert_close(ne.coefficients.as_slice(), &[-1.0, 2.0]);
        let svd = min_norm_lstsq(&w, &f, 1e-12).unwrap();
        assert_close(svd.coefficients.as_slice(), ne.coefficients.as_slice());
        assert!((svd.residual_norm - ne.residual_norm).abs() <= 1e-10);
    }

    #[test]
    fn normal_equations_fall_back_on_rank_deficiency() {
        let w = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let f = Vector::from(vec![2.0, 2.0]);
        let sol = normal_equations_lstsq(&w, &f, 1e-12).unwrap();
        assert!(sol.min_norm_applied);
        assert_close(sol.coefficients.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let w = DenseMatrix::identity(2);
        let f = Vector::from(vec![1.0, 2.0, 3.0]);
        assert!(min_norm_lstsq(&w, &f, 1e-12).is_err());
        let f = Vector::from(vec![1.0, 2.0]);
        assert!(min_norm_lstsq(&w, &f, 0.0).is_err());
        assert!(min_norm_lstsq(&w, &f, -1.0).is_err());
        assert!(min_norm_lstsq(&w, &Vector::from(vec![f64::NAN, 0.0]), 1e-12).is_err());
    }
}
