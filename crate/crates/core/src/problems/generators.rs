use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Problem, SymmetryClass};
use crate::linalg::{sym_eig_extremes, DenseMatrix, Matrix, SparseMatrix, Vector};
use crate::{Error, Result};

/// Central-difference convection-diffusion operator on the unit square.
///
/// Discretizes `-Δu + σ u_x + τ u_y` on an `n × n` interior grid with mesh
/// width `h = 1/(n+1)`, Dirichlet boundary, unknowns ordered
/// lexicographically with the x-index fastest. The five-point stencil rows
/// are
///
/// ```text
/// center  4/h²
/// west   -1/h² - σ/(2h)      east   -1/h² + σ/(2h)
/// south  -1/h² - τ/(2h)      north  -1/h² + τ/(2h)
/// ```
///
/// The right-hand side is `K·1`, so the exact solution is the constant-one
/// vector. With `σ = τ = 0` the matrix is symmetric positive definite.
pub fn build_convection_diffusion(n: usize, sigma: f64, tau: f64) -> Result<Problem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "convection-diffusion grid needs n >= 2, got {n}"
        )));
    }
    if !sigma.is_finite() || !tau.is_finite() {
        return Err(Error::NonFinite("convection coefficients".into()));
    }
    let h = 1.0 / (n as f64 + 1.0);
    let diffusion = 1.0 / (h * h);
    let center = 4.0 * diffusion;
    let west = -diffusion - sigma / (2.0 * h);
    let east = -diffusion + sigma / (2.0 * h);
    let south = -diffusion - tau / (2.0 * h);
    let north = -diffusion + tau / (2.0 * h);

    let dim = n * n;
    let mut triplets = Vec::with_capacity(5 * dim);
    for iy in 0..n {
        for ix in 0..n {
            let row = iy * n + ix;
            triplets.push((row, row, center));
            if ix > 0 {
                triplets.push((row, row - 1, west));
            }
            if ix + 1 < n {
                triplets.push((row, row + 1, east));
            }
            if iy > 0 {
                triplets.push((row, row - n, south));
            }
            if iy + 1 < n {
                triplets.push((row, row + n, north));
            }
        }
    }
    let a = Matrix::from(SparseMatrix::from_triplets(dim, dim, &triplets)?);
    let b = a.matvec(&Vector::ones(dim));
    let class = if sigma == 0.0 && tau == 0.0 {
        SymmetryClass::Symmetric
    } else {
        SymmetryClass::General
    };
    Problem::new(a, b, class, format!("conv-diffusion-{n}x{n}"))?
        .with_solution(Vector::ones(dim))
}

/// Shifted skew-symmetric companion of a matrix: `A = I - (K - Kᵀ)/2`.
///
/// The right-hand side is `A·1`, keeping the constant-one exact solution.
/// When `K` is symmetric its skew part vanishes and `A` is the identity.
pub fn to_shifted_skew(k: &Matrix) -> Result<Problem> {
    if !k.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "shifted-skew companion of a {}x{} matrix",
            k.rows(),
            k.cols()
        )));
    }
    let n = k.rows();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        triplets.push((i, i, 1.0));
    }
    // -(K - Kᵀ)/2 entry by entry: each stored k_ij contributes -k_ij/2 at
    // (i, j) and +k_ij/2 at (j, i); duplicate slots are summed, so diagonal
    // and symmetric contributions cancel on their own.
    for (i, j, v) in k.nonzero_triplets() {
        triplets.push((i, j, -0.5 * v));
        triplets.push((j, i, 0.5 * v));
    }
    let a = Matrix::from(SparseMatrix::from_triplets(n, n, &triplets)?);
    let b = a.matvec(&Vector::ones(n));
    Problem::new(a, b, SymmetryClass::ShiftedSkewSymmetric, format!("shifted-skew-{n}"))?
        .with_solution(Vector::ones(n))
}

/// Cyclic downshift system: `A` maps `eᵢ` to `eᵢ₊₁` (indices mod n),
/// `b = e₁`, so the solution is the last basis vector `eₙ`.
///
/// For `n = 5` the matrix is
///
/// ```text
/// [ 0 0 0 0 1 ]
/// [ 1 0 0 0 0 ]
/// [ 0 1 0 0 0 ]
/// [ 0 0 1 0 0 ]
/// [ 0 0 0 1 0 ]
/// ```
pub fn build_cyclic_shift(n: usize) -> Result<Problem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cyclic shift needs n >= 2, got {n}")));
    }
    let mut triplets = Vec::with_capacity(n);
    triplets.push((0, n - 1, 1.0));
    for i in 1..n {
        triplets.push((i, i - 1, 1.0));
    }
    let a = Matrix::from(SparseMatrix::from_triplets(n, n, &triplets)?);
    let b = Vector::unit(n, 0)?;
    let x_star = Vector::unit(n, n - 1)?;
    Problem::new(a, b, SymmetryClass::General, format!("cyclic-shift-{n}"))?.with_solution(x_star)
}

/// Identity system of order `n` with `b = 1`; every solver finishes it in
/// one step, which makes it a convenient smoke-test problem.
pub fn build_identity(n: usize) -> Result<Problem> {
    if n == 0 {
        return Err(Error::InvalidArgument("identity problem needs n >= 1".into()));
    }
    let a = Matrix::from(SparseMatrix::identity(n));
    Problem::new(a, Vector::ones(n), SymmetryClass::Symmetric, format!("identity-{n}"))?
        .with_solution(Vector::ones(n))
}

fn uniform_pm1(rng: &mut ChaCha8Rng) -> f64 {
    2.0 * rng.random::<f64>() - 1.0
}

/// Dense random system of the requested symmetry class with entries drawn
/// from U(-1, 1) (then symmetrized/skewed as needed), `b = A·1`.
///
/// The same seed always produces the same problem.
pub fn random_problem(n: usize, class: SymmetryClass, seed: u64) -> Result<Problem> {
    if n == 0 {
        return Err(Error::InvalidArgument("random problem needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DenseMatrix::from_fn(n, n, |_, _| uniform_pm1(&mut rng));
    let a = match class {
        SymmetryClass::General => g,
        SymmetryClass::Symmetric => g.symmetric_part(),
        SymmetryClass::SkewSymmetric => g.skew_part(),
        SymmetryClass::ShiftedSkewSymmetric => DenseMatrix::identity(n).add(&g.skew_part()),
    };
    let a = Matrix::from(a);
    let b = a.matvec(&Vector::ones(n));
    Problem::new(a, b, class, format!("random-{}-{n}-seed{seed}", class.as_str()))?
        .with_solution(Vector::ones(n))
}

/// Dense random system whose symmetric part is shifted to have smallest
/// eigenvalue `mu_min`, so the field-of-values condition `μ(A) ≥ mu_min`
/// holds by construction. `b = A·1`.
pub fn random_positive_real(n: usize, seed: u64, mu_min: f64) -> Result<Problem> {
    if n == 0 {
        return Err(Error::InvalidArgument("random problem needs n >= 1".into()));
    }
    if !mu_min.is_finite() {
        return Err(Error::NonFinite("symmetric-part eigenvalue target".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DenseMatrix::from_fn(n, n, |_, _| uniform_pm1(&mut rng));
    let (lambda_min, _) = sym_eig_extremes(&g.symmetric_part())?;
    let shift = mu_min - lambda_min;
    let mut a = g;
    for i in 0..n {
        a.set(i, i, a.at(i, i) + shift);
    }
    let a = Matrix::from(a);
    let b = a.matvec(&Vector::ones(n));
    Problem::new(a, b, SymmetryClass::General, format!("random-positive-real-{n}-seed{seed}"))?
        .with_solution(Vector::ones(n))
}

/// Deterministic random starting guess with entries in U(-1, 1).
pub fn seeded_x0(n: usize, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Vector::from((0..n).map(|_| uniform_pm1(&mut rng)).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convection_diffusion_stencil_entries() {
        // n = 2, σ = τ = 0: h = 1/3, so 4/h² = 36 on the diagonal and
        // -1/h² = -9 on all neighbor slots.
        let p = build_convection_diffusion(2, 0.0, 0.0).unwrap();
        assert_eq!(p.symmetry_class(), SymmetryClass::Symmetric);
        let d = p.a().to_dense();
        for i in 0..4 {
            assert_eq!(d.at(i, i), 36.0);
        }
        assert_eq!(d.at(0, 1), -9.0);
        assert_eq!(d.at(0, 2), -9.0);
        assert_eq!(d.at(0, 3), 0.0);
        assert_eq!(d.at(3, 1), -9.0);
        // b = K·1: row 0 sums to 36 - 9 - 9 = 18.
        assert_eq!(p.b()[0], 18.0);
    }

    #[test]
    fn convection_terms_split_east_west() {
        // n = 2, σ = 6, τ = 0: h = 1/3 so σ/(2h) = 9; west = -18, east = 0.
        let p = build_convection_diffusion(2, 6.0, 0.0).unwrap();
        assert_eq!(p.symmetry_class(), SymmetryClass::General);
        let d = p.a().to_dense();
        assert_eq!(d.at(1, 0), -18.0);
        assert_eq!(d.at(0, 1), 0.0);
        // τ = 0 keeps the vertical couplings symmetric.
        assert_eq!(d.at(0, 2), -9.0);
        assert_eq!(d.at(2, 0), -9.0);
    }

    #[test]
    fn shifted_skew_of_dense_example() {
        // K = [[1,2],[3,1]] has skew part [[0,-1/2],[1/2,0]], so
        // A = I - skew = [[1, 1/2], [-1/2, 1]].
        let k = Matrix::from(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap());
        let p = to_shifted_skew(&k).unwrap();
        let d = p.a().to_dense();
        assert_eq!(d.at(0, 0), 1.0);
        assert_eq!(d.at(0, 1), 0.5);
        assert_eq!(d.at(1, 0), -0.5);
        assert_eq!(d.at(1, 1), 1.0);
        assert_eq!(p.symmetry_class(), SymmetryClass::ShiftedSkewSymmetric);
        assert_eq!(p.b().as_slice(), &[1.5, 0.5]);
    }

    #[test]
    fn shifted_skew_of_symmetric_is_identity() {
        let k = Matrix::from(DenseMatrix::from_rows(&[vec![2.0, 7.0], vec![7.0, 5.0]]).unwrap());
        let p = to_shifted_skew(&k).unwrap();
        assert_eq!(p.a().to_dense(), DenseMatrix::identity(2));
    }

    #[test]
    fn cyclic_shift_structure() {
        let p = build_cyclic_shift(5).unwrap();
        let d = p.a().to_dense();
        assert_eq!(d.at(0, 4), 1.0);
        for i in 1..5 {
            assert_eq!(d.at(i, i - 1), 1.0);
        }
        assert_eq!(p.a().nonzero_triplets().len(), 5);
        // A eₙ = e₁, so x* = eₙ solves A x = e₁.
        let r = p.residual(p.x_star().unwrap());
        assert_eq!(r.norm(), 0.0);
    }

    #[test]
    fn random_problems_are_deterministic_and_classified() {
        for class in [
            SymmetryClass::General,
            SymmetryClass::Symmetric,
            SymmetryClass::ShiftedSkewSymmetric,
            SymmetryClass::SkewSymmetric,
        ] {
            let p1 = random_problem(6, class, 9).unwrap();
            let p2 = random_problem(6, class, 9).unwrap();
            assert_eq!(p1.a().to_dense(), p2.a().to_dense());
            assert_eq!(p1.symmetry_class(), class);
        }
        let p1 = random_problem(6, SymmetryClass::General, 9).unwrap();
        let p3 = random_problem(6, SymmetryClass::General, 10).unwrap();
        assert_ne!(p1.a().to_dense(), p3.a().to_dense());
    }

    #[test]
    fn positive_real_shift_hits_target() {
        let p = random_positive_real(12, 3, 0.1).unwrap();
        let (mu, _) = sym_eig_extremes(&p.a().to_dense().symmetric_part()).unwrap();
        assert!((mu - 0.1).abs() <= 1e-9, "smallest symmetric-part eigenvalue {mu}");
    }

    #[test]
    fn seeded_x0_is_reproducible_and_bounded() {
        let a = seeded_x0(16, 7);
        let b = seeded_x0(16, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.abs() <= 1.0));
        assert_ne!(seeded_x0(16, 8), a);
    }
}
