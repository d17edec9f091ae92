use crate::linalg::{DenseMatrix, LuSolver, Matrix, Vector};
use crate::problems::{verify_class, Problem, SymmetryClass};
use crate::{Error, Result};

/// Left preconditioner `P` for transforming `A x = b` into
/// `P⁻¹A x = P⁻¹b`.
pub enum Preconditioner {
    /// `P = I`; the transformed problem is the original problem.
    Identity,
    /// `P = diag(d)`; rows are scaled by the reciprocals of `d`.
    Diagonal(Vector),
    /// A general matrix applied through a dense LU solve.
    Dense(DenseMatrix),
}

impl Preconditioner {
    /// Jacobi preconditioner: the diagonal of the problem's matrix.
    /// Fails if any diagonal entry is zero.
    pub fn jacobi(p: &Problem) -> Result<Self> {
        let d = p.a().to_dense();
        let diag: Vec<f64> = (0..p.dim()).map(|i| d.at(i, i)).collect();
        if let Some(i) = diag.iter().position(|v| *v == 0.0) {
            return Err(Error::Singular(format!(
                "Jacobi preconditioner undefined: zero diagonal entry at row {i}"
            )));
        }
        Ok(Preconditioner::Diagonal(Vector::from(diag)))
    }
}

/// Builds the left-preconditioned problem `P⁻¹A x = P⁻¹b`.
///
/// The exact solution is unchanged, so any attached `x_star` is carried
/// over. The symmetry class of the result is re-verified: if the
/// transformed matrix still satisfies the original class it keeps the
/// tag, otherwise it is downgraded to general. With
/// [`Preconditioner::Identity`] the returned problem is a field-for-field
/// copy, so solver runs on it are bit-identical to runs on the original.
pub fn left_precondition(p: &Problem, precond: &Preconditioner) -> Result<Problem> {
    match precond {
        Preconditioner::Identity => Ok(p.clone()),
        Preconditioner::Diagonal(d) => {
            if d.len() != p.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "diagonal preconditioner of length {} for an order-{} problem",
                    d.len(),
                    p.dim()
                )));
            }
            if let Some(i) = d.iter().position(|v| *v == 0.0 || !v.is_finite()) {
                return Err(Error::Singular(format!(
                    "diagonal preconditioner entry {i} is {}",
                    d[i]
                )));
            }
            let recip = Vector::from(d.iter().map(|v| 1.0 / v).collect::<Vec<_>>());
            let a = match p.a() {
                Matrix::Sparse(s) => {
                    let mut s = s.clone();
                    s.scale_rows(&recip)?;
                    Matrix::Sparse(s)
                }
                Matrix::Dense(m) => {
                    let mut m = m.clone();
                    for i in 0..m.rows() {
                        for j in 0..m.cols() {
                            m.set(i, j, m.at(i, j) * recip[i]);
                        }
                    }
                    Matrix::Dense(m)
                }
            };
            let mut b = p.b().clone();
            for i in 0..b.len() {
                b[i] *= recip[i];
            }
            rebuild(p, a, b, "diag")
        }
        Preconditioner::Dense(m) => {
            if m.rows() != p.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "order-{} preconditioner for an order-{} problem",
                    m.rows(),
                    p.dim()
                )));
            }
            let lu = LuSolver::new(m)?;
            let dense_a = p.a().to_dense();
            let mut cols = Vec::with_capacity(p.dim());
            for j in 0..p.dim() {
                cols.push(lu.solve(&dense_a.column(j))?);
            }
            let a = Matrix::Dense(DenseMatrix::from_columns(&cols)?);
            let b = lu.solve(p.b())?;
            rebuild(p, a, b, "dense")
        }
    }
}

fn rebuild(p: &Problem, a: Matrix, b: Vector, tag: &str) -> Result<Problem> {
    let class = if verify_class(&a, p.symmetry_class()).is_ok() {
        p.symmetry_class()
    } else {
        SymmetryClass::General
    };
    let label = format!("{}|{}-precond", p.label(), tag);
    let built = Problem::new(a, b, class, label)?;
    match p.x_star() {
        Some(xs) => built.with_solution(xs.clone()),
        None => Ok(built),
    }
}
