use super::{DenseMatrix, SparseMatrix, Vector};

/// A square or rectangular matrix in either storage format.
///
/// Solvers only ever touch matrices through this enum, so a problem can
/// carry a 5-point stencil as CSR and a small dense example interchangeably.
#[derive(Clone, Debug, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl Matrix {
    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.rows(),
            Matrix::Sparse(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.cols(),
            Matrix::Sparse(m) => m.cols(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn matvec(&self, v: &Vector) -> Vector {
        match self {
            Matrix::Dense(m) => m.matvec(v),
            Matrix::Sparse(m) => m.matvec(v),
        }
    }

    pub fn matvec_transpose(&self, v: &Vector) -> Vector {
        match self {
            Matrix::Dense(m) => m.matvec_transpose(v),
            Matrix::Sparse(m) => m.matvec_transpose(v),
        }
    }

    /// A dense copy; cheap for already-dense matrices, an expansion for CSR.
    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Sparse(m) => m.to_dense(),
        }
    }

    /// A copy with every entry multiplied by `a`, keeping the storage format.
    pub fn scaled(&self, a: f64) -> Matrix {
        match self {
            Matrix::Dense(m) => Matrix::Dense(m.scaled(a)),
            Matrix::Sparse(m) => Matrix::Sparse(m.scaled(a)),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Matrix::Dense(m) => m.max_abs(),
            Matrix::Sparse(m) => m.values().iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }

    /// Nonzero entries as `(row, col, value)` triplets in row-major order;
    /// explicitly stored zeros in sparse storage are skipped.
    pub fn nonzero_triplets(&self) -> Vec<(usize, usize, f64)> {
        match self {
            Matrix::Dense(m) => {
                let mut out = Vec::new();
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        if m.at(i, j) != 0.0 {
                            out.push((i, j, m.at(i, j)));
                        }
                    }
                }
                out
            }
            Matrix::Sparse(m) => m.triplets().filter(|&(_, _, v)| v != 0.0).collect(),
        }
    }
}

impl From<DenseMatrix> for Matrix {
    fn from(m: DenseMatrix) -> Self {
        Matrix::Dense(m)
    }
}

impl From<SparseMatrix> for Matrix {
    fn from(m: SparseMatrix) -> Self {
        Matrix::Sparse(m)
    }
}
