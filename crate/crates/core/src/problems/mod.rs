//! Test systems `A x = b` with a verified structural tag.
//!
//! Every [`Problem`] carries a [`SymmetryClass`] that is checked against
//! the matrix at construction time, so downstream code (solver
//! preconditions, bound hypotheses) can branch on the tag without
//! re-deriving structure from the entries.

mod generators;
mod matrix_market;

pub use generators::{
    build_convection_diffusion, build_cyclic_shift, build_identity, random_positive_real,
    random_problem, seeded_x0, to_shifted_skew,
};
pub use matrix_market::{
    read_matrix, read_matrix_market, read_vector_market, write_matrix_market, write_vector_market,
};

use crate::linalg::{Matrix, Vector};
use crate::{Error, Result};

/// Relative tolerance (max-abs norm) for symmetry-class verification.
const CLASS_TOL: f64 = 1e-12;

/// Structural classification of the system matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryClass {
    /// No structure asserted.
    General,
    /// `A = Aᵀ`.
    Symmetric,
    /// `A = αI + S` with `Sᵀ = -S`; `α` is recoverable as `trace(A)/n`.
    ShiftedSkewSymmetric,
    /// `Aᵀ = -A`.
    SkewSymmetric,
}

impl SymmetryClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SymmetryClass::General => "general",
            SymmetryClass::Symmetric => "symmetric",
            SymmetryClass::ShiftedSkewSymmetric => "shifted-skew-symmetric",
            SymmetryClass::SkewSymmetric => "skew-symmetric",
        }
    }
}

impl std::str::FromStr for SymmetryClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(SymmetryClass::General),
            "symmetric" => Ok(SymmetryClass::Symmetric),
            "shifted-skew-symmetric" | "shifted_skew_symmetric" => {
                Ok(SymmetryClass::ShiftedSkewSymmetric)
            }
            "skew-symmetric" | "skew_symmetric" => Ok(SymmetryClass::SkewSymmetric),
            other => Err(Error::InvalidArgument(format!("unknown symmetry class '{other}'"))),
        }
    }
}

/// A linear system together with its verified class, a display label and,
/// when known, the exact solution.
#[derive(Clone, Debug)]
pub struct Problem {
    a: Matrix,
    b: Vector,
    symmetry_class: SymmetryClass,
    label: String,
    x_star: Option<Vector>,
}

impl Problem {
    /// Builds a problem, verifying shapes, finiteness of `b` and the
    /// declared symmetry class.
    pub fn new(
        a: Matrix,
        b: Vector,
        symmetry_class: SymmetryClass,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "system matrix is {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if a.rows() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix of order {} with right-hand side of length {}",
                a.rows(),
                b.len()
            )));
        }
        if !b.is_finite() {
            return Err(Error::NonFinite("right-hand side".into()));
        }
        verify_class(&a, symmetry_class)?;
        Ok(Self { a, b, symmetry_class, label: label.into(), x_star: None })
    }

    /// Attaches a known exact solution (used by tests and reports; never
    /// consulted by the solvers themselves).
    pub fn with_solution(mut self, x_star: Vector) -> Result<Self> {
        if x_star.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "solution of length {} for an order-{} system",
                x_star.len(),
                self.dim()
            )));
        }
        self.x_star = Some(x_star);
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn symmetry_class(&self) -> SymmetryClass {
        self.symmetry_class
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn x_star(&self) -> Option<&Vector> {
        self.x_star.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// The residual `r(x) = A x - b`.
    pub fn residual(&self, x: &Vector) -> Vector {
        self.a.matvec(x).sub(&self.b)
    }

    /// The shift `α = trace(A)/n`; meaningful for the shifted
    /// skew-symmetric class, where `A - αI` is skew.
    pub fn shift(&self) -> f64 {
        let d = self.a.to_dense();
        let n = self.dim();
        (0..n).map(|i| d.at(i, i)).sum::<f64>() / n as f64
    }
}

/// Checks a matrix against a symmetry class at relative tolerance `1e-12`.
pub fn verify_class(a: &Matrix, class: SymmetryClass) -> Result<()> {
    if class == SymmetryClass::General {
        return Ok(());
    }
    let d = a.to_dense();
    let scale = d.max_abs();
    if scale == 0.0 {
        // The zero matrix belongs to every class.
        return Ok(());
    }
    let n = d.rows();
    let deviation = match class {
        SymmetryClass::General => unreachable!(),
        SymmetryClass::Symmetric => d.sub(&d.transpose()).max_abs(),
        SymmetryClass::SkewSymmetric => d.add(&d.transpose()).max_abs(),
        SymmetryClass::ShiftedSkewSymmetric => {
            let alpha = (0..n).map(|i| d.at(i, i)).sum::<f64>() / n as f64;
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let shift = if i == j { 2.0 * alpha } else { 0.0 };
                    worst = worst.max((d.at(i, j) + d.at(j, i) - shift).abs());
                }
            }
            worst
        }
    };
    if deviation > CLASS_TOL * scale {
        return Err(Error::SymmetryViolation(format!(
            "matrix deviates from class {} by {deviation:.3e} against scale {scale:.3e}",
            class.as_str()
        )));
    }
    Ok(())
}
