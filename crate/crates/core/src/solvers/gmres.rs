use super::{
    IterationRecord, IterationTrace, SolveConfig, StepOutcome, TerminationReason, TraceBuilder,
};
use crate::linalg::Vector;
use crate::problems::Problem;
use crate::{Error, Result};

/// Relative size of the next Arnoldi vector (against `‖A v_j‖`) under
/// which the basis is considered exhausted.
const BREAKDOWN_REL: f64 = 1e-14;

/// GMRES with a modified Gram-Schmidt Arnoldi process and Givens-rotation
/// updates of the Hessenberg least-squares problem.
///
/// The small least-squares problem is solved at *every* iteration, so the
/// trace carries the intermediate iterates `x_k = x_0 + V_k y_k` and their
/// explicitly recomputed residuals `A x_k - b`, not just the final answer.
/// (The `residual_mode` knob is ignored here: GMRES residuals are always
/// explicit.) A vanishing new basis vector is the classical happy
/// breakdown: the Krylov space is invariant and the current iterate is
/// exact up to rounding, so the trace ends with
/// [`TerminationReason::Breakdown`] unless the tolerance test already
/// fired. Stagnation detection does not apply to GMRES, whose residual
/// norms cannot increase.
pub fn gmres(p: &Problem, x0: &Vector, cfg: &SolveConfig) -> Result<IterationTrace> {
    let (mut tb, r0) = TraceBuilder::start("gmres", p, cfg, x0.clone(), false)?;
    if tb.solved_at_start() {
        return Ok(tb.finish(TerminationReason::Tolerance));
    }

    // Arnoldi runs on the classical residual b - A x₀ = -r₀.
    let beta = tb.r0_norm();
    let mut basis: Vec<Vector> = vec![r0.scaled(-1.0 / beta)];
    // Upper-triangular factor of the Hessenberg matrix, stored by column,
    // along with the Givens rotations producing it and the rotated
    // right-hand side g.
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut rot_c: Vec<f64> = Vec::new();
    let mut rot_s: Vec<f64> = Vec::new();
    let mut g: Vec<f64> = vec![beta];

    loop {
        let j = r_cols.len() + 1; // building column j (1-based)
        let w_raw = p.a().matvec(&basis[j - 1]);
        let w_scale = w_raw.norm();

        // Modified Gram-Schmidt with a fixed second pass; the corrections
        // from both passes accumulate into the Hessenberg column.
        let mut w = w_raw;
        let mut h = vec![0.0; j + 1];
        for _pass in 0..2 {
            for (i, vi) in basis.iter().enumerate() {
                let c = w.dot(vi);
                if c != 0.0 {
                    w.axpy(-c, vi);
                }
                h[i] += c;
            }
        }
        let h_next = w.norm();
        h[j] = h_next;
        let breakdown = h_next <= BREAKDOWN_REL * w_scale;

        // Fold the new column into the triangular factor.
        let mut col = h;
        for i in 0..rot_c.len() {
            let (a, b) = (col[i], col[i + 1]);
            col[i] = rot_c[i] * a + rot_s[i] * b;
            col[i + 1] = -rot_s[i] * a + rot_c[i] * b;
        }
        let (c, s) = givens(col[j - 1], col[j]);
        col[j - 1] = c * col[j - 1] + s * col[j];
        col[j] = 0.0;
        rot_c.push(c);
        rot_s.push(s);
        r_cols.push(col[..j].to_vec());
        let gj = g[j - 1];
        g[j - 1] = c * gj;
        g.push(-s * gj);

        // Solve the j×j triangular system for the current minimizer.
        let y = back_substitute(&r_cols, &g[..j]).ok_or_else(|| Error::SolverAbort {
            solver: "gmres".into(),
            iteration: j,
            message: "triangular factor of the Hessenberg system is singular".into(),
        })?;

        let mut x = x0.clone();
        for (yi, vi) in y.iter().zip(&basis) {
            x.axpy(*yi, vi);
        }
        let r = p.residual(&x);
        let res_norm = r.norm();
        let outcome = tb.push_and_assess(IterationRecord {
            x,
            r,
            res_norm,
            coeffs: None,
            lstsq_rank: None,
            min_norm_applied: false,
        })?;

        match outcome {
            StepOutcome::Stop(TerminationReason::Tolerance) => {
                return Ok(tb.finish(TerminationReason::Tolerance));
            }
            _ if breakdown => return Ok(tb.finish(TerminationReason::Breakdown)),
            StepOutcome::Stop(reason) => return Ok(tb.finish(reason)),
            StepOutcome::Continue => {
                basis.push(w.scaled(1.0 / h_next));
            }
        }
    }
}

/// Rotation `(c, s)` with `c·a + s·b = hypot(a, b)` and `-s·a + c·b = 0`.
fn givens(a: f64, b: f64) -> (f64, f64) {
    let r = a.hypot(b);
    if r == 0.0 {
        (1.0, 0.0)
    } else {
        (a / r, b / r)
    }
}

/// Solves `R y = g` for the column-stored upper-triangular `R`.
fn back_substitute(r_cols: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let k = g.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for (jj, yj) in y.iter().enumerate().take(k).skip(i + 1) {
            acc -= r_cols[jj][i] * yj;
        }
        let d = r_cols[i][i];
        if d == 0.0 {
            return None;
        }
        y[i] = acc / d;
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::super::{SolveConfig, TerminationReason};
    use super::*;
    use crate::linalg::{DenseMatrix, Matrix};
    use crate::problems::{build_identity, Problem, SymmetryClass};

    fn diag_problem() -> Problem {
        let a = Matrix::from(DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap());
        Problem::new(a, Vector::from(vec![1.0, 2.0]), SymmetryClass::Symmetric, "diag")
            .unwrap()
            .with_solution(Vector::ones(2))
            .unwrap()
    }

    #[test]
    fn identity_solves_in_one_step() {
        let p = build_identity(4).unwrap();
        let t = gmres(&p, &Vector::zeros(4), &SolveConfig::default()).unwrap();
        assert_eq!(t.iterations(), 1);
        assert_eq!(t.termination, TerminationReason::Tolerance);
        assert!(t.final_res_norm() <= 1e-14);
    }

    #[test]
    fn two_distinct_eigenvalues_need_two_steps() {
        let p = diag_problem();
        let t = gmres(&p, &Vector::zeros(2), &SolveConfig::default()).unwrap();
        assert_eq!(t.iterations(), 2);
        let x = t.final_x();
        assert!((x[0] - 1.0).abs() <= 1e-12 && (x[1] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn solved_start_returns_immediately() {
        let p = diag_problem();
        let t = gmres(&p, &Vector::ones(2), &SolveConfig::default()).unwrap();
        assert_eq!(t.iterations(), 0);
        assert_eq!(t.termination, TerminationReason::Tolerance);
    }

    #[test]
    fn residual_norms_never_increase() {
        let p = crate::problems::random_problem(12, SymmetryClass::General, 5).unwrap();
        let cfg = SolveConfig { max_iter: 12, tol: 1e-13, ..Default::default() };
        let t = gmres(&p, &crate::problems::seeded_x0(12, 1), &cfg).unwrap();
        assert!(t.is_monotone(1e-12));
        t.verify_recorded_residuals(&p, 1e-12).unwrap();
    }
}
