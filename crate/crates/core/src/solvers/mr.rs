use super::{
    IterationRecord, IterationTrace, ResidualMode, SolveConfig, StepOutcome, TerminationReason,
    TraceBuilder,
};
use crate::linalg::Vector;
use crate::problems::Problem;
use crate::Result;

/// The one-dimensional minimal-residual iteration.
///
/// Each step minimizes `‖r(x_k - α r_k)‖₂` over the line through `r_k`:
///
/// ```text
/// α_k = r_kᵀ A r_k / ‖A r_k‖²,   x_{k+1} = x_k - α_k r_k
/// ```
///
/// This is the zero-history member of the windowed family: the recorded
/// coefficient is `β₀ = α_k - 1`, the weight the equivalent one-column
/// window solve would produce, so polynomial tracking treats MR and
/// window-0 traces identically.
///
/// `A r_k = 0` with a nonzero residual stops the trace with
/// [`TerminationReason::Breakdown`]; on skew-symmetric matrices
/// `r_kᵀ A r_k` vanishes and the iteration stalls in place until the
/// stagnation detector ends it.
pub fn mr_iteration(p: &Problem, x0: &Vector, cfg: &SolveConfig) -> Result<IterationTrace> {
    let (mut tb, _r0) = TraceBuilder::start("mr", p, cfg, x0.clone(), true)?;
    if tb.solved_at_start() {
        return Ok(tb.finish(TerminationReason::Tolerance));
    }

    loop {
        let x_k = tb.last().x.clone();
        let r_k = tb.last().r.clone();
        let ar = p.a().matvec(&r_k);
        let denom = ar.dot(&ar);
        if denom == 0.0 {
            // r_k ≠ 0 here, so A maps a nonzero vector to zero.
            return Ok(tb.finish(TerminationReason::Breakdown));
        }
        let alpha = r_k.dot(&ar) / denom;

        let mut x = x_k;
        x.axpy(-alpha, &r_k);
        let r = match cfg.residual_mode {
            ResidualMode::Explicit => p.residual(&x),
            ResidualMode::Recursive => {
                let mut r = r_k.clone();
                r.axpy(-alpha, &ar);
                r
            }
        };
        let res_norm = r.norm();
        let outcome = tb.push_and_assess(IterationRecord {
            x,
            r,
            res_norm,
            coeffs: Some(vec![alpha - 1.0]),
            lstsq_rank: None,
            min_norm_applied: false,
        })?;
        if let StepOutcome::Stop(reason) = outcome {
            return Ok(tb.finish(reason));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{ngmres, Window};
    use super::*;
    use crate::linalg::{DenseMatrix, Matrix};
    use crate::problems::{random_problem, seeded_x0, Problem, SymmetryClass};

    fn cfg(max_iter: usize) -> SolveConfig {
        SolveConfig { max_iter, tol: 1e-13, ..Default::default() }
    }

    #[test]
    fn first_step_matches_hand_computation() {
        // A = diag(1, 2), b = (1, 2), x₀ = 0: α₀ = 9/17 (see the window-0
        // solver test, which shares this system).
        let a = Matrix::from(DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap());
        let p = Problem::new(a, Vector::from(vec![1.0, 2.0]), SymmetryClass::Symmetric, "diag")
            .unwrap();
        let t = mr_iteration(&p, &Vector::zeros(2), &cfg(1)).unwrap();
        let rec = &t.records[1];
        let alpha = 9.0 / 17.0;
        assert!((rec.coeffs.as_ref().unwrap()[0] - (alpha - 1.0)).abs() <= 1e-15);
        assert!((rec.x[0] - alpha).abs() <= 1e-15);
        assert!((rec.x[1] - 2.0 * alpha).abs() <= 1e-15);
    }

    #[test]
    fn agrees_with_window_zero_solver() {
        let p = random_problem(9, SymmetryClass::General, 17).unwrap();
        let x0 = seeded_x0(9, 6);
        let mr = mr_iteration(&p, &x0, &cfg(15)).unwrap();
        let ng0 = ngmres(&p, &x0, Window::Size(0), &cfg(15)).unwrap();
        let n = mr.records.len().min(ng0.records.len());
        let scale = mr.initial_res_norm();
        for k in 0..n {
            let dx = mr.records[k].x.sub(&ng0.records[k].x).norm();
            assert!(dx <= 1e-10 * scale, "iterate gap {dx:.3e} at step {k}");
        }
    }

    #[test]
    fn stalls_on_skew_symmetric_matrices() {
        // r₀ᵀ A r₀ = 0 for skew A, so α = 0 and nothing moves; the
        // stagnation detector should end the trace.
        let p = random_problem(8, SymmetryClass::SkewSymmetric, 2).unwrap();
        let t = mr_iteration(&p, &seeded_x0(8, 7), &cfg(30)).unwrap();
        assert_eq!(t.termination, TerminationReason::Stagnation);
        assert!(t.iterations() <= 4);
        let norms = t.res_norms();
        assert!((norms[0] - norms[t.iterations()]).abs() <= 1e-14 * norms[0]);
    }

    #[test]
    fn monotone_on_general_problems() {
        let p = random_problem(11, SymmetryClass::General, 29).unwrap();
        let t = mr_iteration(&p, &seeded_x0(11, 8), &cfg(25)).unwrap();
        assert!(t.is_monotone(1e-12));
    }
}
