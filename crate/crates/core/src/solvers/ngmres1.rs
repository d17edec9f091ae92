use super::{
    IterationRecord, IterationTrace, ResidualMode, SolveConfig, StepOutcome, TerminationReason,
    TraceBuilder,
};
use crate::linalg::{min_norm_lstsq, DenseMatrix, Vector};
use crate::problems::Problem;
use crate::Result;

/// Window-1 acceleration in three-term recurrence form.
///
/// Instead of assembling the `n × 2` least-squares matrix each step, this
/// variant forms the 2×2 normal equations directly from inner products of
/// `w₁ = A r_k` and `w₂ = A r_k + r_{k-1} - r_k` and updates
///
/// ```text
/// x_{k+1} = x_k - (1 + β₀ + β₁) r_k + β₁ (x_k - x_{k-1})
/// ```
///
/// which needs only the previous iterate — no window storage at all. The
/// first step, with no history, is the minimal-residual step. When the
/// 2×2 system is numerically singular (relative determinant at or below
/// `rank_tol²`) the step falls back to the rank-revealing minimum-norm
/// solve and the record's `min_norm_applied` flag is set.
///
/// On well-conditioned systems the trace matches the window-1 solver to
/// machine precision; the normal equations square the conditioning of the
/// underlying least-squares problem, so on badly conditioned systems the
/// two drift apart measurably.
pub fn ngmres1_three_term(p: &Problem, x0: &Vector, cfg: &SolveConfig) -> Result<IterationTrace> {
    let (mut tb, r0) = TraceBuilder::start("ngmres1-recurrence", p, cfg, x0.clone(), true)?;
    if tb.solved_at_start() {
        return Ok(tb.finish(TerminationReason::Tolerance));
    }

    // First step: minimal residual along r₀.
    let ar = p.a().matvec(&r0);
    let denom = ar.dot(&ar);
    if denom == 0.0 {
        return Ok(tb.finish(TerminationReason::Breakdown));
    }
    let alpha = r0.dot(&ar) / denom;
    let mut x_prev = x0.clone();
    let mut r_prev = r0.clone();
    let mut x = x0.clone();
    x.axpy(-alpha, &r0);
    let r = match cfg.residual_mode {
        ResidualMode::Explicit => p.residual(&x),
        ResidualMode::Recursive => {
            let mut r = r0.clone();
            r.axpy(-alpha, &ar);
            r
        }
    };
    let res_norm = r.norm();
    let outcome = tb.push_and_assess(IterationRecord {
        x: x.clone(),
        r: r.clone(),
        res_norm,
        coeffs: Some(vec![alpha - 1.0]),
        lstsq_rank: None,
        min_norm_applied: false,
    })?;
    if let StepOutcome::Stop(reason) = outcome {
        return Ok(tb.finish(reason));
    }
    let mut x_k = x;
    let mut r_k = r;

    loop {
        let ar = p.a().matvec(&r_k);
        let mr = r_k.sub(&ar);
        let w2 = {
            let mut w2 = ar.clone();
            w2.axpy(1.0, &r_prev);
            w2.axpy(-1.0, &r_k);
            w2
        };
        let c11 = ar.dot(&ar);
        if c11 == 0.0 {
            return Ok(tb.finish(TerminationReason::Breakdown));
        }
        let c12 = ar.dot(&w2);
        let c22 = w2.dot(&w2);
        let f1 = ar.dot(&mr);
        let f2 = w2.dot(&mr);
        let det = c11 * c22 - c12 * c12;

        let (beta0, beta1, rank, min_norm) =
            if det > cfg.rank_tol * cfg.rank_tol * c11 * c22 {
                ((c22 * f1 - c12 * f2) / det, (c11 * f2 - c12 * f1) / det, 2, false)
            } else {
                // Numerically singular 2×2 system: solve the underlying
                // least-squares problem rank-revealingly instead.
                let w = DenseMatrix::from_columns(&[ar.clone(), w2.clone()])?;
                let sol = min_norm_lstsq(&w, &mr, cfg.rank_tol)?;
                let b = sol.coefficients;
                (b[0], b[1], sol.numerical_rank, true)
            };

        let mut x = x_k.clone();
        x.axpy(-(1.0 + beta0 + beta1), &r_k);
        x.axpy(beta1, &x_k.sub(&x_prev));
        let r = match cfg.residual_mode {
            ResidualMode::Explicit => p.residual(&x),
            ResidualMode::Recursive => {
                let mut r = mr.scaled(1.0 + beta0 + beta1);
                r.axpy(-beta0, &r_k);
                r.axpy(-beta1, &r_prev);
                r
            }
        };
        let res_norm = r.norm();
        let outcome = tb.push_and_assess(IterationRecord {
            x: x.clone(),
            r: r.clone(),
            res_norm,
            coeffs: Some(vec![beta0, beta1]),
            lstsq_rank: Some(rank),
            min_norm_applied: min_norm,
        })?;
        match outcome {
            StepOutcome::Stop(reason) => return Ok(tb.finish(reason)),
            StepOutcome::Continue => {
                x_prev = std::mem::replace(&mut x_k, x);
                r_prev = std::mem::replace(&mut r_k, r);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{ngmres, Window};
    use super::*;
    use crate::problems::{
        build_convection_diffusion, random_problem, seeded_x0, SymmetryClass,
    };

    fn cfg(max_iter: usize) -> SolveConfig {
        SolveConfig { max_iter, tol: 1e-13, ..Default::default() }
    }

    #[test]
    fn matches_window_one_solver_on_well_conditioned_problems() {
        // Scaled SPD stencil: eigenvalues in (0, 2), condition number
        // modest, so normal equations and SVD agree to machine precision.
        let base = build_convection_diffusion(6, 0.0, 0.0).unwrap();
        let h = 1.0 / 7.0;
        let scaled = crate::linalg::Matrix::from(base.a().to_dense().scaled(h * h / 4.0));
        let b = scaled.matvec(&Vector::ones(36));
        let p = crate::problems::Problem::new(scaled, b, SymmetryClass::Symmetric, "scaled")
            .unwrap();
        let x0 = seeded_x0(36, 12);
        let three_term = ngmres1_three_term(&p, &x0, &cfg(20)).unwrap();
        let windowed = ngmres(&p, &x0, Window::Size(1), &cfg(20)).unwrap();
        let n = three_term.records.len().min(windowed.records.len());
        let scale = three_term.initial_res_norm();
        for k in 0..n {
            let dx = three_term.records[k].x.sub(&windowed.records[k].x).norm();
            let dr = three_term.records[k].r.sub(&windowed.records[k].r).norm();
            assert!(dx <= 1e-12 * scale, "iterate gap {dx:.3e} at step {k}");
            assert!(dr <= 1e-12 * scale, "residual gap {dr:.3e} at step {k}");
        }
    }

    #[test]
    fn coefficients_match_window_one_records() {
        let p = crate::problems::random_positive_real(10, 41, 0.4).unwrap();
        let x0 = seeded_x0(10, 13);
        let three_term = ngmres1_three_term(&p, &x0, &cfg(8)).unwrap();
        let windowed = ngmres(&p, &x0, Window::Size(1), &cfg(8)).unwrap();
        let n = three_term.records.len().min(windowed.records.len());
        for k in 1..n {
            let a = three_term.records[k].coeffs.as_ref().unwrap();
            let b = windowed.records[k].coeffs.as_ref().unwrap();
            assert_eq!(a.len(), b.len(), "coefficient count at step {k}");
            // The normal equations square the least-squares conditioning,
            // so only modest agreement is guaranteed in general.
            for (ai, bi) in a.iter().zip(b) {
                assert!((ai - bi).abs() <= 1e-6 * (1.0 + bi.abs()), "{ai} vs {bi} at step {k}");
            }
        }
    }

    #[test]
    fn singular_system_falls_back_to_min_norm() {
        // On a skew-symmetric system the first MR step does not move, so
        // r_k = r_{k-1} makes w₂ = w₁ and the 2×2 system singular.
        let p = random_problem(8, SymmetryClass::SkewSymmetric, 14).unwrap();
        let t = ngmres1_three_term(&p, &seeded_x0(8, 9), &cfg(10)).unwrap();
        let flagged = t.records.iter().any(|rec| rec.min_norm_applied);
        assert!(flagged, "expected at least one min-norm fallback record");
    }
}
