use std::collections::VecDeque;

use super::{
    FixedPointMap, IterationRecord, IterationTrace, LstsqMethod, ResidualMode, SolveConfig,
    StepOutcome, TerminationReason, TraceBuilder, Window,
};
use crate::linalg::{min_norm_lstsq, normal_equations_lstsq, DenseMatrix, Vector};
use crate::problems::Problem;
use crate::Result;

/// Anderson acceleration of the fixed-point map `q(x) = x - r(x)`.
///
/// With `m_k = min(k, m)` history terms the update is
///
/// ```text
/// x_{k+1} = q(x_k) + Σᵢ γᵢ (q(x_k) - q(x_{k-i})),    i = 1, …, m_k
/// ```
///
/// where `γ` minimizes `‖r_k + R_k γ‖₂` over the residual differences
/// `R_k = [r_k - r_{k-1}, …, r_k - r_{k-m_k}]`. At `k = 0` (or `m = 0`)
/// the update degenerates to the plain fixed-point step `x₁ = q(x₀)`.
///
/// In [`ResidualMode::Recursive`] the next residual is obtained as
/// `r_{k+1} = M (r_k + R_k γ)` — the image under the fixed-point map's
/// linear part of the very vector the least-squares problem minimized,
/// which is what makes `M⁻¹ r_{k+1}` orthogonal to the columns of `R_k`.
///
/// Unlike the NGMRES family, Anderson residual norms may grow; the
/// non-finite guard aborts the solve if the iteration diverges past
/// floating-point range.
pub fn anderson(p: &Problem, x0: &Vector, window: Window, cfg: &SolveConfig) -> Result<IterationTrace> {
    let (mut tb, r0) =
        TraceBuilder::start(format!("anderson({window})"), p, cfg, x0.clone(), true)?;
    if tb.solved_at_start() {
        return Ok(tb.finish(TerminationReason::Tolerance));
    }
    let map = FixedPointMap::new(p);
    let n = p.dim();
    let mut xs: VecDeque<Vector> = VecDeque::from([x0.clone()]);
    let mut rs: VecDeque<Vector> = VecDeque::from([r0]);

    loop {
        let depth = rs.len() - 1;
        let x_k = &xs[0];
        let r_k = &rs[0];
        let q_k = x_k.sub(r_k);

        let (x, combined, gamma, rank, min_norm) = if depth == 0 {
            // Plain fixed-point step; the minimized combination is r_k itself.
            (q_k.clone(), r_k.clone(), Vec::new(), None, false)
        } else {
            let r_mat =
                DenseMatrix::from_fn(n, depth, |row, i| r_k[row] - rs[i + 1][row]);
            let f = r_k.scaled(-1.0);
            let sol = match cfg.lstsq_method {
                LstsqMethod::Svd => min_norm_lstsq(&r_mat, &f, cfg.rank_tol)?,
                LstsqMethod::NormalEquations => {
                    normal_equations_lstsq(&r_mat, &f, cfg.rank_tol)?
                }
            };
            let gamma = sol.coefficients.as_slice().to_vec();
            let mut x = q_k.clone();
            let mut combined = r_k.clone();
            for (i, gi) in gamma.iter().enumerate() {
                let q_back = xs[i + 1].sub(&rs[i + 1]);
                x.axpy(*gi, &q_k.sub(&q_back));
                combined.axpy(*gi, &r_k.sub(&rs[i + 1]));
            }
            (x, combined, gamma, Some(sol.numerical_rank), sol.min_norm_applied)
        };

        let r = match cfg.residual_mode {
            ResidualMode::Explicit => p.residual(&x),
            ResidualMode::Recursive => map.apply_linear(&combined),
        };
        let res_norm = r.norm();
        let outcome = tb.push_and_assess(IterationRecord {
            x: x.clone(),
            r: r.clone(),
            res_norm,
            coeffs: Some(gamma),
            lstsq_rank: rank,
            min_norm_applied: min_norm,
        })?;
        match outcome {
            StepOutcome::Stop(reason) => return Ok(tb.finish(reason)),
            StepOutcome::Continue => {
                xs.push_front(x);
                rs.push_front(r);
                if let Window::Size(m) = window {
                    while xs.len() > m + 1 {
                        xs.pop_back();
                        rs.pop_back();
                    }
                }
            }
        }
    }
}
