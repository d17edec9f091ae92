use super::{
    FixedPointMap, IterationRecord, IterationTrace, LstsqMethod, ResidualMode, SolveConfig,
    StepOutcome, TraceBuilder, Window, WindowState,
};
use super::TerminationReason;
use crate::linalg::{
    min_norm_lstsq, normal_equations_lstsq, DenseMatrix, LeastSquaresSolution, Vector,
};
use crate::problems::Problem;
use crate::Result;

/// Windowed nonlinear GMRES applied to the linear fixed-point map
/// `q(x) = x - r(x)`.
///
/// Each iteration forms the difference matrix `W_k` whose columns are
/// `r_{k-i} - M r_k` for the `min(k, m) + 1` most recent residuals, solves
/// `min ‖M r_k - W_k β‖₂` for the acceleration coefficients, and updates
///
/// ```text
/// x_{k+1} = q(x_k) + Σᵢ βᵢ (q(x_k) - x_{k-i})
/// ```
///
/// With `Window::Full` no history is discarded and the iteration
/// reproduces GMRES residuals for as long as those decrease strictly.
/// Rank-deficient windows are handled by the minimum-norm solution and
/// flagged in the trace records.
///
/// Since `β = 0` always competes in the least-squares problem, the exact
/// minimizer can never increase the residual norm. When the computed step
/// does anyway — which only happens once the window has degenerated into
/// near-parallel columns on a stagnating run — the step is re-solved over
/// the minimal-residual column alone, keeping the recorded trace monotone
/// up to rounding instead of letting inner-solve noise leak into it.
///
/// Residuals are recomputed from `x_{k+1}` by default; in
/// [`ResidualMode::Recursive`] they follow the recurrence
/// `r_{k+1} = (1 + Σβᵢ) M r_k - Σᵢ βᵢ r_{k-i}`.
pub fn ngmres(p: &Problem, x0: &Vector, window: Window, cfg: &SolveConfig) -> Result<IterationTrace> {
    let (mut tb, r0) = TraceBuilder::start(format!("ngmres({window})"), p, cfg, x0.clone(), true)?;
    if tb.solved_at_start() {
        return Ok(tb.finish(TerminationReason::Tolerance));
    }
    let map = FixedPointMap::new(p);
    let mr0 = map.apply_linear(&r0);
    let mut win = WindowState::new(window, x0.clone(), r0, mr0);

    loop {
        let w = win.assemble_difference_matrix();
        let mut sol = solve_window(&w, win.mr_head(), cfg)?;
        let mut beta = sol.coefficients.as_slice().to_vec();
        let (mut x, mut r, mut res_norm) = form_step(&win, p, cfg, &beta);
        if res_norm > win.head_r().norm() && win.depth() > 0 {
            let w0 = DenseMatrix::from_columns(&[win.head_r().sub(win.mr_head())])?;
            sol = solve_window(&w0, win.mr_head(), cfg)?;
            beta = sol.coefficients.as_slice().to_vec();
            (x, r, res_norm) = form_step(&win, p, cfg, &beta);
        }
        let outcome = tb.push_and_assess(IterationRecord {
            x: x.clone(),
            r: r.clone(),
            res_norm,
            coeffs: Some(beta),
            lstsq_rank: Some(sol.numerical_rank),
            min_norm_applied: sol.min_norm_applied,
        })?;
        match outcome {
            StepOutcome::Stop(reason) => return Ok(tb.finish(reason)),
            StepOutcome::Continue => {
                let mr = map.apply_linear(&r);
                win.advance(x, r, mr);
            }
        }
    }
}

fn solve_window(
    w: &DenseMatrix,
    f: &Vector,
    cfg: &SolveConfig,
) -> Result<LeastSquaresSolution> {
    match cfg.lstsq_method {
        LstsqMethod::Svd => min_norm_lstsq(w, f, cfg.rank_tol),
        LstsqMethod::NormalEquations => normal_equations_lstsq(w, f, cfg.rank_tol),
    }
}

/// Builds `x_{k+1}` and its residual from the acceleration coefficients.
fn form_step(
    win: &WindowState,
    p: &Problem,
    cfg: &SolveConfig,
    beta: &[f64],
) -> (Vector, Vector, f64) {
    let q_k = win.head_x().sub(win.head_r());
    let mut x = q_k.clone();
    for (i, bi) in beta.iter().enumerate() {
        x.axpy(*bi, &q_k.sub(win.x_back(i)));
    }
    let r = match cfg.residual_mode {
        ResidualMode::Explicit => p.residual(&x),
        ResidualMode::Recursive => {
            let beta_sum: f64 = beta.iter().sum();
            let mut r = win.mr_head().scaled(1.0 + beta_sum);
            for (i, bi) in beta.iter().enumerate() {
                r.axpy(-bi, win.r_back(i));
            }
            r
        }
    };
    let res_norm = r.norm();
    (x, r, res_norm)
}
