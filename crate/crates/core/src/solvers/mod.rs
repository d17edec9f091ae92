//! The solver family: GMRES, windowed/full NGMRES, Anderson acceleration,
//! the minimal-residual iteration, a three-term NGMRES(1) recurrence and
//! conjugate residuals.
//!
//! All solvers share the residual convention `r(x) = A x - b` and the
//! associated fixed-point map `q(x) = x - r(x)`, and they all record every
//! iterate, residual vector and inner-solve outcome in an
//! [`IterationTrace`] so the diagnostics layer can re-derive and verify
//! the algebra afterwards.

mod anderson;
mod cr;
mod gmres;
mod mr;
mod ngmres;
mod ngmres1;
mod precondition;
mod window;

pub use anderson::anderson;
pub use cr::conjugate_residual;
pub use gmres::gmres;
pub use mr::mr_iteration;
pub use ngmres::ngmres;
pub use ngmres1::ngmres1_three_term;
pub use precondition::{left_precondition, Preconditioner};
pub use window::WindowState;

use crate::linalg::{DenseMatrix, Vector};
use crate::problems::Problem;
use crate::{Error, Result};

/// Residual-difference threshold (relative to `‖r₀‖`) under which two
/// consecutive iterations count as stagnant.
pub const STAGNATION_REL: f64 = 1e-14;

/// History depth of a windowed solver: keep the last `m` iterates, or all
/// of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    Size(usize),
    Full,
}

impl Window {
    /// Number of history terms available at iteration `k` (`min(k, m)`).
    pub fn depth_at(self, k: usize) -> usize {
        match self {
            Window::Size(m) => m.min(k),
            Window::Full => k,
        }
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Window::Size(m) => write!(f, "{m}"),
            Window::Full => write!(f, "full"),
        }
    }
}

/// How the windowed solvers solve their small least-squares problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LstsqMethod {
    /// Rank-revealing SVD with minimum-norm handling of rank deficiency.
    #[default]
    Svd,
    /// Textbook normal equations `(WᵀW)β = Wᵀf`; kept as a cross-check,
    /// falls back to the SVD when the Gram matrix is not positive definite.
    NormalEquations,
}

/// How residual vectors entering the trace are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ResidualMode {
    /// Recompute `r = A x - b` from each new iterate (the default).
    #[default]
    Explicit,
    /// Propagate residuals through the method's own recurrence.
    Recursive,
}

/// Knobs shared by every solver.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    /// Maximum number of iterations (trace records beyond the initial one).
    pub max_iter: usize,
    /// Relative stopping tolerance: stop once `‖r_k‖ ≤ tol·‖r₀‖`.
    pub tol: f64,
    /// Rank cutoff for the inner least-squares solves.
    pub rank_tol: f64,
    pub residual_mode: ResidualMode,
    pub lstsq_method: LstsqMethod,
    /// Number of consecutive stagnant steps (see [`STAGNATION_REL`]) after
    /// which the acceleration methods give up; `None` disables the check.
    /// GMRES and CR ignore this knob.
    pub stagnation_window: Option<usize>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-10,
            rank_tol: 1e-12,
            residual_mode: ResidualMode::Explicit,
            lstsq_method: LstsqMethod::Svd,
            stagnation_window: Some(3),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "stopping tolerance must be positive and finite, got {}",
                self.tol
            )));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rank tolerance must be positive and finite, got {}",
                self.rank_tol
            )));
        }
        if self.stagnation_window == Some(0) {
            return Err(Error::InvalidArgument(
                "stagnation window must be at least 1 when enabled".into(),
            ));
        }
        Ok(())
    }
}

/// Why a solve stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminationReason {
    /// `‖r_k‖ ≤ tol·‖r₀‖` was reached.
    Tolerance,
    /// The iteration budget ran out.
    MaxIter,
    /// Residuals stopped moving (acceleration methods only).
    Stagnation,
    /// A method-specific degeneracy: a zero Arnoldi vector, `A r = 0`, or
    /// an indefinite curvature term, depending on the solver.
    Breakdown,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::Tolerance => "tolerance",
            TerminationReason::MaxIter => "max_iter",
            TerminationReason::Stagnation => "stagnation",
            TerminationReason::Breakdown => "breakdown",
        }
    }
}

/// One row of a solve trace. The initial record (`k = 0`) carries the
/// starting guess and its residual and has no coefficients.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub x: Vector,
    pub r: Vector,
    pub res_norm: f64,
    /// Acceleration coefficients (`β` for the NGMRES family, `γ` for
    /// Anderson, step data for MR/CR); `None` for GMRES records.
    pub coeffs: Option<Vec<f64>>,
    /// Numerical rank of the inner least-squares solve, when one ran.
    pub lstsq_rank: Option<usize>,
    /// True when the inner solve fell back to a minimum-norm solution.
    pub min_norm_applied: bool,
}

/// Complete history of a solve: one record per iteration plus the reason
/// the loop ended.
#[derive(Clone, Debug)]
pub struct IterationTrace {
    pub solver: String,
    pub records: Vec<IterationRecord>,
    pub termination: TerminationReason,
}

impl IterationTrace {
    /// Number of iterations performed (excluding the initial record).
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn res_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.res_norm).collect()
    }

    pub fn initial_res_norm(&self) -> f64 {
        self.records[0].res_norm
    }

    pub fn final_res_norm(&self) -> f64 {
        self.records.last().expect("trace has records").res_norm
    }

    pub fn final_x(&self) -> &Vector {
        &self.records.last().expect("trace has records").x
    }

    /// Checks that every recorded residual vector matches `A x - b`
    /// recomputed from its iterate to `rel_tol·‖r₀‖`.
    pub fn verify_recorded_residuals(&self, p: &Problem, rel_tol: f64) -> Result<()> {
        let scale = self.initial_res_norm().max(f64::MIN_POSITIVE);
        for (k, rec) in self.records.iter().enumerate() {
            let drift = p.residual(&rec.x).sub(&rec.r).norm();
            if drift > rel_tol * scale {
                return Err(Error::SolverAbort {
                    solver: self.solver.clone(),
                    iteration: k,
                    message: format!(
                        "recorded residual drifts from A x - b by {:.3e} (allowed {:.3e})",
                        drift,
                        rel_tol * scale
                    ),
                });
            }
        }
        Ok(())
    }

    /// True when residual norms never increase beyond `slack·‖r₀‖`.
    pub fn is_monotone(&self, slack_rel: f64) -> bool {
        let slack = slack_rel * self.initial_res_norm();
        self.records.windows(2).all(|w| w[1].res_norm <= w[0].res_norm + slack)
    }
}

/// The fixed-point map `q(x) = x - r(x) = (I - A) x + b` of a problem.
///
/// Both the map itself and its linear part `M = I - A` are applied
/// matrix-free through the problem's matvec.
pub struct FixedPointMap<'a> {
    problem: &'a Problem,
}

impl<'a> FixedPointMap<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        Self { problem }
    }

    /// `q(x) = x - (A x - b)`.
    pub fn apply(&self, x: &Vector) -> Vector {
        x.sub(&self.problem.residual(x))
    }

    /// The linear part: `M v = v - A v`.
    pub fn apply_linear(&self, v: &Vector) -> Vector {
        v.sub(&self.problem.a().matvec(v))
    }

    /// Dense `M = I - A`, for diagnostics that need the matrix itself.
    pub fn linear_part_dense(&self) -> DenseMatrix {
        let n = self.problem.dim();
        DenseMatrix::identity(n).sub(&self.problem.a().to_dense())
    }
}

/// Outcome of pushing one record: keep iterating or stop for a reason.
pub(crate) enum StepOutcome {
    Continue,
    Stop(TerminationReason),
}

/// Shared bookkeeping for all solvers: holds the growing record list,
/// applies the stopping rules in a fixed order (non-finite guard,
/// tolerance, stagnation, iteration budget) and assembles the final trace.
pub(crate) struct TraceBuilder<'a> {
    solver: String,
    cfg: &'a SolveConfig,
    records: Vec<IterationRecord>,
    r0_norm: f64,
    stagnation_run: usize,
    use_stagnation: bool,
}

impl<'a> TraceBuilder<'a> {
    /// Validates the configuration and starting guess, computes `r₀` and
    /// seeds the trace with the initial record. Returns the builder
    /// together with a copy of `r₀` for the solver's own state.
    pub fn start(
        solver: impl Into<String>,
        p: &Problem,
        cfg: &'a SolveConfig,
        x0: Vector,
        use_stagnation: bool,
    ) -> Result<(Self, Vector)> {
        let solver = solver.into();
        cfg.validate()?;
        if x0.len() != p.dim() {
            return Err(Error::DimensionMismatch(format!(
                "starting guess of length {} for an order-{} problem",
                x0.len(),
                p.dim()
            )));
        }
        if !x0.is_finite() {
            return Err(Error::NonFinite(format!("starting guess passed to {solver}")));
        }
        let r0 = p.residual(&x0);
        if !r0.is_finite() {
            return Err(Error::NonFinite(format!("initial residual in {solver}")));
        }
        let r0_norm = r0.norm();
        let records = vec![IterationRecord {
            x: x0,
            r: r0.clone(),
            res_norm: r0_norm,
            coeffs: None,
            lstsq_rank: None,
            min_norm_applied: false,
        }];
        Ok((
            Self {
                solver,
                cfg,
                records,
                r0_norm,
                stagnation_run: 0,
                use_stagnation,
            },
            r0,
        ))
    }

    pub fn r0_norm(&self) -> f64 {
        self.r0_norm
    }

    /// True when the starting guess already satisfies the system exactly.
    pub fn solved_at_start(&self) -> bool {
        self.r0_norm == 0.0
    }

    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("trace has records")
    }

    /// Appends a record and decides whether the loop should stop.
    pub fn push_and_assess(&mut self, record: IterationRecord) -> Result<StepOutcome> {
        if !record.res_norm.is_finite() || !record.x.is_finite() || !record.r.is_finite() {
            return Err(Error::SolverAbort {
                solver: self.solver.clone(),
                iteration: self.records.len(),
                message: "iterate or residual became non-finite".into(),
            });
        }
        let step = record.r.sub(&self.last().r).norm();
        self.records.push(record);
        let rec = self.last();
        if rec.res_norm <= self.cfg.tol * self.r0_norm {
            return Ok(StepOutcome::Stop(TerminationReason::Tolerance));
        }
        if self.use_stagnation {
            if let Some(window) = self.cfg.stagnation_window {
                if step <= STAGNATION_REL * self.r0_norm {
                    self.stagnation_run += 1;
                    if self.stagnation_run >= window {
                        return Ok(StepOutcome::Stop(TerminationReason::Stagnation));
                    }
                } else {
                    self.stagnation_run = 0;
                }
            }
        }
        if self.iterations() >= self.cfg.max_iter {
            return Ok(StepOutcome::Stop(TerminationReason::MaxIter));
        }
        Ok(StepOutcome::Continue)
    }

    pub fn finish(self, termination: TerminationReason) -> IterationTrace {
        IterationTrace {
            solver: self.solver,
            records: self.records,
            termination,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::problems::{build_identity, Problem, SymmetryClass};

    #[test]
    fn config_validation() {
        assert!(SolveConfig::default().validate().is_ok());
        assert!(SolveConfig { max_iter: 0, ..Default::default() }.validate().is_err());
        assert!(SolveConfig { tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolveConfig { rank_tol: -1.0, ..Default::default() }.validate().is_err());
        assert!(SolveConfig { stagnation_window: Some(0), ..Default::default() }
            .validate()
            .is_err());
    }

    #[test]
    fn window_depth_schedule() {
        assert_eq!(Window::Size(3).depth_at(0), 0);
        assert_eq!(Window::Size(3).depth_at(2), 2);
        assert_eq!(Window::Size(3).depth_at(10), 3);
        assert_eq!(Window::Full.depth_at(10), 10);
        assert_eq!(format!("{}", Window::Size(2)), "2");
        assert_eq!(format!("{}", Window::Full), "full");
    }

    #[test]
    fn fixed_point_map_matches_definition() {
        let a = Matrix::from(
            crate::linalg::DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap(),
        );
        let p = Problem::new(a, Vector::from(vec![2.0, 3.0]), SymmetryClass::Symmetric, "t")
            .unwrap();
        let q = FixedPointMap::new(&p);
        // q(x) = (I - A)x + b: at x = (1, 1), q(x) = x exactly (fixed point).
        let x = Vector::ones(2);
        assert_eq!(q.apply(&x), x);
        // M v = v - A v = (I - A) v.
        let v = Vector::from(vec![1.0, 2.0]);
        assert_eq!(q.apply_linear(&v).as_slice(), &[-1.0, -4.0]);
        let m = q.linear_part_dense();
        assert_eq!(m.matvec(&v), q.apply_linear(&v));
    }

    #[test]
    fn builder_stops_on_budget_and_stagnation() {
        let p = build_identity(2).unwrap();
        let cfg = SolveConfig { max_iter: 2, tol: 1e-30, ..Default::default() };
        let (mut tb, r0) = TraceBuilder::start("t", &p, &cfg, Vector::zeros(2), true).unwrap();
        let rec = |r: &Vector| IterationRecord {
            x: Vector::zeros(2),
            r: r.clone(),
            res_norm: r.norm(),
            coeffs: None,
            lstsq_rank: None,
            min_norm_applied: false,
        };
        // A genuinely moving step keeps going; the second hits the budget.
        let moved = Vector::from(vec![0.5, 0.0]);
        assert!(matches!(tb.push_and_assess(rec(&moved)).unwrap(), StepOutcome::Continue));
        assert!(matches!(
            tb.push_and_assess(rec(&moved)).unwrap(),
            StepOutcome::Stop(TerminationReason::MaxIter)
        ));

        let cfg = SolveConfig { max_iter: 50, tol: 1e-30, ..Default::default() };
        let (mut tb, _) = TraceBuilder::start("t", &p, &cfg, Vector::zeros(2), true).unwrap();
        let frozen = r0.clone();
        for _ in 0..2 {
            assert!(matches!(tb.push_and_assess(rec(&frozen)).unwrap(), StepOutcome::Continue));
        }
        assert!(matches!(
            tb.push_and_assess(rec(&frozen)).unwrap(),
            StepOutcome::Stop(TerminationReason::Stagnation)
        ));
    }

    #[test]
    fn builder_rejects_non_finite_steps() {
        let p = build_identity(2).unwrap();
        let cfg = SolveConfig::default();
        let (mut tb, _) = TraceBuilder::start("t", &p, &cfg, Vector::zeros(2), true).unwrap();
        let bad = IterationRecord {
            x: Vector::from(vec![f64::NAN, 0.0]),
            r: Vector::zeros(2),
            res_norm: 0.0,
            coeffs: None,
            lstsq_rank: None,
            min_norm_applied: false,
        };
        assert!(matches!(tb.push_and_assess(bad), Err(Error::SolverAbort { .. })));
    }
}
