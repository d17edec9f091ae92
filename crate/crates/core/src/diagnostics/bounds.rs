//! Spectral convergence bounds and their verification against traces.
//!
//! From a problem this derives the scalars that drive the known
//! per-step contraction guarantees of the residual-minimizing methods —
//! the field-of-values bound `√(1 − μ²/σ²)`, its inverse-side companion
//! `√(1 − μν)`, the symmetric-definite range bound
//! `(λmax − λmin)/(λmax + λmin)`, the skew-iteration-matrix factor, and
//! the cumulative Chebyshev envelope `2·((√κ−1)/(√κ+1))^k` — together
//! with flags for the hypotheses each one needs. `check_contraction` then
//! replays a trace against every applicable bound.

use crate::linalg::{dense_inverse, spectral_radius, sym_eig_extremes, two_norm, DenseMatrix};
use crate::problems::{verify_class, Problem, SymmetryClass};
use crate::solvers::IterationTrace;
use crate::Result;

/// Additive slack, relative to `‖r₀‖`, granted to every bound check.
pub const CONTRACTION_SLACK_REL: f64 = 1e-12;

/// Relative threshold under which `M = I − A` counts as skew.
const SKEW_TOL: f64 = 1e-12;

/// Spectral scalars and contraction factors of one problem.
///
/// Factors are `None` when their hypothesis does not hold. The skew
/// factor is reported in both published variants — see
/// [`skew_factor_loose`](Self::skew_factor_loose).
#[derive(Clone, Debug)]
pub struct BoundReport {
    /// Smallest eigenvalue of the symmetric part of `A`.
    pub mu: f64,
    /// `‖A‖₂`.
    pub sigma: f64,
    /// Smallest eigenvalue of the symmetric part of `A⁻¹`; `None` when
    /// `A` is singular.
    pub nu: Option<f64>,
    /// Spectral radius of the iteration matrix `M = I − A`.
    pub rho_m: f64,
    /// `(λ_min, λ_max)` of `A` when it is symmetric.
    pub lambda_range: Option<(f64, f64)>,
    /// `λ_max/λ_min` for symmetric positive definite `A`.
    pub kappa: Option<f64>,
    /// `μ > 0`.
    pub positive_real: bool,
    pub symmetric: bool,
    pub symmetric_positive_definite: bool,
    /// `M = I − A` is skew (equivalently, the symmetric part of `A` is
    /// the identity).
    pub skew_linear_part: bool,
    /// `√(1 − μ²/σ²)`, per-step, needs `positive_real`.
    pub factor_field: Option<f64>,
    /// `√(1 − μν)`, per-step, needs `positive_real` and a finite `ν`.
    pub factor_inverse_field: Option<f64>,
    /// `(λmax − λmin)/(λmax + λmin)`, per-step, needs SPD.
    pub factor_symmetric: Option<f64>,
    /// `(√κ − 1)/(√κ + 1)`, base of the cumulative envelope, needs SPD.
    pub chebyshev_base: Option<f64>,
    /// `ρ(M)/√(1 + ρ(M))`, two-step skew factor as usually printed.
    pub skew_factor_plain: Option<f64>,
    /// `ρ(M)/√(1 + ρ(M)²)`, the variant that stays below 1 for every ρ.
    pub skew_factor_squared: Option<f64>,
}

impl BoundReport {
    /// The weaker of the two skew-factor variants. The two readings
    /// coincide at `ρ = 1` (both give `1/√2`) and we assert only what
    /// both support, so checks use this value.
    pub fn skew_factor_loose(&self) -> Option<f64> {
        match (self.skew_factor_plain, self.skew_factor_squared) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        }
    }
}

/// Computes every spectral scalar and contraction factor for a problem.
///
/// All operations are dense, so this is meant for problem sizes where an
/// `O(n³)` factorization is acceptable. A singular `A` only disables `ν`
/// and its factor; it is not an error.
pub fn compute_bounds(p: &Problem) -> Result<BoundReport> {
    let a = p.a().to_dense();
    let sym = a.symmetric_part();
    let (mu, sym_max) = sym_eig_extremes(&sym)?;
    let sigma = two_norm(&a);
    let nu = match dense_inverse(&a) {
        Ok(inv) => Some(sym_eig_extremes(&inv.symmetric_part())?.0),
        Err(_) => None,
    };
    let m = DenseMatrix::identity(a.rows()).sub(&a);
    let rho_m = spectral_radius(&m)?;

    let symmetric = verify_class(p.a(), SymmetryClass::Symmetric).is_ok();
    let positive_real = mu > 0.0;
    let symmetric_positive_definite = symmetric && positive_real;
    let skew_scale = m.max_abs().max(1.0);
    let skew_linear_part = m.symmetric_part().max_abs() <= SKEW_TOL * skew_scale;

    let lambda_range = symmetric.then_some((mu, sym_max));
    let kappa = symmetric_positive_definite.then(|| sym_max / mu);
    let factor_field = positive_real.then(|| {
        let ratio = mu / sigma.max(f64::MIN_POSITIVE);
        (1.0 - ratio * ratio).max(0.0).sqrt()
    });
    let factor_inverse_field = match (positive_real, nu) {
        (true, Some(nu)) if nu > 0.0 => Some((1.0 - mu * nu).max(0.0).sqrt()),
        _ => None,
    };
    let factor_symmetric =
        symmetric_positive_definite.then(|| (sym_max - mu) / (sym_max + mu));
    let chebyshev_base = kappa.map(|k| (k.sqrt() - 1.0) / (k.sqrt() + 1.0));
    let skew_factor_plain = skew_linear_part.then(|| rho_m / (1.0 + rho_m).sqrt());
    let skew_factor_squared = skew_linear_part.then(|| rho_m / (1.0 + rho_m * rho_m).sqrt());

    Ok(BoundReport {
        mu,
        sigma,
        nu,
        rho_m,
        lambda_range,
        kappa,
        positive_real,
        symmetric,
        symmetric_positive_definite,
        skew_linear_part,
        factor_field,
        factor_inverse_field,
        factor_symmetric,
        chebyshev_base,
        skew_factor_plain,
        skew_factor_squared,
    })
}

/// One bound replayed against a trace.
#[derive(Clone, Debug)]
pub struct ContractionCheck {
    pub factor_name: &'static str,
    pub factor: f64,
    /// Worst signed slack over the trace, relative to `‖r₀‖`: the largest
    /// value of `(‖r_{k+1}‖ − bound_k)/‖r₀‖`. Non-positive means every
    /// step respected the bound.
    pub worst_excess_rel: f64,
    pub failing_steps: usize,
    pub passed: bool,
}

/// Outcome of replaying a trace against every applicable bound.
#[derive(Clone, Debug)]
pub struct ContractionReport {
    pub solver: String,
    /// Per-step bounds `‖r_{k+1}‖ ≤ factor·‖r_k‖ + slack`.
    pub per_step: Vec<ContractionCheck>,
    /// Cumulative envelope `‖r_k‖ ≤ 2·base^k·‖r₀‖ + slack`.
    pub cumulative_chebyshev: Option<ContractionCheck>,
    /// False when no hypothesis held and nothing was checked.
    pub applicable: bool,
    /// True when every check that ran passed (vacuously true when none
    /// applied).
    pub passed: bool,
}

/// Replays a trace against every contraction bound whose hypothesis flag
/// is set in `bounds`.
///
/// The per-step factors apply to any residual-minimizing solver in the
/// suite. The cumulative Chebyshev envelope only holds for methods that
/// minimize over the whole accumulated history (GMRES, CR, or a windowed
/// solver that is equivalent to them on the given problem) — the plain
/// minimal-residual iteration contracts too slowly to meet it — so the
/// caller states with `chebyshev` whether the trace qualifies.
pub fn check_contraction(
    trace: &IterationTrace,
    bounds: &BoundReport,
    chebyshev: bool,
) -> ContractionReport {
    let norms = trace.res_norms();
    let r0 = trace.initial_res_norm().max(f64::MIN_POSITIVE);
    let slack = CONTRACTION_SLACK_REL * trace.initial_res_norm();

    let per_step_check = |name: &'static str, factor: f64| {
        let mut worst = 0.0_f64;
        let mut failing = 0;
        for k in 0..trace.iterations() {
            let excess = (norms[k + 1] - factor * norms[k] - slack) / r0;
            if excess > 0.0 {
                failing += 1;
            }
            worst = worst.max(excess);
        }
        ContractionCheck {
            factor_name: name,
            factor,
            worst_excess_rel: worst,
            failing_steps: failing,
            passed: failing == 0,
        }
    };

    let mut per_step = Vec::new();
    if let Some(f) = bounds.factor_field {
        per_step.push(per_step_check("field-of-values", f));
    }
    if let Some(f) = bounds.factor_inverse_field {
        per_step.push(per_step_check("inverse-field-of-values", f));
    }
    if let Some(f) = bounds.factor_symmetric {
        per_step.push(per_step_check("symmetric-range", f));
    }
    if let Some(f) = bounds.skew_factor_loose() {
        per_step.push(per_step_check("skew-linear-part", f));
    }

    let cumulative_chebyshev = match (chebyshev, bounds.chebyshev_base) {
        (true, Some(base)) => {
            let mut worst = 0.0_f64;
            let mut failing = 0;
            let mut envelope = trace.initial_res_norm();
            for k in 1..norms.len() {
                envelope *= base;
                let excess = (norms[k] - 2.0 * envelope - slack) / r0;
                if excess > 0.0 {
                    failing += 1;
                }
                worst = worst.max(excess);
            }
            Some(ContractionCheck {
                factor_name: "cumulative-chebyshev",
                factor: base,
                worst_excess_rel: worst,
                failing_steps: failing,
                passed: failing == 0,
            })
        }
        _ => None,
    };

    let applicable = !per_step.is_empty() || cumulative_chebyshev.is_some();
    let passed = per_step.iter().all(|c| c.passed)
        && cumulative_chebyshev.as_ref().is_none_or(|c| c.passed);
    ContractionReport {
        solver: trace.solver.clone(),
        per_step,
        cumulative_chebyshev,
        applicable,
        passed,
    }
}
