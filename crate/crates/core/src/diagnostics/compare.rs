//! Residual-history comparison between solvers that should coincide.
//!
//! The equivalence results all have the same shape: two methods started
//! from the same point produce identical residual vectors for as long as
//! some hypothesis holds (typically: the reference residual norms are
//! still strictly decreasing, and rounding has not hit the attainable
//! floor). These helpers measure where two traces part ways and how far
//! the strict-decrease hypothesis extends.

use crate::solvers::{IterationTrace, STAGNATION_REL};

/// Returns the first step (0-based, counting post-initial records) where
/// the residual vectors of two traces differ by more than
/// `rel_tol·‖r₀‖`, or `None` when they agree over the whole common
/// prefix.
///
/// Both traces must start from the same problem and guess, so record 0 is
/// shared by construction and comparison starts at record 1. The returned
/// index equals the number of leading steps on which the traces agree:
/// `Some(11)` means steps 0..=10 (records 1..=11) matched and record 12
/// broke away.
pub fn compare_traces(a: &IterationTrace, b: &IterationTrace, rel_tol: f64) -> Option<usize> {
    let scale = a.initial_res_norm().max(f64::MIN_POSITIVE);
    let common = a.records.len().min(b.records.len());
    for j in 1..common {
        let gap = a.records[j].r.sub(&b.records[j].r).norm();
        if gap > rel_tol * scale {
            return Some(j - 1);
        }
    }
    None
}

/// Largest step index `k₀` such that every recorded norm up to `k₀`
/// strictly decreases: `‖r_k‖ < ‖r_{k−1}‖ − 1e-14·‖r₀‖` for all
/// `k ≤ k₀`. Zero when the very first step already fails to decrease.
///
/// The full-history equivalence results hold through exactly this
/// horizon, so comparators treat records beyond it as
/// hypothesis-not-met rather than disagreement.
pub fn strict_decrease_horizon(trace: &IterationTrace) -> usize {
    let threshold = STAGNATION_REL * trace.initial_res_norm();
    let norms = trace.res_norms();
    let mut horizon = 0;
    for k in 1..norms.len() {
        if norms[k] < norms[k - 1] - threshold {
            horizon = k;
        } else {
            break;
        }
    }
    horizon
}

fn common_limit(a: &IterationTrace, b: &IterationTrace, through: Option<usize>) -> usize {
    let mut limit = a.records.len().min(b.records.len()) - 1;
    if let Some(t) = through {
        limit = limit.min(t);
    }
    limit
}

/// Worst relative residual-vector difference `‖r_k^a − r_k^b‖/‖r₀‖` over
/// the common prefix, restricted to records `1..=through` (when given)
/// and to records where both norms are still above `floor_rel·‖r₀‖`.
///
/// The floor exists because equivalence is only claimed down to the
/// accuracy the inner least-squares solves can support; below it the
/// methods legitimately drift apart.
pub fn max_residual_gap(
    a: &IterationTrace,
    b: &IterationTrace,
    floor_rel: f64,
    through: Option<usize>,
) -> f64 {
    let scale = a.initial_res_norm().max(f64::MIN_POSITIVE);
    let floor = floor_rel * scale;
    let mut worst = 0.0_f64;
    for j in 1..=common_limit(a, b, through) {
        if a.records[j].res_norm < floor || b.records[j].res_norm < floor {
            continue;
        }
        worst = worst.max(a.records[j].r.sub(&b.records[j].r).norm() / scale);
    }
    worst
}

/// Worst relative residual-norm difference `|‖r_k^a‖ − ‖r_k^b‖|/‖r₀‖`,
/// with the same restrictions as [`max_residual_gap`].
pub fn max_norm_gap(
    a: &IterationTrace,
    b: &IterationTrace,
    floor_rel: f64,
    through: Option<usize>,
) -> f64 {
    let scale = a.initial_res_norm().max(f64::MIN_POSITIVE);
    let floor = floor_rel * scale;
    let mut worst = 0.0_f64;
    for j in 1..=common_limit(a, b, through) {
        if a.records[j].res_norm < floor || b.records[j].res_norm < floor {
            continue;
        }
        worst = worst.max((a.records[j].res_norm - b.records[j].res_norm).abs() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::perturb_record;
    use crate::linalg::Vector;
    use crate::problems::{build_convection_diffusion, build_cyclic_shift};
    use crate::solvers::{gmres, ngmres, SolveConfig, Window};

    #[test]
    fn a_trace_agrees_with_itself() {
        let p = build_convection_diffusion(5, 2.0, 2.0).unwrap();
        let x0 = Vector::zeros(p.dim());
        let t = gmres(&p, &x0, &SolveConfig::default()).unwrap();
        assert_eq!(compare_traces(&t, &t, 1e-12), None);
        assert_eq!(max_residual_gap(&t, &t, 0.0, None), 0.0);
    }

    #[test]
    fn perturbation_is_located() {
        let p = build_convection_diffusion(5, 0.0, 0.0).unwrap();
        let x0 = Vector::zeros(p.dim());
        let t = gmres(&p, &x0, &SolveConfig::default()).unwrap();
        let mut spoiled = t.clone();
        // Perturb the second step, whose residual is still of problem scale.
        let j = 2.min(t.iterations());
        perturb_record(&mut spoiled, j, 1e-2);
        assert_eq!(compare_traces(&t, &spoiled, 1e-6), Some(j - 1));
        assert!(max_residual_gap(&t, &spoiled, 0.0, None) > 1e-6);
        assert!(max_norm_gap(&t, &spoiled, 0.0, Some(j - 1)) == 0.0);
    }

    #[test]
    fn full_window_matches_gmres_while_decreasing() {
        let p = build_convection_diffusion(6, 3.0, 1.0).unwrap();
        let x0 = Vector::zeros(p.dim());
        let cfg = SolveConfig { max_iter: 40, ..Default::default() };
        let g = gmres(&p, &x0, &cfg).unwrap();
        let n = ngmres(&p, &x0, Window::Full, &cfg).unwrap();
        let horizon = strict_decrease_horizon(&g);
        assert!(horizon >= 5);
        assert!(max_residual_gap(&n, &g, 1e-8, Some(horizon)) <= 1e-8);
    }

    #[test]
    fn horizon_detects_immediate_stagnation() {
        // The cyclic shift from a zero guess leaves GMRES parked at the
        // starting residual until the very last step.
        let p = build_cyclic_shift(6).unwrap();
        let x0 = Vector::zeros(p.dim());
        let g = gmres(&p, &x0, &SolveConfig::default()).unwrap();
        assert_eq!(strict_decrease_horizon(&g), 0);

        let p = build_convection_diffusion(6, 0.0, 0.0).unwrap();
        let x0 = Vector::zeros(p.dim());
        let g = gmres(&p, &x0, &SolveConfig::default()).unwrap();
        assert_eq!(strict_decrease_horizon(&g), g.iterations());
    }
}
