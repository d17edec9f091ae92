//! Residual polynomial tracking.
//!
//! Every accelerated residual is a polynomial in the iteration matrix
//! applied to the first residual: `r_k = p_k(M) r₀` with `p₀ ≡ 1` and
//!
//! ```text
//! p_{k+1}(λ) = (1 + Σᵢ βᵢ) λ p_k(λ) − Σᵢ βᵢ p_{k−i}(λ)
//! ```
//!
//! driven by the recorded acceleration coefficients. This module rebuilds
//! the monomial coefficients of every `p_k` from a trace, evaluates
//! `p_k(M) r₀` matrix-free, and reports how well it reproduces the recorded
//! residuals, along with `p_k(1)` (which the recurrence pins to 1) and
//! `p_k(0)`.

use crate::problems::Problem;
use crate::solvers::{FixedPointMap, IterationTrace};
use crate::{Error, Result};

/// Monomial coefficients and evaluation data for the residual polynomials
/// of one trace.
#[derive(Clone, Debug)]
pub struct PolynomialTrace {
    /// `coefficients[k]` holds `p_k` low-to-high; `coefficients[0] = [1]`
    /// and the degree grows by exactly one per step.
    pub coefficients: Vec<Vec<f64>>,
    /// `p_k(1)`, which the recurrence forces to 1 up to rounding.
    pub at_one: Vec<f64>,
    /// `p_k(0)`, recorded for inspection; nothing pins its value.
    pub at_zero: Vec<f64>,
    /// `‖p_k(M) r₀ − r_k‖ / ‖r₀‖` per iteration.
    pub reconstruction_rel_error: Vec<f64>,
}

impl PolynomialTrace {
    pub fn degree(&self, k: usize) -> usize {
        self.coefficients[k].len() - 1
    }

    pub fn max_at_one_drift(&self) -> f64 {
        self.at_one.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_reconstruction_error(&self) -> f64 {
        self.reconstruction_rel_error.iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluates `p(M) v` by Horner's rule, applying `M w = w - A w`
/// matrix-free once per degree.
fn horner_in_m(coeffs: &[f64], v: &crate::linalg::Vector, map: &FixedPointMap) -> crate::linalg::Vector {
    let mut acc = v.scaled(*coeffs.last().expect("polynomial has coefficients"));
    for &c in coeffs.iter().rev().skip(1) {
        acc = map.apply_linear(&acc);
        acc.axpy(c, v);
    }
    acc
}

/// Rebuilds the residual polynomials of a trace from its recorded
/// coefficients.
///
/// The trace must use the β convention (NGMRES family, including the
/// minimal-residual iteration and the three-term variant): record `k + 1`
/// carries `β₀..β_{m_k}` referring to residuals `r_k..r_{k−m_k}`. GMRES
/// records no coefficients and Anderson records γ's instead, so neither
/// can be tracked here; a missing or over-long coefficient list is an
/// error.
pub fn track_polynomial(trace: &IterationTrace, p: &Problem) -> Result<PolynomialTrace> {
    let map = FixedPointMap::new(p);
    let r0 = &trace.records[0].r;
    let scale = trace.initial_res_norm().max(f64::MIN_POSITIVE);

    let mut coefficients = vec![vec![1.0_f64]];
    for k in 0..trace.iterations() {
        let beta = trace.records[k + 1].coeffs.as_deref().ok_or_else(|| {
            Error::MissingTraceData(format!(
                "record {} of the {} trace has no acceleration coefficients",
                k + 1,
                trace.solver
            ))
        })?;
        if beta.is_empty() || beta.len() > k + 1 {
            return Err(Error::MissingTraceData(format!(
                "record {} of the {} trace has {} coefficients, but the window at step {} holds \
                 between 1 and {} residuals",
                k + 1,
                trace.solver,
                beta.len(),
                k,
                k + 1
            )));
        }
        let weight = 1.0 + beta.iter().sum::<f64>();
        let mut next = vec![0.0; coefficients[k].len() + 1];
        for (i, &c) in coefficients[k].iter().enumerate() {
            next[i + 1] = weight * c;
        }
        for (i, &b) in beta.iter().enumerate() {
            for (d, &c) in coefficients[k - i].iter().enumerate() {
                next[d] -= b * c;
            }
        }
        coefficients.push(next);
    }

    let at_one = coefficients.iter().map(|c| c.iter().sum()).collect();
    let at_zero = coefficients.iter().map(|c| c[0]).collect();
    let reconstruction_rel_error = coefficients
        .iter()
        .enumerate()
        .map(|(k, c)| horner_in_m(c, r0, &map).sub(&trace.records[k].r).norm() / scale)
        .collect();

    Ok(PolynomialTrace { coefficients, at_one, at_zero, reconstruction_rel_error })
}
