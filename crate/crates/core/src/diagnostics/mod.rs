//! Machine checks for the algebraic identities behind the solver family.
//!
//! Everything here consumes finished [`IterationTrace`](crate::solvers::IterationTrace)s
//! plus the problem they came from and re-derives what should hold:
//! residual orthogonality relations, the residual polynomial recurrence,
//! per-step contraction factors and cumulative envelopes, and
//! residual-history agreement between methods that are provably
//! equivalent.

mod bounds;
mod compare;
mod orthogonality;
mod polynomial;

pub use bounds::{
    check_contraction, compute_bounds, BoundReport, ContractionCheck, ContractionReport,
    CONTRACTION_SLACK_REL,
};
pub use compare::{compare_traces, max_norm_gap, max_residual_gap, strict_decrease_horizon};
pub use orthogonality::{
    check_aa_orthogonality, check_orthogonality, perturb_record, OrthogonalityCheck,
    OrthogonalityReport, OrthogonalityRow, ORTHOGONALITY_FLOOR_REL,
};
pub use polynomial::{track_polynomial, PolynomialTrace};
