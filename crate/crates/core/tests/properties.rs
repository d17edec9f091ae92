//! Randomized properties over the linear algebra kernels and the solver
//! family: invariants that must hold for every seed, not just the pinned
//! examples.

use proptest::prelude::*;

use ngmres::diagnostics::{check_orthogonality, track_polynomial};
use ngmres::linalg::{min_norm_lstsq, DenseMatrix, SparseMatrix, Vector};
use ngmres::problems::{random_positive_real, random_problem, seeded_x0, verify_class, SymmetryClass};
use ngmres::solvers::{ngmres, ResidualMode, SolveConfig, Window, WindowState};

const DIM_RANGE: std::ops::RangeInclusive<usize> = 3..=8;
const ENTRY_RANGE: std::ops::RangeInclusive<f64> = -2.0..=2.0;

prop_compose! {
    /// A rectangular matrix with more rows than columns plus a compatible
    /// right-hand side, as one flat draw.
    fn arb_lstsq_instance()
        (rows in 4..=8usize, cols in 1..=3usize)
        (entries in prop::collection::vec(ENTRY_RANGE, rows * cols),
         rhs in prop::collection::vec(ENTRY_RANGE, rows),
         rows in Just(rows), cols in Just(cols))
        -> (DenseMatrix, Vector)
    {
        let w = DenseMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j]);
        (w, Vector::from(rhs))
    }
}

prop_compose! {
    fn arb_dense()
        (rows in DIM_RANGE, cols in DIM_RANGE)
        (entries in prop::collection::vec(ENTRY_RANGE, rows * cols),
         v in prop::collection::vec(ENTRY_RANGE, cols),
         vt in prop::collection::vec(ENTRY_RANGE, rows),
         rows in Just(rows), cols in Just(cols))
        -> (DenseMatrix, Vector, Vector)
    {
        (DenseMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j]),
         Vector::from(v),
         Vector::from(vt))
    }
}

proptest! {
    /// The least-squares residual is orthogonal to every column of `W`,
    /// and no coordinate perturbation of the coefficients does better.
    #[test]
    fn lstsq_residual_orthogonal_and_optimal((w, f) in arb_lstsq_instance()) {
        let sol = min_norm_lstsq(&w, &f, 1e-12).unwrap();
        let mut residual = f.clone();
        for j in 0..w.cols() {
            residual.axpy(-sol.coefficients[j], &w.column(j));
        }
        prop_assert!((residual.norm() - sol.residual_norm).abs() <= 1e-10 * (1.0 + f.norm()));
        for j in 0..w.cols() {
            let col = w.column(j);
            let inner = col.dot(&residual).abs();
            prop_assert!(
                inner <= 1e-10 * (1.0 + col.norm() * f.norm()),
                "column {j} not orthogonal to the residual: {inner:.3e}"
            );
        }
        for j in 0..w.cols() {
            for delta in [-0.25, 0.25] {
                let mut beta = sol.coefficients.clone();
                beta[j] += delta;
                let mut competing = f.clone();
                for i in 0..w.cols() {
                    competing.axpy(-beta[i], &w.column(i));
                }
                prop_assert!(competing.norm() >= sol.residual_norm - 1e-10);
            }
        }
    }

    /// CSR and dense storage give the same matrix-vector products.
    #[test]
    fn sparse_and_dense_matvec_agree((d, v, vt) in arb_dense()) {
        let triplets: Vec<(usize, usize, f64)> = (0..d.rows())
            .flat_map(|i| (0..d.cols()).map(move |j| (i, j, 0.0)))
            .map(|(i, j, _)| (i, j, d.at(i, j)))
            .filter(|&(_, _, val)| val != 0.0)
            .collect();
        let s = SparseMatrix::from_triplets(d.rows(), d.cols(), &triplets).unwrap();
        let scale = 1.0 + d.max_abs() * (1.0 + v.norm() + vt.norm());
        prop_assert!(s.matvec(&v).sub(&d.matvec(&v)).norm_inf() <= 1e-13 * scale);
        prop_assert!(
            s.matvec_transpose(&vt).sub(&d.matvec_transpose(&vt)).norm_inf() <= 1e-13 * scale
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// On positive-real systems every windowed accelerated run has
    /// non-increasing residual norms and passes the orthogonality checks.
    #[test]
    fn ngmres_is_monotone_and_orthogonal_on_positive_real(
        n in 6..=12usize,
        seed in 0..500u64,
        m in 0..=3usize,
        mu in 0.3..1.0f64,
    ) {
        let p = random_positive_real(n, seed, mu).unwrap();
        let x0 = seeded_x0(n, seed.wrapping_add(1));
        let cfg = SolveConfig { max_iter: 25, ..Default::default() };
        let t = ngmres(&p, &x0, Window::Size(m), &cfg).unwrap();
        prop_assert!(t.is_monotone(1e-12), "residual norms grew: {:?}", t.res_norms());
        let report = check_orthogonality(&t, &p, Window::Size(m), 1e-9);
        prop_assert!(
            report.passed,
            "orthogonality violation {:.3e} on {}",
            report.max_violation,
            p.label()
        );
    }

    /// The residual polynomial tracker reproduces the recorded residuals
    /// and stays pinned at value one at λ = 1.
    #[test]
    fn residual_polynomial_reconstructs_the_trace(
        n in 5..=10usize,
        seed in 0..500u64,
        m in 0..=2usize,
    ) {
        let p = random_positive_real(n, seed, 0.5).unwrap();
        let x0 = seeded_x0(n, seed.wrapping_add(9));
        let cfg = SolveConfig { max_iter: 15, ..Default::default() };
        let t = ngmres(&p, &x0, Window::Size(m), &cfg).unwrap();
        let poly = track_polynomial(&t, &p).unwrap();
        prop_assert!(poly.max_at_one_drift() <= 1e-10);
        prop_assert!(poly.max_reconstruction_error() <= 1e-8);
        for k in 0..=t.iterations() {
            prop_assert_eq!(poly.degree(k), k);
        }
    }

    /// Recursively updated residuals agree with explicitly recomputed
    /// ones to well below the stopping tolerance.
    #[test]
    fn recursive_and_explicit_residuals_agree(
        n in 5..=10usize,
        seed in 0..500u64,
        m in 1..=2usize,
    ) {
        let p = random_positive_real(n, seed, 0.4).unwrap();
        let x0 = seeded_x0(n, seed.wrapping_add(3));
        let explicit = ngmres(&p, &x0, Window::Size(m), &SolveConfig {
            max_iter: 20,
            ..Default::default()
        }).unwrap();
        let recursive = ngmres(&p, &x0, Window::Size(m), &SolveConfig {
            max_iter: 20,
            residual_mode: ResidualMode::Recursive,
            ..Default::default()
        }).unwrap();
        let r0 = explicit.initial_res_norm();
        let common = explicit.records.len().min(recursive.records.len());
        for k in 0..common {
            let gap = (explicit.records[k].res_norm - recursive.records[k].res_norm).abs();
            prop_assert!(gap <= 1e-10 * r0, "step {k}: modes drift by {gap:.3e}");
        }
        // The recursive trace must also describe the true residuals.
        recursive.verify_recorded_residuals(&p, 1e-8).unwrap();
    }

    /// Every generated problem verifies its own declared symmetry class.
    #[test]
    fn generated_problems_verify_their_class(n in DIM_RANGE, seed in 0..1000u64) {
        for class in [
            SymmetryClass::General,
            SymmetryClass::Symmetric,
            SymmetryClass::SkewSymmetric,
            SymmetryClass::ShiftedSkewSymmetric,
        ] {
            let p = random_problem(n, class, seed).unwrap();
            prop_assert!(verify_class(p.a(), class).is_ok());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The sliding window holds exactly `min(k, m) + 1` entries after `k`
    /// advances (all `k + 1` for the full window) and reports history in
    /// most-recent-first order.
    #[test]
    fn window_depth_and_order_audit(
        steps in 1..=12usize,
        cap in prop_oneof![Just(None), (0..=4usize).prop_map(Some)],
    ) {
        let n = 3;
        let stamp = |i: usize| Vector::from(vec![i as f64; n]);
        let window = match cap {
            None => Window::Full,
            Some(m) => Window::Size(m),
        };
        let mut state = WindowState::new(window, stamp(0), stamp(0), stamp(0));
        for k in 1..=steps {
            state.advance(stamp(k), stamp(k), stamp(k));
            let expected_depth = match cap {
                None => k,
                Some(m) => k.min(m),
            };
            prop_assert_eq!(state.depth(), expected_depth);
            prop_assert_eq!(state.head_r()[0], k as f64);
            for i in 0..=expected_depth {
                prop_assert_eq!(state.r_back(i)[0], (k - i) as f64);
                prop_assert_eq!(state.x_back(i)[0], (k - i) as f64);
            }
        }
    }
}
