//! The acceptance suite: one executable verdict per headline property of
//! the solver family, with pinned problems, seeds and tolerances.
//!
//! Every criterion returns a [`CriterionOutcome`] instead of panicking,
//! so the CLI can print the whole scoreboard and the integration tests
//! can assert each verdict individually. The numbers in `details` are the
//! measured quantities the verdict was derived from.

use std::time::Instant;

use ngmres::diagnostics::{
    check_contraction, check_orthogonality, compare_traces, compute_bounds, max_norm_gap,
    max_residual_gap, strict_decrease_horizon, track_polynomial,
};
use ngmres::linalg::{min_norm_lstsq, two_norm, DenseMatrix, Matrix, Vector};
use ngmres::problems::{
    build_convection_diffusion, build_cyclic_shift, random_positive_real, random_problem,
    seeded_x0, to_shifted_skew, Problem, SymmetryClass,
};
use ngmres::solvers::{
    anderson, conjugate_residual, gmres, left_precondition, mr_iteration, ngmres, IterationTrace,
    Preconditioner, SolveConfig, Window,
};

/// Verdict of a single criterion.
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// The measured quantities behind the verdict.
    pub details: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    /// The one-line scoreboard form.
    pub fn line(&self) -> String {
        format!(
            "criterion {:2}  {:<46} {}  ({:5.2}s)  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.details
        )
    }
}

fn grade(
    id: usize,
    name: &'static str,
    body: impl FnOnce() -> ngmres::Result<(bool, String)>,
) -> CriterionOutcome {
    let start = Instant::now();
    let (passed, details) = match body() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionOutcome { id, name, passed, details, seconds: start.elapsed().as_secs_f64() }
}

fn cfg(max_iter: usize) -> SolveConfig {
    SolveConfig { max_iter, ..Default::default() }
}

/// The convection–diffusion stencil at mesh Reynolds number 1/2 in both
/// directions (`σ = τ = n + 1`), the stock nonsymmetric test matrix.
fn convection_problem(n: usize) -> ngmres::Result<Problem> {
    build_convection_diffusion(n, (n + 1) as f64, (n + 1) as f64)
}

/// Its shifted skew-symmetric companion `I − skew(h²K)`, built from the
/// mesh-normalized stencil so the skew amplitude stays O(1).
fn shifted_skew_companion(n: usize) -> ngmres::Result<Problem> {
    let k = convection_problem(n)?;
    let h = 1.0 / (n as f64 + 1.0);
    to_shifted_skew(&k.a().scaled(h * h))
}

/// Window-1 and full-window traces coincide with GMRES on the
/// shifted skew-symmetric system above the least-squares accuracy floor.
pub fn criterion_1() -> CriterionOutcome {
    grade(1, "shifted-skew window-1/full equivalence", || {
        let p = shifted_skew_companion(32)?;
        let x0 = seeded_x0(p.dim(), 42);
        let run = cfg(100);
        let g = gmres(&p, &x0, &run)?;
        let ng1 = ngmres(&p, &x0, Window::Size(1), &run)?;
        let ngf = ngmres(&p, &x0, Window::Full, &run)?;
        let gap1 = max_residual_gap(&ng1, &g, 1e-8, None);
        let gapf = max_residual_gap(&ngf, &g, 1e-8, None);
        let converged = g.final_res_norm() <= 1e-8 * g.initial_res_norm();
        Ok((
            gap1 <= 1e-8 && gapf <= 1e-8 && converged,
            format!(
                "window-1 gap {gap1:.3e}, full gap {gapf:.3e} above the 1e-8 floor \
                 (GMRES {} its)",
                g.iterations()
            ),
        ))
    })
}

/// On the nonsymmetric stencil the traces split at a finite index while
/// GMRES keeps the smaller residual at every iteration.
pub fn criterion_2() -> CriterionOutcome {
    grade(2, "nonsymmetric divergence with GMRES dominance", || {
        let p = convection_problem(32)?;
        let x0 = seeded_x0(p.dim(), 42);
        let run = cfg(100);
        let g = gmres(&p, &x0, &run)?;
        let ng1 = ngmres(&p, &x0, Window::Size(1), &run)?;
        let div = compare_traces(&ng1, &g, 1e-8);
        let n = g.records.len().min(ng1.records.len());
        let slack = 1e-10 * g.initial_res_norm();
        let dominated =
            (0..n).all(|k| g.records[k].res_norm <= ng1.records[k].res_norm + slack);
        Ok((
            div.is_some() && dominated,
            format!(
                "divergence index {div:?}, GMRES norms dominate through {n} shared records: \
                 {dominated}"
            ),
        ))
    })
}

fn max_inf_gap(x: &Vector, y: &Vector) -> f64 {
    x.sub(y).norm_inf()
}

/// From a zero start the cyclic-shift system stalls every solver for
/// `n − 1` steps; GMRES then lands the exact solution while the windowed
/// methods hold the stagnation point. A nonzero start removes the stall.
pub fn criterion_3() -> CriterionOutcome {
    grade(3, "cyclic-shift stagnation from zero start", || {
        let p = build_cyclic_shift(5)?;
        let e5 = Vector::unit(5, 4)?;
        let zero = Vector::zeros(5);
        let mut passed = true;
        let mut notes = Vec::new();

        let g = gmres(&p, &zero, &cfg(10))?;
        let held = (1..=4).all(|k| max_inf_gap(&g.records[k].x, &zero) <= 1e-12);
        let exact = g.records.len() > 5 && max_inf_gap(&g.records[5].x, &e5) <= 1e-12;
        passed &= held && exact;
        notes.push(format!("gmres holds x0 then solves at 5: {}", held && exact));

        let frozen = SolveConfig { max_iter: 10, stagnation_window: None, ..Default::default() };
        for (label, w) in [("full", Window::Full), ("window-0", Window::Size(0))] {
            let t = ngmres(&p, &zero, w, &frozen)?;
            let pinned = t.records.len() == 11
                && (1..=10).all(|k| max_inf_gap(&t.records[k].x, &zero) <= 1e-12);
            passed &= pinned;
            notes.push(format!("{label} pinned at x0 for 10 its: {pinned}"));
        }

        let ones = Vector::ones(5);
        let run = cfg(10);
        let g1 = gmres(&p, &ones, &run)?;
        let nf = ngmres(&p, &ones, Window::Full, &run)?;
        let agree = compare_traces(&nf, &g1, 1e-10).is_none();
        let both_solve = g1.records.len() == 6
            && nf.records.len() == 6
            && max_inf_gap(&g1.records[5].x, &e5) <= 1e-10
            && max_inf_gap(&nf.records[5].x, &e5) <= 1e-10;
        passed &= agree && both_solve;
        notes.push(format!("ones start: traces coincide and solve at 5: {}", agree && both_solve));

        Ok((passed, notes.join("; ")))
    })
}

/// At n = 50 the window-10 method tracks GMRES for exactly 11 iterations,
/// then stalls while GMRES finishes at iteration 50.
pub fn criterion_4() -> CriterionOutcome {
    grade(4, "windowed stall vs GMRES finish at n=50", || {
        let p = build_cyclic_shift(50)?;
        let ones = Vector::ones(50);
        let run = SolveConfig {
            max_iter: 50,
            tol: 1e-12,
            stagnation_window: None,
            ..Default::default()
        };
        let g = gmres(&p, &ones, &run)?;
        let ng10 = ngmres(&p, &ones, Window::Size(10), &run)?;
        let div = compare_traces(&ng10, &g, 1e-10);
        let g_rel = g.final_res_norm() / g.initial_res_norm();
        let ng_rel = ng10.final_res_norm() / ng10.initial_res_norm();
        let ok = div == Some(11)
            && g.records.len() == 51
            && g_rel <= 1e-12
            && ng10.records.len() == 51
            && ng_rel > 1e-3;
        Ok((
            ok,
            format!(
                "divergence index {div:?} (want Some(11)); final |r|/|r0|: gmres {g_rel:.3e}, \
                 window-10 {ng_rel:.3e}"
            ),
        ))
    })
}

/// On an SPD problem GMRES, both windowed variants and CR produce the
/// same residual-norm history, inside the cumulative Chebyshev envelope.
pub fn criterion_5() -> CriterionOutcome {
    grade(5, "SPD four-way equivalence + Chebyshev envelope", || {
        let p = build_convection_diffusion(8, 0.0, 0.0)?;
        let x0 = seeded_x0(p.dim(), 5);
        let run = cfg(80);
        let traces = [
            gmres(&p, &x0, &run)?,
            ngmres(&p, &x0, Window::Size(1), &run)?,
            ngmres(&p, &x0, Window::Full, &run)?,
            conjugate_residual(&p, &x0, &run)?,
        ];
        let mut worst_gap = 0.0_f64;
        for i in 0..traces.len() {
            for j in i + 1..traces.len() {
                worst_gap = worst_gap.max(max_norm_gap(&traces[i], &traces[j], 1e-10, None));
            }
        }
        let bounds = compute_bounds(&p)?;
        let mut envelope_ok = true;
        for t in &traces {
            let rep = check_contraction(t, &bounds, true);
            envelope_ok &= rep.applicable && rep.passed;
        }
        Ok((
            worst_gap <= 1e-8 && envelope_ok,
            format!(
                "worst pairwise norm gap {worst_gap:.3e} above the 1e-10 floor; \
                 Chebyshev envelope: {envelope_ok}"
            ),
        ))
    })
}

/// Per-step contraction bounds hold for the minimal-residual core and
/// every window size on 100 positive-real random systems.
pub fn criterion_6() -> CriterionOutcome {
    grade(6, "positive-real contraction bounds", || {
        let run = cfg(30);
        let mut worst_excess = f64::NEG_INFINITY;
        for seed in 0..100 {
            let p = random_positive_real(50, seed, 0.1)?;
            let bounds = compute_bounds(&p)?;
            if !bounds.positive_real {
                return Ok((false, format!("seed {seed}: positive-real hypothesis lost")));
            }
            let x0 = seeded_x0(50, seed + 10_000);
            let traces = [
                mr_iteration(&p, &x0, &run)?,
                ngmres(&p, &x0, Window::Size(0), &run)?,
                ngmres(&p, &x0, Window::Size(1), &run)?,
                ngmres(&p, &x0, Window::Size(5), &run)?,
            ];
            for t in &traces {
                let rep = check_contraction(t, &bounds, false);
                if !(rep.applicable && rep.passed) {
                    return Ok((false, format!("seed {seed}, solver {}: bound violated", t.solver)));
                }
                for c in &rep.per_step {
                    worst_excess = worst_excess.max(c.worst_excess_rel);
                }
            }
        }
        Ok((
            true,
            format!("100 problems x 4 solvers; worst per-step excess {worst_excess:.3e} (<= 0 \
                     means slack to spare)"),
        ))
    })
}

/// Every windowed trace in a 100-problem mixed battery (plus the worked
/// examples) passes the orthogonality relations and stays monotone.
pub fn criterion_7() -> CriterionOutcome {
    grade(7, "orthogonality and monotonicity battery", || {
        let classes = [
            SymmetryClass::General,
            SymmetryClass::Symmetric,
            SymmetryClass::SkewSymmetric,
            SymmetryClass::ShiftedSkewSymmetric,
        ];
        let windows =
            [Window::Size(0), Window::Size(1), Window::Size(2), Window::Size(5), Window::Full];
        let run = cfg(60);
        let mut worst = 0.0_f64;
        let mut check = |p: &Problem, x0: &Vector, w: Window, label: String| -> ngmres::Result<Option<String>> {
            let t = ngmres(p, x0, w, &run)?;
            let rep = check_orthogonality(&t, p, w, 1e-9);
            worst = worst.max(rep.max_violation);
            if !rep.passed {
                return Ok(Some(format!("{label}: orthogonality {:.3e}", rep.max_violation)));
            }
            if !t.is_monotone(1e-12) {
                return Ok(Some(format!("{label}: residual norms not monotone")));
            }
            Ok(None)
        };

        for s in 0..100u64 {
            let p = random_problem(30, classes[(s % 4) as usize], s)?;
            let x0 = seeded_x0(30, s + 1000);
            let w = windows[(s % 5) as usize];
            if let Some(fail) = check(&p, &x0, w, format!("random seed {s}"))? {
                return Ok((false, fail));
            }
        }

        let examples = [
            convection_problem(32)?,
            shifted_skew_companion(32)?,
            build_cyclic_shift(50)?,
            build_convection_diffusion(8, 0.0, 0.0)?,
        ];
        for p in &examples {
            let x0 = Vector::ones(p.dim());
            for w in [Window::Size(1), Window::Size(10), Window::Full] {
                if let Some(fail) = check(p, &x0, w, format!("{} window {w}", p.label()))? {
                    return Ok((false, fail));
                }
            }
        }
        Ok((true, format!("112 traces clean; worst scaled violation {worst:.3e} (tol 1e-9)")))
    })
}

/// Residual norms of the explicit Krylov least-squares oracle for GMRES.
fn krylov_oracle_norms(p: &Problem, x0: &Vector, steps: usize) -> ngmres::Result<Vec<f64>> {
    let r0 = p.residual(x0);
    let mut basis = Vec::with_capacity(steps);
    let mut v = r0.clone();
    let mut norms = Vec::with_capacity(steps);
    for _ in 0..steps {
        let unit = v.scaled(1.0 / v.norm());
        basis.push(p.a().matvec(&unit));
        let w = DenseMatrix::from_columns(&basis)?;
        let sol = min_norm_lstsq(&w, &r0, 1e-14)?;
        norms.push(sol.residual_norm);
        v = p.a().matvec(&unit);
    }
    Ok(norms)
}

/// GMRES matches a brute-force Krylov oracle; the full window matches
/// GMRES inside the strict-decrease horizon; Anderson iterates are the
/// GMRES fixed-point images.
pub fn criterion_8() -> CriterionOutcome {
    grade(8, "GMRES oracle, full-window and Anderson links", || {
        let run = cfg(8);
        let mut worst_oracle = 0.0_f64;
        let mut worst_gap = 0.0_f64;
        let mut worst_link = 0.0_f64;
        for seed in 0..20 {
            let p = random_problem(8, SymmetryClass::General, 100 + seed)?;
            let x0 = seeded_x0(8, 2000 + seed);
            let g = gmres(&p, &x0, &run)?;
            let scale = g.initial_res_norm();

            let oracle = krylov_oracle_norms(&p, &x0, g.iterations())?;
            for (k, &expected) in oracle.iter().enumerate() {
                let diff = (g.records[k + 1].res_norm - expected).abs() / scale;
                worst_oracle = worst_oracle.max(diff);
                if diff > 1e-9 {
                    return Ok((false, format!("seed {seed}: oracle mismatch {diff:.3e} at {k}")));
                }
            }

            let horizon = strict_decrease_horizon(&g);
            if horizon == 0 {
                continue;
            }
            let ng = ngmres(&p, &x0, Window::Full, &run)?;
            let gap = max_residual_gap(&ng, &g, 1e-8, Some(horizon));
            worst_gap = worst_gap.max(gap);
            if gap > 1e-8 {
                return Ok((false, format!("seed {seed}: full-window gap {gap:.3e}")));
            }

            let aa = anderson(&p, &x0, Window::Full, &run)?;
            let linked = horizon.min(aa.iterations().saturating_sub(1)).min(g.iterations());
            for j in 0..linked {
                let expected = g.records[j].x.sub(&g.records[j].r);
                let got = &aa.records[j + 1].x;
                let rel = got.sub(&expected).norm() / (1.0 + expected.norm());
                worst_link = worst_link.max(rel);
                if rel > 1e-8 {
                    return Ok((false, format!("seed {seed}: Anderson link drift {rel:.3e}")));
                }
            }
        }
        Ok((
            true,
            format!(
                "20 systems; worst oracle gap {worst_oracle:.3e}, full-window gap \
                 {worst_gap:.3e}, Anderson link drift {worst_link:.3e}"
            ),
        ))
    })
}

/// The recorded combination coefficients rebuild each residual as a
/// matrix polynomial in `M = I − A` applied to `r₀`, normalized at 1.
pub fn criterion_9() -> CriterionOutcome {
    grade(9, "residual polynomial reconstruction", || {
        let battery = [(16usize, 0.5, 1u64), (48, 0.8, 2), (64, 0.9, 3)];
        let run = SolveConfig { max_iter: 20, tol: 1e-12, ..Default::default() };
        let mut worst_recon = 0.0_f64;
        let mut worst_at_one = 0.0_f64;
        for (n, contraction, seed) in battery {
            // A = I − c·G/‖G‖₂ keeps ‖M‖₂ = c < 1, so all 20 steps stay
            // well above the stopping tolerance and every window runs.
            let g = random_problem(n, SymmetryClass::General, seed)?.a().to_dense();
            let a = DenseMatrix::identity(n).add(&g.scaled(-contraction / two_norm(&g)));
            let m = Matrix::Dense(a);
            let b = m.matvec(&Vector::ones(n));
            let p = Problem::new(m, b, SymmetryClass::General, format!("contractive-{n}"))?;
            let x0 = seeded_x0(n, seed + 77);
            for w in [Window::Size(0), Window::Size(1), Window::Size(2), Window::Full] {
                let t = ngmres(&p, &x0, w, &run)?;
                let poly = track_polynomial(&t, &p)?;
                worst_recon = worst_recon.max(poly.max_reconstruction_error());
                worst_at_one = worst_at_one.max(poly.max_at_one_drift());
            }
        }
        Ok((
            worst_recon <= 1e-8 && worst_at_one <= 1e-10,
            format!(
                "12 traces up to n=64, k=20; worst reconstruction {worst_recon:.3e} \
                 (tol 1e-8), worst drift at 1: {worst_at_one:.3e} (tol 1e-10)"
            ),
        ))
    })
}

fn traces_bit_equal(a: &IterationTrace, b: &IterationTrace) -> bool {
    a.records.len() == b.records.len()
        && a.termination == b.termination
        && a.records.iter().zip(&b.records).all(|(x, y)| {
            x.x == y.x && x.r == y.r && x.res_norm.to_bits() == y.res_norm.to_bits()
        })
}

/// Diagonal left preconditioning preserves the full-window/GMRES
/// equivalence, and the identity preconditioner is a bit-compatible
/// no-op.
pub fn criterion_10() -> CriterionOutcome {
    grade(10, "diagonal preconditioning equivalence", || {
        let p = build_convection_diffusion(8, 2.0, 2.0)?;
        let x0 = seeded_x0(p.dim(), 9);
        let run = SolveConfig::default();

        let jac = Preconditioner::jacobi(&p)?;
        let pp = left_precondition(&p, &jac)?;
        let g = gmres(&pp, &x0, &run)?;
        let ngf = ngmres(&pp, &x0, Window::Full, &run)?;
        let horizon = strict_decrease_horizon(&g);
        let gap = max_residual_gap(&ngf, &g, 1e-8, Some(horizon));
        let strictly_decreasing = strict_decrease_horizon(&ngf) == ngf.iterations();

        let pid = left_precondition(&p, &Preconditioner::Identity)?;
        let same_g = traces_bit_equal(&gmres(&p, &x0, &run)?, &gmres(&pid, &x0, &run)?);
        let same_ng = traces_bit_equal(
            &ngmres(&p, &x0, Window::Full, &run)?,
            &ngmres(&pid, &x0, Window::Full, &run)?,
        );

        Ok((
            gap <= 1e-8 && strictly_decreasing && same_g && same_ng,
            format!(
                "preconditioned gap {gap:.3e} inside horizon {horizon}, strictly decreasing: \
                 {strictly_decreasing}; identity preconditioner bit-compatible: {}",
                same_g && same_ng
            ),
        ))
    })
}

/// Runs all criteria in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ]
}
