//! Experiment execution and artifact assembly.
//!
//! `run` builds the problem, executes every configured solver, replays
//! the diagnostics the trace family supports, and writes the artifact
//! set: the resolved config echo, per-solver CSV and JSON traces, a
//! side-by-side comparison CSV, an SVG convergence chart and a text
//! summary with divergence indices and check verdicts. `check` replays
//! the same diagnostics against traces stored by an earlier run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ngmres::diagnostics::{
    check_aa_orthogonality, check_contraction, check_orthogonality, compare_traces, compute_bounds,
    max_residual_gap,
};
use ngmres::problems::Problem;
use ngmres::solvers::{left_precondition, IterationTrace};

use crate::config::{ConfigOverlay, ExperimentConfig, SolverSpec};
use crate::error::{Error, Result};
use crate::svg::render_convergence;
use crate::trace_io::{read_trace, trace_to_csv, write_atomic, write_trace};

/// Orthogonality tolerance asserted for windowed residual-minimizing
/// traces.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;
/// Orthogonality tolerance asserted for Anderson's pulled-back family.
pub const AA_ORTHOGONALITY_TOL: f64 = 1e-8;
/// Tolerance for recorded-residual consistency (`r` vs `A x − b`).
pub const RESIDUAL_CONSISTENCY_TOL: f64 = 1e-8;
/// Slack, relative to `‖r₀‖`, allowed in the monotonicity check.
pub const MONOTONE_SLACK_REL: f64 = 1e-12;
/// Spectral bounds are computed only below this dimension; they need
/// dense eigenvalue work and are informational.
pub const BOUND_DIM_CAP: usize = 256;

/// Everything a finished experiment produced.
pub struct RunArtifact {
    pub out_dir: PathBuf,
    /// `(solver name, csv file, json file)` per solver, in config order.
    pub trace_files: Vec<(String, String, String)>,
    pub comparison_file: String,
    pub plot_file: String,
    pub summary_file: String,
    /// The text also written to `summary.txt`.
    pub summary: String,
    /// Number of asserted checks that failed; nonzero means exit code 1.
    pub check_failures: usize,
    pub traces: Vec<(SolverSpec, IterationTrace)>,
}

/// Builds the problem (with preconditioning applied) an experiment runs
/// on.
pub fn build_problem(config: &ExperimentConfig) -> Result<Problem> {
    let base = config.problem.build()?;
    match config.precondition.build(&base)? {
        None => Ok(base),
        Some(pre) => Ok(left_precondition(&base, &pre)?),
    }
}

/// Executes the experiment and writes all artifacts under `config.out`.
pub fn run(config: &ExperimentConfig) -> Result<RunArtifact> {
    config.solve.validate()?;
    ensure_unique_names(&config.solvers)?;
    let p = build_problem(config)?;
    let x0 = config.x0.build(p.dim());

    let mut traces = Vec::with_capacity(config.solvers.len());
    for spec in &config.solvers {
        traces.push((*spec, spec.run(&p, &x0, &config.solve)?));
    }

    let (check_text, check_failures) = evaluate_checks(&p, &traces);
    let bounds_text = bounds_section(&p, &traces);
    let comparison_text = comparison_section(&traces);

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "problem: {} (dim {}, class {})",
        p.label(),
        p.dim(),
        p.symmetry_class().as_str()
    );
    let _ = writeln!(summary, "x0: {}", config.x0);
    let _ = writeln!(summary, "precondition: {}", config.precondition);
    let _ = writeln!(
        summary,
        "tol: {:e}  max_iter: {}\n",
        config.solve.tol, config.solve.max_iter
    );
    summary.push_str(&check_text);
    summary.push_str(&bounds_text);
    summary.push_str(&comparison_text);
    let _ = writeln!(summary, "asserted check failures: {check_failures}");

    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    write_atomic(&config.out.join("config.txt"), config.to_config_text().as_bytes())?;

    let mut trace_files = Vec::new();
    for (spec, trace) in &traces {
        let name = spec.name();
        let (csv, json) = write_trace(&config.out, &name, trace)?;
        trace_files.push((name, csv, json));
    }

    let comparison_file = "comparison.csv".to_string();
    write_atomic(&config.out.join(&comparison_file), comparison_csv(&traces).as_bytes())?;

    let plot_file = "convergence.svg".to_string();
    let series: Vec<(String, Vec<f64>)> =
        traces.iter().map(|(spec, t)| (spec.name(), t.res_norms())).collect();
    let title = format!("{} (n={})", p.label(), p.dim());
    write_atomic(&config.out.join(&plot_file), render_convergence(&title, &series).as_bytes())?;

    let summary_file = "summary.txt".to_string();
    write_atomic(&config.out.join(&summary_file), summary.as_bytes())?;

    Ok(RunArtifact {
        out_dir: config.out.clone(),
        trace_files,
        comparison_file,
        plot_file,
        summary_file,
        summary,
        check_failures,
        traces,
    })
}

/// Replays diagnostics against the traces stored in a run directory.
/// Returns the verdict text and the number of failures.
pub fn check_dir(dir: &Path) -> Result<(String, usize)> {
    let config_path = dir.join("config.txt");
    let text = fs::read_to_string(&config_path).map_err(|e| Error::io(&config_path, e))?;
    let overlay = ConfigOverlay::from_config_text(&text)?;
    let config = ConfigOverlay::default().resolve_over(overlay)?;
    let p = build_problem(&config)?;

    let mut traces = Vec::new();
    for spec in &config.solvers {
        let path = dir.join(format!("trace-{}.json", spec.name()));
        traces.push((*spec, read_trace(&path)?));
    }

    let (mut summary, failures) = evaluate_checks(&p, &traces);
    let _ = writeln!(summary, "asserted check failures: {failures}");
    Ok((summary, failures))
}

fn ensure_unique_names(solvers: &[SolverSpec]) -> Result<()> {
    for (i, a) in solvers.iter().enumerate() {
        for b in &solvers[i + 1..] {
            if a.name() == b.name() {
                return Err(Error::Config(format!("solver: '{}' listed twice", a.name())));
            }
        }
    }
    Ok(())
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

/// The asserted per-trace checks: recorded-residual consistency,
/// the orthogonality family the solver supports, and monotonicity for
/// residual-minimizing methods.
pub fn evaluate_checks(p: &Problem, traces: &[(SolverSpec, IterationTrace)]) -> (String, usize) {
    let mut out = String::new();
    let mut failures = 0usize;
    for (spec, trace) in traces {
        let rel = trace.final_res_norm() / trace.initial_res_norm().max(f64::MIN_POSITIVE);
        let _ = writeln!(
            out,
            "solver {}: {} iterations, final |r|/|r0| = {:.3e}, termination: {}",
            spec.name(),
            trace.iterations(),
            rel,
            trace.termination.as_str()
        );

        let consistent = trace.verify_recorded_residuals(p, RESIDUAL_CONSISTENCY_TOL);
        if consistent.is_err() {
            failures += 1;
        }
        match &consistent {
            Ok(()) => {
                let _ = writeln!(
                    out,
                    "  residual records consistent to {RESIDUAL_CONSISTENCY_TOL:e}: pass"
                );
            }
            Err(e) => {
                let _ = writeln!(out, "  residual records consistent: FAIL ({e})");
            }
        }

        if let Some(w) = spec.orthogonality_window() {
            let report = check_orthogonality(trace, p, w, ORTHOGONALITY_TOL);
            if !report.passed {
                failures += 1;
            }
            let _ = writeln!(
                out,
                "  orthogonality (window {w}, tol {ORTHOGONALITY_TOL:e}): {}, max {:.3e}, \
                 skipped {}",
                verdict(report.passed),
                report.max_violation,
                report.skipped
            );
        } else if let Some(w) = spec.anderson_window() {
            match check_aa_orthogonality(trace, p, w, AA_ORTHOGONALITY_TOL) {
                Ok(report) => {
                    if !report.passed {
                        failures += 1;
                    }
                    let _ = writeln!(
                        out,
                        "  pulled-back orthogonality (window {w}, tol {AA_ORTHOGONALITY_TOL:e}): \
                         {}, max {:.3e}, skipped {}",
                        verdict(report.passed),
                        report.max_violation,
                        report.skipped
                    );
                }
                Err(ngmres::Error::Singular(_)) => {
                    let _ = writeln!(
                        out,
                        "  pulled-back orthogonality: not applicable (M = I - A singular)"
                    );
                }
                Err(e) => {
                    failures += 1;
                    let _ = writeln!(out, "  pulled-back orthogonality: FAIL ({e})");
                }
            }
        } else {
            let _ = writeln!(out, "  orthogonality: not applicable for {}", spec.name());
        }

        if spec.is_residual_minimizing() {
            let mono = trace.is_monotone(MONOTONE_SLACK_REL);
            if !mono {
                failures += 1;
            }
            let _ = writeln!(
                out,
                "  residual norms monotone (slack {MONOTONE_SLACK_REL:e}): {}",
                verdict(mono)
            );
        } else {
            let _ = writeln!(out, "  monotonicity: not asserted (not residual-minimizing)");
        }
    }
    out.push('\n');
    (out, failures)
}

/// Informational spectral-bound report; never contributes failures
/// because the contraction hypotheses depend on the problem, not the
/// implementation.
fn bounds_section(p: &Problem, traces: &[(SolverSpec, IterationTrace)]) -> String {
    let mut out = String::new();
    if p.dim() > BOUND_DIM_CAP {
        let _ = writeln!(out, "spectral bounds: skipped (dim {} > {BOUND_DIM_CAP})\n", p.dim());
        return out;
    }
    let bounds = match compute_bounds(p) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(out, "spectral bounds: unavailable ({e})\n");
            return out;
        }
    };
    let _ = writeln!(
        out,
        "spectral bounds: mu = {:.4e}, sigma = {:.4e}, rho(M) = {:.4e}{}",
        bounds.mu,
        bounds.sigma,
        bounds.rho_m,
        match bounds.kappa {
            Some(k) => format!(", kappa = {k:.4e}"),
            None => String::new(),
        }
    );
    for (spec, trace) in traces {
        if !spec.is_residual_minimizing() {
            continue;
        }
        let chebyshev = matches!(spec, SolverSpec::Gmres | SolverSpec::Cr);
        let report = check_contraction(trace, &bounds, chebyshev);
        if !report.applicable {
            let _ = writeln!(out, "  {}: no contraction hypothesis applies", spec.name());
            continue;
        }
        for c in &report.per_step {
            let _ = writeln!(
                out,
                "  {} vs {} = {:.4}: {} ({} failing steps)",
                spec.name(),
                c.factor_name,
                c.factor,
                verdict(c.passed),
                c.failing_steps
            );
        }
        if let Some(c) = &report.cumulative_chebyshev {
            let _ = writeln!(
                out,
                "  {} vs cumulative {} base {:.4}: {} ({} failing steps)",
                spec.name(),
                c.factor_name,
                c.factor,
                verdict(c.passed),
                c.failing_steps
            );
        }
    }
    out.push('\n');
    out
}

fn fmt_divergence(d: Option<usize>) -> String {
    match d {
        None => "NONE".to_string(),
        Some(i) => i.to_string(),
    }
}

/// Pairwise divergence indices and residual gaps.
fn comparison_section(traces: &[(SolverSpec, IterationTrace)]) -> String {
    let mut out = String::new();
    if traces.len() < 2 {
        return out;
    }
    let _ = writeln!(out, "comparisons:");
    for i in 0..traces.len() {
        for j in i + 1..traces.len() {
            let (sa, ta) = &traces[i];
            let (sb, tb) = &traces[j];
            let _ = writeln!(
                out,
                "  {} vs {}: divergence index {} (tol 1e-8), {} (tol 1e-10); \
                 max residual gap above 1e-8 floor: {:.3e}",
                sa.name(),
                sb.name(),
                fmt_divergence(compare_traces(ta, tb, 1e-8)),
                fmt_divergence(compare_traces(ta, tb, 1e-10)),
                max_residual_gap(ta, tb, 1e-8, None)
            );
        }
    }
    out.push('\n');
    out
}

/// Side-by-side residual norms, one column per solver, empty cells once
/// a trace has terminated.
fn comparison_csv(traces: &[(SolverSpec, IterationTrace)]) -> String {
    let mut out = String::from("iter");
    for (spec, _) in traces {
        out.push(',');
        out.push_str(&spec.name());
    }
    out.push('\n');
    let rows = traces.iter().map(|(_, t)| t.records.len()).max().unwrap_or(0);
    for i in 0..rows {
        out.push_str(&i.to_string());
        for (_, t) in traces {
            out.push(',');
            if let Some(rec) = t.records.get(i) {
                out.push_str(&format!("{}", rec.res_norm));
            }
        }
        out.push('\n');
    }
    out
}

/// Re-renders the CSV for a trace; exposed so tests can compare stored
/// bytes against a fresh in-memory rendering.
pub fn render_trace_csv(trace: &IterationTrace) -> String {
    trace_to_csv(trace)
}
