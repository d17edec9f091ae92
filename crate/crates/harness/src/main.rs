//! `ngmres-lab`: run solver experiments, replay stored artifacts through
//! the diagnostics, score the acceptance suite, and export problems.
//!
//! Exit codes: 0 on success, 1 when an asserted check or criterion
//! fails, 2 for malformed flags or config values.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ngmres_harness::config::{ConfigOverlay, ProblemSpec};
use ngmres_harness::{acceptance, runner, Error};

#[derive(Parser)]
#[command(
    name = "ngmres-lab",
    version,
    about = "Experiment harness for the ngmres acceleration-method library"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifact directory.
    ///
    /// Flags override the config file field-by-field; `--solver` may be
    /// repeated and, when given, replaces the file's solver list.
    Run(RunArgs),
    /// Re-run the diagnostics against the stored traces in a run directory.
    Check {
        /// Artifact directory produced by `run`.
        #[arg(long)]
        dir: PathBuf,
    },
    /// Score the acceptance suite, one line per criterion.
    Accept,
    /// Write a problem to Matrix Market files under `--out`.
    Generate {
        /// Problem spec, e.g. `conv-diffusion:n=8,sigma=2,tau=2`.
        #[arg(long)]
        problem: String,
        /// Output directory for `matrix.mtx` (and `rhs.mtx` with `--rhs`).
        #[arg(long)]
        out: PathBuf,
        /// Also write the right-hand side as `rhs.mtx`.
        #[arg(long)]
        rhs: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem spec, e.g. `cyclic-shift:n=50` or `random:n=30,class=general,seed=7`.
    #[arg(long)]
    problem: Option<String>,
    /// Solver spec (repeatable), e.g. `gmres`, `ngmres-3`, `aa-full`, `mr`, `cr`.
    #[arg(long = "solver")]
    solvers: Vec<String>,
    /// Default window for bare `ngmres`/`aa` solver specs, e.g. `5` or `full`.
    #[arg(long)]
    window: Option<String>,
    /// Initial guess: `zeros`, `ones`, or `random:SEED`.
    #[arg(long)]
    x0: Option<String>,
    /// Shorthand for `--x0 random:SEED`.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative residual stopping tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Relative singular-value cutoff for the window least-squares solves.
    #[arg(long)]
    rank_tol: Option<f64>,
    /// Residual update rule: `explicit` or `recursive`.
    #[arg(long)]
    residuals: Option<String>,
    /// Least-squares backend: `svd` or `normal-equations`.
    #[arg(long)]
    lstsq: Option<String>,
    /// Stagnation window (`off` or a positive count).
    #[arg(long)]
    stagnation: Option<String>,
    /// Left preconditioner: `none` or `jacobi`.
    #[arg(long)]
    precondition: Option<String>,
    /// Artifact directory (default `runs/latest`).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overlay(&self) -> ConfigOverlay {
        ConfigOverlay {
            problem: self.problem.clone(),
            solvers: self.solvers.clone(),
            window: self.window.clone(),
            x0: self.x0.clone(),
            seed: self.seed,
            tol: self.tol,
            max_iter: self.max_iter,
            rank_tol: self.rank_tol,
            residuals: self.residuals.clone(),
            lstsq: self.lstsq.clone(),
            stagnation: self.stagnation.clone(),
            precondition: self.precondition.clone(),
            out: self.out.clone(),
        }
    }
}

fn cmd_run(args: &RunArgs) -> Result<bool, Error> {
    let base = match &args.config {
        None => ConfigOverlay::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            ConfigOverlay::from_config_text(&text)?
        }
    };
    let config = args.overlay().resolve_over(base)?;
    let artifact = runner::run(&config)?;
    print!("{}", artifact.summary);
    println!("artifacts: {}", artifact.out_dir.display());
    Ok(artifact.check_failures == 0)
}

fn cmd_check(dir: &PathBuf) -> Result<bool, Error> {
    let (summary, failures) = runner::check_dir(dir)?;
    print!("{summary}");
    Ok(failures == 0)
}

fn cmd_accept() -> bool {
    let outcomes = acceptance::run_all();
    for o in &outcomes {
        println!("{}", o.line());
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    passed == outcomes.len()
}

fn cmd_generate(problem: &str, out: &PathBuf, rhs: bool) -> Result<bool, Error> {
    let spec: ProblemSpec = problem.parse()?;
    let p = spec.build()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let matrix_path = out.join("matrix.mtx");
    let comments = [
        format!("problem: {spec}"),
        format!("label: {}", p.label()),
        format!("class: {}", p.symmetry_class().as_str()),
    ];
    let comment_refs: Vec<&str> = comments.iter().map(String::as_str).collect();
    ngmres::problems::write_matrix_market(&matrix_path, p.a(), &comment_refs)?;
    println!("wrote {}", matrix_path.display());
    if rhs {
        let rhs_path = out.join("rhs.mtx");
        ngmres::problems::write_vector_market(&rhs_path, p.b())?;
        println!("wrote {}", rhs_path.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Check { dir } => cmd_check(dir),
        Command::Accept => Ok(cmd_accept()),
        Command::Generate { problem, out, rhs } => cmd_generate(problem, out, *rhs),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
