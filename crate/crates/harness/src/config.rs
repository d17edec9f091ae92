//! Experiment configuration: which problem, which solvers, which start.
//!
//! A configuration can come from a flat `key = value` file, from CLI
//! flags, or both; flags override the file field by field. The resolved
//! configuration is echoed into every run directory in the same format,
//! so artifacts are self-describing and `check` can rebuild the problem a
//! stored trace came from.
//!
//! File schema (one `key = value` per line, `#` starts a comment):
//!
//! ```text
//! problem = conv_diffusion:n=32,sigma=33,tau=33,shifted_skew
//! solver = gmres            # repeatable
//! solver = ngmres:1
//! window = full             # default window for bare `ngmres` / `aa`
//! x0 = random:42            # zeros | ones | random:<seed>
//! tol = 1e-10
//! max_iter = 100
//! rank_tol = 1e-12
//! residuals = explicit      # explicit | recursive
//! lstsq = svd               # svd | normal
//! stagnation = 3            # off | <count>
//! precondition = none       # none | jacobi
//! out = runs/fig1
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ngmres::linalg::Vector;
use ngmres::problems::{
    build_convection_diffusion, build_cyclic_shift, build_identity, random_problem,
    read_matrix_market, read_vector_market, seeded_x0, to_shifted_skew, Problem, SymmetryClass,
};
use ngmres::solvers::{
    anderson, conjugate_residual, gmres, mr_iteration, ngmres, ngmres1_three_term, IterationTrace,
    LstsqMethod, Preconditioner, ResidualMode, SolveConfig, Window,
};

use crate::error::{Error, Result};

fn bad(field: &str, message: impl fmt::Display) -> Error {
    Error::Config(format!("{field}: {message}"))
}

/// How the system `A x = b` is obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    /// Five-point convection–diffusion stencil on an `n × n` grid;
    /// `shifted_skew` replaces `A` by `I − skew(h²K)`, the shifted
    /// skew-symmetric companion of the mesh-normalized stencil.
    ConvDiffusion { n: usize, sigma: f64, tau: f64, shifted_skew: bool },
    /// Cyclic shift matrix of order `n` with `b = e₁`.
    CyclicShift { n: usize },
    Identity { n: usize },
    /// Seeded dense random matrix of a given symmetry class.
    Random { n: usize, class: SymmetryClass, seed: u64 },
    /// Matrix read from a Matrix Market file; `rhs` optionally replaces
    /// the default right-hand side `b = A·1`.
    MatrixMarket { matrix: PathBuf, rhs: Option<PathBuf> },
}

/// Splits `name:key=value,key=value,flag` into the name and its fields.
fn split_spec(s: &str) -> (&str, Vec<(&str, Option<&str>)>) {
    match s.split_once(':') {
        None => (s.trim(), Vec::new()),
        Some((name, rest)) => {
            let fields = rest
                .split(',')
                .map(|kv| match kv.split_once('=') {
                    Some((k, v)) => (k.trim(), Some(v.trim())),
                    None => (kv.trim(), None),
                })
                .collect();
            (name.trim(), fields)
        }
    }
}

struct Fields<'a> {
    field: &'a str,
    map: BTreeMap<&'a str, Option<&'a str>>,
}

impl<'a> Fields<'a> {
    fn new(field: &'a str, pairs: Vec<(&'a str, Option<&'a str>)>) -> Self {
        let map = pairs.into_iter().collect();
        Self { field, map }
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.map.remove(key) {
            None => Ok(None),
            Some(None) => Err(bad(self.field, format!("'{key}' needs a value"))),
            Some(Some(v)) => v
                .parse()
                .map(Some)
                .map_err(|e| bad(self.field, format!("'{key}': {e}"))),
        }
    }

    fn require<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.take(key)?
            .ok_or_else(|| bad(self.field, format!("missing '{key}'")))
    }

    /// A bare flag (`shifted_skew`) or explicit boolean (`shifted_skew=true`).
    fn flag(&mut self, key: &str) -> Result<bool> {
        match self.map.remove(key) {
            None => Ok(false),
            Some(None) => Ok(true),
            Some(Some(v)) => v
                .parse()
                .map_err(|_| bad(self.field, format!("'{key}': expected true or false, got '{v}'"))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.into_keys().next() {
            None => Ok(()),
            Some(k) => Err(bad(self.field, format!("unknown field '{k}'"))),
        }
    }
}

impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, pairs) = split_spec(s);
        let mut f = Fields::new("problem", pairs);
        let spec = match name {
            "conv_diffusion" | "conv-diffusion" => ProblemSpec::ConvDiffusion {
                n: f.require("n")?,
                sigma: f.take("sigma")?.unwrap_or(0.0),
                tau: f.take("tau")?.unwrap_or(0.0),
                shifted_skew: f.flag("shifted_skew")?,
            },
            "cyclic_shift" | "cyclic-shift" => ProblemSpec::CyclicShift { n: f.require("n")? },
            "identity" => ProblemSpec::Identity { n: f.require("n")? },
            "random" => ProblemSpec::Random {
                n: f.require("n")?,
                class: f.take("class")?.unwrap_or(SymmetryClass::General),
                seed: f.take("seed")?.unwrap_or(0),
            },
            "matrix_market" | "matrix-market" => ProblemSpec::MatrixMarket {
                matrix: f.require("path")?,
                rhs: f.take("rhs")?,
            },
            other => {
                return Err(bad(
                    "problem",
                    format!(
                        "unknown generator '{other}' (expected conv_diffusion, cyclic_shift, \
                         identity, random or matrix_market)"
                    ),
                ))
            }
        };
        f.finish()?;
        Ok(spec)
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::ConvDiffusion { n, sigma, tau, shifted_skew } => {
                write!(f, "conv_diffusion:n={n},sigma={sigma},tau={tau}")?;
                if *shifted_skew {
                    write!(f, ",shifted_skew")?;
                }
                Ok(())
            }
            ProblemSpec::CyclicShift { n } => write!(f, "cyclic_shift:n={n}"),
            ProblemSpec::Identity { n } => write!(f, "identity:n={n}"),
            ProblemSpec::Random { n, class, seed } => {
                write!(f, "random:n={n},class={},seed={seed}", class.as_str())
            }
            ProblemSpec::MatrixMarket { matrix, rhs } => {
                write!(f, "matrix_market:path={}", matrix.display())?;
                if let Some(r) = rhs {
                    write!(f, ",rhs={}", r.display())?;
                }
                Ok(())
            }
        }
    }
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Problem> {
        match self {
            ProblemSpec::ConvDiffusion { n, sigma, tau, shifted_skew } => {
                let k = build_convection_diffusion(*n, *sigma, *tau)?;
                if *shifted_skew {
                    let h = 1.0 / (*n as f64 + 1.0);
                    let label = format!("{}-shifted-skew", k.label());
                    Ok(to_shifted_skew(&k.a().scaled(h * h))?.with_label(label))
                } else {
                    Ok(k)
                }
            }
            ProblemSpec::CyclicShift { n } => Ok(build_cyclic_shift(*n)?),
            ProblemSpec::Identity { n } => Ok(build_identity(*n)?),
            ProblemSpec::Random { n, class, seed } => Ok(random_problem(*n, *class, *seed)?),
            ProblemSpec::MatrixMarket { matrix, rhs } => {
                let p = read_matrix_market(matrix)?;
                match rhs {
                    None => Ok(p),
                    Some(path) => {
                        let b = read_vector_market(path)?;
                        let label = p.label().to_string();
                        Ok(Problem::new(p.a().clone(), b, p.symmetry_class(), label)?)
                    }
                }
            }
        }
    }
}

/// Initial iterate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum X0Spec {
    Zeros,
    Ones,
    SeededRandom(u64),
}

impl FromStr for X0Spec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zeros" => Ok(X0Spec::Zeros),
            "ones" => Ok(X0Spec::Ones),
            other => match other.strip_prefix("random:") {
                Some(seed) => seed
                    .parse()
                    .map(X0Spec::SeededRandom)
                    .map_err(|_| bad("x0", format!("bad seed '{seed}'"))),
                None => Err(bad(
                    "x0",
                    format!("expected zeros, ones or random:<seed>, got '{other}'"),
                )),
            },
        }
    }
}

impl fmt::Display for X0Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            X0Spec::Zeros => write!(f, "zeros"),
            X0Spec::Ones => write!(f, "ones"),
            X0Spec::SeededRandom(seed) => write!(f, "random:{seed}"),
        }
    }
}

impl X0Spec {
    pub fn build(&self, dim: usize) -> Vector {
        match self {
            X0Spec::Zeros => Vector::zeros(dim),
            X0Spec::Ones => Vector::ones(dim),
            X0Spec::SeededRandom(seed) => seeded_x0(dim, *seed),
        }
    }
}

fn parse_window(s: &str, field: &str) -> Result<Window> {
    if s == "full" {
        Ok(Window::Full)
    } else {
        s.parse()
            .map(Window::Size)
            .map_err(|_| bad(field, format!("expected a window size or 'full', got '{s}'")))
    }
}

/// One solver to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverSpec {
    Gmres,
    Mr,
    Cr,
    /// Three-term recurrence form of the window-1 method.
    Ngmres1,
    Ngmres(Window),
    Anderson(Window),
}

impl SolverSpec {
    /// Parses `gmres | mr | cr | ngmres1 | ngmres:<m|full> | aa:<m|full>`;
    /// a bare `ngmres` or `aa` takes `default_window` (full if unset).
    /// The canonical dashed names (`ngmres-3`) parse too, so stored
    /// artifact names round-trip.
    pub fn parse(s: &str, default_window: Option<Window>) -> Result<Self> {
        let s = s.trim();
        let (name, window) = match s.split_once([':', '-']) {
            Some((n, w)) => (n, Some(w)),
            None => (s, None),
        };
        let win = |w: Option<&str>| -> Result<Window> {
            match w {
                Some(w) => parse_window(w, "solver"),
                None => Ok(default_window.unwrap_or(Window::Full)),
            }
        };
        match (name, window) {
            ("gmres", None) => Ok(SolverSpec::Gmres),
            ("mr", None) => Ok(SolverSpec::Mr),
            ("cr", None) => Ok(SolverSpec::Cr),
            ("ngmres1", None) => Ok(SolverSpec::Ngmres1),
            ("ngmres", w) => Ok(SolverSpec::Ngmres(win(w)?)),
            ("aa" | "anderson", w) => Ok(SolverSpec::Anderson(win(w)?)),
            _ => Err(bad(
                "solver",
                format!(
                    "unknown solver '{s}' (expected gmres, mr, cr, ngmres1, ngmres:<m|full> \
                     or aa:<m|full>)"
                ),
            )),
        }
    }

    /// Canonical name, safe for file names: `ngmres-3`, `aa-full`, ….
    pub fn name(&self) -> String {
        match self {
            SolverSpec::Gmres => "gmres".into(),
            SolverSpec::Mr => "mr".into(),
            SolverSpec::Cr => "cr".into(),
            SolverSpec::Ngmres1 => "ngmres1".into(),
            SolverSpec::Ngmres(w) => format!("ngmres-{w}"),
            SolverSpec::Anderson(w) => format!("aa-{w}"),
        }
    }

    pub fn run(&self, p: &Problem, x0: &Vector, cfg: &SolveConfig) -> Result<IterationTrace> {
        Ok(match self {
            SolverSpec::Gmres => gmres(p, x0, cfg)?,
            SolverSpec::Mr => mr_iteration(p, x0, cfg)?,
            SolverSpec::Cr => conjugate_residual(p, x0, cfg)?,
            SolverSpec::Ngmres1 => ngmres1_three_term(p, x0, cfg)?,
            SolverSpec::Ngmres(w) => ngmres(p, x0, *w, cfg)?,
            SolverSpec::Anderson(w) => anderson(p, x0, *w, cfg)?,
        })
    }

    /// The window against which the residual-orthogonality relations hold
    /// for this solver, or `None` when a different (or no) family applies.
    pub fn orthogonality_window(&self) -> Option<Window> {
        match self {
            SolverSpec::Gmres => Some(Window::Full),
            SolverSpec::Mr => Some(Window::Size(0)),
            SolverSpec::Ngmres1 => Some(Window::Size(1)),
            SolverSpec::Ngmres(w) => Some(*w),
            SolverSpec::Cr | SolverSpec::Anderson(_) => None,
        }
    }

    /// Anderson's orthogonality family uses the `M⁻¹` pull-back instead.
    pub fn anderson_window(&self) -> Option<Window> {
        match self {
            SolverSpec::Anderson(w) => Some(*w),
            _ => None,
        }
    }

    /// Whether the method minimizes the residual norm each step, which
    /// makes its recorded norms monotone; Anderson does not.
    pub fn is_residual_minimizing(&self) -> bool {
        !matches!(self, SolverSpec::Anderson(_))
    }
}

impl fmt::Display for SolverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Left preconditioner applied to the problem before every solver runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PreconditionSpec {
    #[default]
    None,
    /// Diagonal (Jacobi) preconditioner built from `diag(A)`.
    Jacobi,
}

impl FromStr for PreconditionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(PreconditionSpec::None),
            "jacobi" => Ok(PreconditionSpec::Jacobi),
            other => Err(bad("precondition", format!("expected none or jacobi, got '{other}'"))),
        }
    }
}

impl fmt::Display for PreconditionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreconditionSpec::None => write!(f, "none"),
            PreconditionSpec::Jacobi => write!(f, "jacobi"),
        }
    }
}

impl PreconditionSpec {
    /// The preconditioner for `p`, when one was requested.
    pub fn build(&self, p: &Problem) -> Result<Option<Preconditioner>> {
        match self {
            PreconditionSpec::None => Ok(None),
            PreconditionSpec::Jacobi => Ok(Some(Preconditioner::jacobi(p)?)),
        }
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverSpec>,
    pub x0: X0Spec,
    pub solve: SolveConfig,
    pub precondition: PreconditionSpec,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// The flat `key = value` echo written into the run directory.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("problem = {}\n", self.problem));
        for solver in &self.solvers {
            s.push_str(&format!("solver = {solver}\n"));
        }
        s.push_str(&format!("x0 = {}\n", self.x0));
        s.push_str(&format!("tol = {:e}\n", self.solve.tol));
        s.push_str(&format!("max_iter = {}\n", self.solve.max_iter));
        s.push_str(&format!("rank_tol = {:e}\n", self.solve.rank_tol));
        let residuals = match self.solve.residual_mode {
            ResidualMode::Explicit => "explicit",
            ResidualMode::Recursive => "recursive",
        };
        s.push_str(&format!("residuals = {residuals}\n"));
        let lstsq = match self.solve.lstsq_method {
            LstsqMethod::Svd => "svd",
            LstsqMethod::NormalEquations => "normal",
        };
        s.push_str(&format!("lstsq = {lstsq}\n"));
        match self.solve.stagnation_window {
            None => s.push_str("stagnation = off\n"),
            Some(w) => s.push_str(&format!("stagnation = {w}\n")),
        }
        s.push_str(&format!("precondition = {}\n", self.precondition));
        s
    }
}

/// A partially specified configuration: what one source (file or flags)
/// said, before layering.
#[derive(Clone, Debug, Default)]
pub struct ConfigOverlay {
    pub problem: Option<String>,
    pub solvers: Vec<String>,
    pub window: Option<String>,
    pub x0: Option<String>,
    /// Shorthand that forces `x0 = random:<seed>`.
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub rank_tol: Option<f64>,
    pub residuals: Option<String>,
    pub lstsq: Option<String>,
    pub stagnation: Option<String>,
    pub precondition: Option<String>,
    pub out: Option<PathBuf>,
}

impl ConfigOverlay {
    /// Parses the flat `key = value` file format.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut o = ConfigOverlay::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(&format!("line {}", lineno + 1), "expected 'key = value'"))?;
            let (key, value) = (key.trim(), value.trim().to_string());
            if value.is_empty() {
                return Err(bad(key, "empty value"));
            }
            match key {
                "problem" => o.problem = Some(value),
                "solver" => o.solvers.push(value),
                "window" => o.window = Some(value),
                "x0" => o.x0 = Some(value),
                "seed" => {
                    o.seed =
                        Some(value.parse().map_err(|_| bad("seed", format!("bad seed '{value}'")))?)
                }
                "tol" => {
                    o.tol =
                        Some(value.parse().map_err(|_| bad("tol", format!("bad value '{value}'")))?)
                }
                "max_iter" => {
                    o.max_iter = Some(
                        value.parse().map_err(|_| bad("max_iter", format!("bad value '{value}'")))?,
                    )
                }
                "rank_tol" => {
                    o.rank_tol = Some(
                        value.parse().map_err(|_| bad("rank_tol", format!("bad value '{value}'")))?,
                    )
                }
                "residuals" => o.residuals = Some(value),
                "lstsq" => o.lstsq = Some(value),
                "stagnation" => o.stagnation = Some(value),
                "precondition" => o.precondition = Some(value),
                "out" => o.out = Some(PathBuf::from(value)),
                other => return Err(bad(other, "unknown key")),
            }
        }
        Ok(o)
    }

    /// Layers `self` (the stronger source, e.g. CLI flags) over `base`
    /// and resolves the result. A non-empty solver list in `self`
    /// replaces the base list entirely.
    pub fn resolve_over(self, base: ConfigOverlay) -> Result<ExperimentConfig> {
        let pick = |a: Option<String>, b: Option<String>| a.or(b);

        let problem_str = pick(self.problem, base.problem)
            .ok_or_else(|| bad("problem", "required (no file default)"))?;
        let problem: ProblemSpec = problem_str.parse()?;

        let window = match pick(self.window, base.window) {
            None => None,
            Some(w) => Some(parse_window(&w, "window")?),
        };

        let solver_strings = if self.solvers.is_empty() { base.solvers } else { self.solvers };
        let mut solvers = Vec::new();
        for s in &solver_strings {
            solvers.push(SolverSpec::parse(s, window)?);
        }
        if solvers.is_empty() {
            solvers.push(SolverSpec::Gmres);
        }

        let seed = self.seed.or(base.seed);
        let x0 = match (seed, pick(self.x0, base.x0)) {
            (Some(seed), _) => X0Spec::SeededRandom(seed),
            (None, Some(s)) => s.parse()?,
            (None, None) => X0Spec::Zeros,
        };

        let defaults = SolveConfig::default();
        let residual_mode = match pick(self.residuals, base.residuals).as_deref() {
            None => defaults.residual_mode,
            Some("explicit") => ResidualMode::Explicit,
            Some("recursive") => ResidualMode::Recursive,
            Some(other) => {
                return Err(bad("residuals", format!("expected explicit or recursive, got '{other}'")))
            }
        };
        let lstsq_method = match pick(self.lstsq, base.lstsq).as_deref() {
            None => defaults.lstsq_method,
            Some("svd") => LstsqMethod::Svd,
            Some("normal") => LstsqMethod::NormalEquations,
            Some(other) => return Err(bad("lstsq", format!("expected svd or normal, got '{other}'"))),
        };
        let stagnation_window = match pick(self.stagnation, base.stagnation).as_deref() {
            None => defaults.stagnation_window,
            Some("off") => None,
            Some(v) => Some(
                v.parse()
                    .map_err(|_| bad("stagnation", format!("expected off or a count, got '{v}'")))?,
            ),
        };
        let solve = SolveConfig {
            max_iter: self.max_iter.or(base.max_iter).unwrap_or(defaults.max_iter),
            tol: self.tol.or(base.tol).unwrap_or(defaults.tol),
            rank_tol: self.rank_tol.or(base.rank_tol).unwrap_or(defaults.rank_tol),
            residual_mode,
            lstsq_method,
            stagnation_window,
        };
        solve.validate()?;

        let precondition = match pick(self.precondition, base.precondition) {
            None => PreconditionSpec::None,
            Some(s) => s.parse()?,
        };

        let out = self.out.or(base.out).unwrap_or_else(|| PathBuf::from("runs/latest"));

        Ok(ExperimentConfig { problem, solvers, x0, solve, precondition, out })
    }
}
