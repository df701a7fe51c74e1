//! Batch front door for the transport-semigroup toolkit.
//!
//! One invocation runs one command on one graph and writes its artifact
//! family (JSON and/or CSV) into `--out`.  Graphs come from a JSON file
//! (`--graph`) or a built-in template (`--template`, optionally `--radius`
//! and `--seed`).  All exact quantities are serialized as `"p/q"` strings;
//! floating-point columns carry 17 significant digits so they round-trip
//! losslessly.
//!
//! Exit codes: `0` success (and every requested invariant check passed),
//! `1` a check failed, `2` bad flags, `3` file or JSON errors, `4` invalid
//! graph or data, `5` analysis unsupported for this input (reducible graph,
//! missing velocities, non-convergence).

mod artifacts;
mod commands;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use semiflow::{parse_ratio, qi, to_f64, truncate_seeded, GraphSpec, GraphTemplate, Q};

/// Command-line failure with a process exit code.
#[derive(Debug)]
pub enum CliError {
    /// A file could not be read or written.
    Io {
        /// Offending path.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// A file's contents could not be parsed.
    Parse {
        /// Offending path.
        path: PathBuf,
        /// What went wrong.
        message: String,
    },
    /// The graph or initial data is invalid for the command.
    Data(semiflow::Error),
    /// The analysis is not defined for this input.
    Unsupported(semiflow::Error),
    /// The command ran, but a requested invariant check failed.
    CheckFailed(String),
}

impl CliError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Io { .. } | CliError::Parse { .. } => 3,
            CliError::Data(_) => 4,
            CliError::Unsupported(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Parse { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Data(e) | CliError::Unsupported(e) => write!(f, "{e}"),
            CliError::CheckFailed(reason) => write!(f, "check failed: {reason}"),
        }
    }
}

impl From<semiflow::Error> for CliError {
    fn from(e: semiflow::Error) -> Self {
        use semiflow::Error as E;
        match e {
            E::ReducibleOperator
            | E::MissingVelocity { .. }
            | E::SubdivisionTooLarge { .. }
            | E::NonConvergence { .. }
            | E::TimeTooLarge { .. }
            | E::NonPositiveLambda { .. }
            | E::NotAnEigenpair { .. }
            | E::UnknownTemplate { .. }
            | E::InvalidTemplateParameter { .. } => CliError::Unsupported(e),
            other => CliError::Data(other),
        }
    }
}

/// Where the graph comes from: a JSON file or a built-in template.
#[derive(Debug, Args)]
#[command(group = ArgGroup::new("graph_source").required(true).args(["graph", "template"]))]
pub struct Source {
    /// Graph JSON file.
    #[arg(long, value_name = "PATH")]
    graph: Option<PathBuf>,
    /// Built-in template: cycle(n), mixed-cycles(a,b), ladder, random(n).
    #[arg(long, value_name = "NAME", value_parser = parse_template)]
    template: Option<GraphTemplate>,
    /// Truncation radius for templates (cell count for `ladder`).
    #[arg(long, value_name = "N", default_value_t = 3)]
    radius: usize,
    /// Seed for the random(n) template.
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
}

impl Source {
    /// Loads (but does not validate) the requested graph.
    pub fn load(&self) -> Result<GraphSpec, CliError> {
        if let Some(path) = &self.graph {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::Io { path: path.clone(), source })?;
            return GraphSpec::from_json(&text)
                .map_err(|e| CliError::Parse { path: path.clone(), message: e.to_string() });
        }
        let template = self.template.as_ref().expect("clap group guarantees a source");
        Ok(truncate_seeded(template, self.radius, self.seed)?)
    }
}

fn parse_template(text: &str) -> Result<GraphTemplate, String> {
    text.parse::<GraphTemplate>().map_err(|e| e.to_string())
}

/// An inclusive rational grid `a:b:step`.
#[derive(Debug, Clone)]
pub struct RatioGrid {
    /// The expanded grid points, strictly increasing.
    pub points: Vec<Q>,
}

const MAX_GRID_POINTS: usize = 100_000;

fn parse_grid(text: &str) -> Result<RatioGrid, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(format!("expected a:b:step, got {text:?}"));
    };
    let parse = |s: &str| parse_ratio(s).map_err(|e| e.to_string());
    let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
    if a < qi(0) {
        return Err("grid start must be nonnegative".into());
    }
    if step <= qi(0) {
        return Err("grid step must be positive".into());
    }
    if b < a {
        return Err("grid end must not precede its start".into());
    }
    if to_f64(&(&b - &a)) / to_f64(&step) > MAX_GRID_POINTS as f64 {
        return Err(format!("grid would exceed {MAX_GRID_POINTS} points"));
    }
    let mut points = Vec::new();
    let mut t = a;
    while t <= b {
        points.push(t.clone());
        t += &step;
    }
    Ok(RatioGrid { points })
}

fn parse_lambda(text: &str) -> Result<f64, String> {
    let value = match parse_ratio(text) {
        Ok(r) => to_f64(&r),
        Err(_) => text.trim().parse::<f64>().map_err(|e| e.to_string())?,
    };
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err("lambda must be positive and finite".into())
    }
}

fn parse_tol(text: &str) -> Result<f64, String> {
    let value = text.trim().parse::<f64>().map_err(|e| e.to_string())?;
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err("tolerance must be positive and finite".into())
    }
}

/// Output directory for artifacts.
#[derive(Debug, Args)]
pub struct OutDir {
    /// Directory the artifacts are written to (created if absent).
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Parser)]
#[command(
    name = "semiflow",
    version,
    about = "Exact transport-semigroup simulation and spectral analysis on metric graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a graph; report connectivity, irreducibility, and an
    /// attractor certificate (analysis.json).
    Analyze {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        out: OutDir,
    },
    /// Peripheral spectrum: period k, peripheral eigenvalues, subdominant
    /// rho, projection residual (spectral.json).
    Spectral {
        #[command(flatten)]
        source: Source,
        /// Power-iteration stopping tolerance.
        #[arg(long, value_name = "X", default_value_t = 1e-10, value_parser = parse_tol)]
        tol: f64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Exact L1 trajectory on a time grid: norms, defect, and period
    /// residual per sample (series.csv).
    Simulate {
        #[command(flatten)]
        source: Source,
        /// Initial step-function profile (JSON).
        #[arg(long, value_name = "PATH")]
        init: PathBuf,
        /// Sample times a:b:step (inclusive rational grid).
        #[arg(long, value_name = "A:B:STEP", value_parser = parse_grid)]
        tgrid: RatioGrid,
        #[command(flatten)]
        out: OutDir,
    },
    /// Defect decay against the predicted asymptotic period
    /// (periodicity.json + periodicity.csv); exits 1 if the decay check fails.
    Periodicity {
        #[command(flatten)]
        source: Source,
        /// Sample times a:b:step; defaults to 50 multiples of the period.
        #[arg(long, value_name = "A:B:STEP", value_parser = parse_grid)]
        tgrid: Option<RatioGrid>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Resolvent of the generator on an s-grid for each lambda
    /// (resolvent.json + resolvent.csv).
    Resolvent {
        #[command(flatten)]
        source: Source,
        /// Input step-function profile (JSON).
        #[arg(long, value_name = "PATH")]
        init: PathBuf,
        /// Spectral parameters, comma separated (rational or decimal, > 0).
        #[arg(long, value_name = "L1,L2,...", value_delimiter = ',', required = true, value_parser = parse_lambda)]
        lambda: Vec<f64>,
        /// Evaluation points a:b:step inside [0, 1]; defaults to 0:1:1/10.
        #[arg(long, value_name = "A:B:STEP", value_parser = parse_grid)]
        sgrid: Option<RatioGrid>,
        /// Series truncation tolerance.
        #[arg(long, value_name = "X", default_value_t = 1e-9, value_parser = parse_tol)]
        tol: f64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Exact subdivision of a rational-velocity graph to unit speeds
    /// (subdivision.json + subdivided_graph.json).
    Subdivide {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        out: OutDir,
    },
    /// Measure-valued trajectory: variation series plus a weak*-versus-TV
    /// probe (measure_series.csv + probe.csv).
    MeasureSim {
        #[command(flatten)]
        source: Source,
        /// Initial measure (JSON: atoms + step density per edge).
        #[arg(long, value_name = "PATH")]
        init: PathBuf,
        /// Sample times a:b:step (inclusive rational grid).
        #[arg(long, value_name = "A:B:STEP", value_parser = parse_grid)]
        tgrid: RatioGrid,
        /// Piecewise-linear test function (JSON); defaults to a unit hat on
        /// every edge.
        #[arg(long, value_name = "PATH")]
        phi: Option<PathBuf>,
        #[command(flatten)]
        out: OutDir,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { source, out } => commands::analyze(&source, &out.out),
        Command::Spectral { source, tol, out } => commands::spectral(&source, tol, &out.out),
        Command::Simulate { source, init, tgrid, out } => {
            commands::simulate(&source, &init, &tgrid, &out.out)
        }
        Command::Periodicity { source, tgrid, out } => {
            commands::periodicity(&source, tgrid.as_ref(), &out.out)
        }
        Command::Resolvent { source, init, lambda, sgrid, tol, out } => {
            commands::resolvent(&source, &init, &lambda, sgrid.as_ref(), tol, &out.out)
        }
        Command::Subdivide { source, out } => commands::subdivide(&source, &out.out),
        Command::MeasureSim { source, init, tgrid, phi, out } => {
            commands::measure_sim(&source, &init, &tgrid, phi.as_deref(), &out.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
