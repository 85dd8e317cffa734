mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use framelab::FrameError;

/// Frame bounds, duals, classification and expansion diagnostics for
/// sequences in ℓ^p spaces.
#[derive(Debug, Parser)]
#[command(name = "framelab", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Named example system (see `framelab reproduce --list` for scripts).
    #[arg(long, global = true, conflicts_with = "frame")]
    pub builtin: Option<String>,

    /// Frame definition file (JSON).
    #[arg(long, global = true)]
    pub frame: Option<PathBuf>,

    /// Exponent of the coefficient space.
    #[arg(long, global = true, default_value_t = 2.0)]
    pub p: f64,

    /// Comma-separated positive weights of the coefficient space.
    #[arg(long, global = true, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,

    /// Truncation levels `n:m,n:m,...`, strictly increasing.
    #[arg(long, global = true, value_parser = parse_level, value_delimiter = ',')]
    pub ladder: Option<Vec<(usize, usize)>>,

    /// Expansion horizon.
    #[arg(long, global = true, default_value_t = 60)]
    pub nmax: usize,

    /// Convergence tolerance (default: 0 for exact inputs, 1e-9 otherwise).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Seed for randomized probes and samples.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the machine-readable report here.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,

    /// Operator-norm estimator: spectral, oracle, heuristic, or auto.
    #[arg(long, global = true, default_value = "auto")]
    pub estimator: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame bounds along the truncation ladder in both conventions.
    Bounds,
    /// Canonical dual, left-inverse family and sampled duals.
    Duals {
        /// Number of sampled duals.
        #[arg(long, default_value_t = 3)]
        samples: usize,
    },
    /// Classify the sequence generated by an operator.
    Classify {
        /// Operator matrix file (rows = ambient dimension, columns = terms).
        #[arg(long)]
        op: Option<PathBuf>,
    },
    /// Partial-sum residuals of primal and dual expansions.
    Expand {
        /// Expansion partner as a builtin name (default: the builtin's partner).
        #[arg(long, conflicts_with = "partner_frame")]
        partner: Option<String>,
        /// Expansion partner from a frame file.
        #[arg(long)]
        partner_frame: Option<PathBuf>,
        /// Target vector, e.g. `1,0,-1/2` (default e1).
        #[arg(long)]
        probe: Option<String>,
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
        /// Write the residual trace as CSV (one file per side, suffixed).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a named example script.
    Reproduce {
        /// Script name.
        name: Option<String>,
        /// List the available scripts.
        #[arg(long)]
        list: bool,
    },
    /// Type preservation under a bounded operator V.
    Transform {
        /// Matrix of V (JSON rows).
        #[arg(long)]
        op: Option<PathBuf>,
        /// Builtin system to solve `V g_i = h_i` for.
        #[arg(long)]
        onto: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Primal,
    Dual,
    Both,
}

fn parse_level(s: &str) -> Result<(usize, usize), String> {
    let (n, m) = s.split_once(':').ok_or_else(|| format!("expected n:m, got `{s}`"))?;
    let n = n.trim().parse().map_err(|_| format!("bad term count in `{s}`"))?;
    let m = m.trim().parse().map_err(|_| format!("bad dimension in `{s}`"))?;
    Ok((n, m))
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Input(String),
}

impl From<FrameError> for Failure {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::LowerBoundViolation { .. }
            | FrameError::SingularFrameOperator
            | FrameError::NotSurjective { .. }
            | FrameError::TransformInfeasible { .. }
            | FrameError::InvariantViolation(_) => Failure::Verification(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

const EXIT_VERIFICATION: u8 = 2;
const EXIT_INPUT: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let style = match output::Style::from_env() {
        Ok(style) => style,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    match commands::run(&cli, style) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFICATION),
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFICATION)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
