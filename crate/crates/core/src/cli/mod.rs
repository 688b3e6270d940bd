//! Command-line front end.
//!
//! Every option can be given as a flag or as a kebab-case key in a TOML file
//! passed with `--config`; flags win. Unknown keys are rejected. Exit codes:
//! 0 on success, 2 for usage or configuration errors, 3 for numerical
//! failures.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

static QUIET: AtomicBool = AtomicBool::new(false);

/// Progress on stderr, silenced by `--quiet`.
macro_rules! progress {
    ($($arg:tt)*) => {
        if !$crate::cli::quiet() {
            eprintln!($($arg)*);
        }
    };
}
pub(crate) use progress;

pub(crate) fn quiet() -> bool {
    QUIET.load(Ordering::Relaxed)
}

/// Declares a group of optional settings shared by flags and config files.
macro_rules! option_group {
    ($(#[$m:meta])* $name:ident { $( $(#[$fm:meta])* $field:ident : $ty:ty ),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, PartialEq, clap::Args, serde::Deserialize)]
        #[serde(rename_all = "kebab-case")]
        pub struct $name {
            $( $(#[$fm])* pub $field: Option<$ty>, )*
        }

        impl $name {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            /// Fill fields unset on the command line from `file`.
            pub fn merge(self, file: Self) -> Self {
                Self { $( $field: self.$field.or(file.$field), )* }
            }
        }
    };
}

option_group!(OutputOpts {
    /// Directory for CSV and JSON artifacts [default: fracstep-out]
    #[arg(long)]
    output_dir: PathBuf,
});

option_group!(GridOpts {
    /// Number of grid points
    #[arg(long)]
    grid: usize,
    /// Periodic domain [lo, hi)
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    domain: Vec<f64>,
});

option_group!(SolverOpts {
    /// Imaginary time step [default: 0.01]
    #[arg(long)]
    dt: f64,
    /// Per-step sup-norm change at convergence [default: 1e-12]
    #[arg(long)]
    tol: f64,
    /// Iteration cap [default: 1000000]
    #[arg(long)]
    max_iters: usize,
    /// Splitting scheme: lie, strang or sixth [default: sixth]
    #[arg(long)]
    scheme: String,
    /// Seed for the random initial states [default: 0]
    #[arg(long)]
    seed: u64,
    /// Single refinement stage with this time step (replaces the default)
    #[arg(long)]
    refine_dt: f64,
    /// Steps for --refine-dt [default: 10000]
    #[arg(long)]
    refine_steps: usize,
    /// Disable refinement, including the finite-well default
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    no_refine: bool,
});

option_group!(SolveOpts {
    /// ring, harmonic, finite-well, double-well or file:<path> [default: harmonic]
    #[arg(long)]
    potential: String,
    /// Fractional order [default: 2]
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Number of states [default: 1]
    #[arg(long)]
    n_states: usize,
    /// Restrict to one parity sector: none, even or odd [default: none]
    #[arg(long)]
    parity: String,
});

option_group!(RingOpts {
    /// Comma-separated orders [default: 1.5,1.8,2,2.2]
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Highest state index [default: 10]
    #[arg(long)]
    n_max: usize,
});

option_group!(SweepOpts {
    /// Potential [default: harmonic]
    #[arg(long)]
    potential: String,
    /// Comma-separated orders [default: 1.5,1.6,...,2.4]
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// States per order [default: 5]
    #[arg(long)]
    n_states: usize,
});

option_group!(WellOpts {
    /// Comma-separated orders [default: 1.5,1.6,...,2.4]
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Barrier height [default: 100]
    #[arg(long)]
    v0: f64,
    /// Well half width [default: 1]
    #[arg(long)]
    half_width: f64,
});

option_group!(TunnelOpts {
    /// Potential [default: double-well]
    #[arg(long)]
    potential: String,
    /// Comma-separated orders [default: 1.8,1.85,...,2.2]
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Order for a real-time trace of the left-well state (no trace if unset)
    #[arg(long)]
    trace_alpha: f64,
    /// Real time step of the trace [default: 0.01]
    #[arg(long)]
    trace_dt: f64,
    /// Steps between trace rows [default: 100]
    #[arg(long)]
    trace_every: usize,
    /// Trace length [default: π/(E₁−E₀)]
    #[arg(long)]
    trace_duration: f64,
});

option_group!(MlOpts {
    /// Comma-separated series parameters [default: 0.9,1,1.1]
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
    /// Second parameter [default: 1]
    #[arg(long)]
    beta: f64,
    /// First sample [default: -5]
    #[arg(long, allow_negative_numbers = true)]
    x_min: f64,
    /// Last sample [default: 5]
    #[arg(long, allow_negative_numbers = true)]
    x_max: f64,
    /// Number of samples [default: 1001]
    #[arg(long)]
    points: usize,
});

#[derive(Debug, Parser)]
#[command(
    name = "fracstep",
    version,
    about = "Eigenstates of the fractional Schrödinger equation"
)]
pub struct Cli {
    /// TOML file of option values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print errors as JSON on stderr
    #[arg(long, global = true)]
    pub error_json: bool,
    /// Suppress progress messages and the summary on stdout
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest eigenstates of one potential
    Solve {
        #[command(flatten)]
        opts: SolveOpts,
        #[command(flatten)]
        grid: GridOpts,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Ring errors against the closed form
    RingBenchmark {
        #[command(flatten)]
        opts: RingOpts,
        #[command(flatten)]
        grid: GridOpts,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Energies across fractional orders
    SpectrumSweep {
        #[command(flatten)]
        opts: SweepOpts,
        #[command(flatten)]
        grid: GridOpts,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Finite-well bound-state counts across fractional orders
    WellCount {
        #[command(flatten)]
        opts: WellOpts,
        #[command(flatten)]
        grid: GridOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Double-well splitting and tunneling frequency
    Tunneling {
        #[command(flatten)]
        opts: TunnelOpts,
        #[command(flatten)]
        grid: GridOpts,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Mittag-Leffler profiles against the Gaussian
    MlEval {
        #[command(flatten)]
        opts: MlOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
}

/// Settings read from `--config`, checked against the keys the
/// subcommand accepts.
struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    fn load(path: Option<&std::path::Path>, allowed: &[&[&str]]) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self {
                table: toml::Table::new(),
            });
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for key in table.keys() {
            // keys are spelled like the flags
            let snake = key.replace('-', "_");
            if key.contains('_') || !allowed.iter().any(|group| group.contains(&snake.as_str())) {
                return Err(Error::Config(format!(
                    "{}: unknown key '{key}'",
                    path.display()
                )));
            }
        }
        Ok(Self { table })
    }

    fn group<T: DeserializeOwned>(&self) -> Result<T> {
        T::deserialize(toml::Value::Table(self.table.clone()))
            .map_err(|e| Error::Config(e.to_string()))
    }
}

fn report(error_json: bool, kind: &str, message: &str, code: i32) {
    if error_json {
        let v = serde_json::json!({ "error": kind, "message": message, "exit_code": code });
        eprintln!("{v}");
    } else {
        eprintln!("error: {message}");
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let error_json = args.iter().any(|a| a == "--error-json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            if error_json {
                report(true, "usage", e.to_string().trim(), EXIT_CONFIG);
            } else {
                eprint!("{e}");
            }
            return EXIT_CONFIG;
        }
    };
    QUIET.store(cli.quiet, Ordering::Relaxed);
    match commands::execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_SOLVER
            };
            report(error_json, e.kind(), &e.to_string(), code);
            code
        }
    }
}
