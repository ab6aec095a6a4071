//! `hsm`: tables, sandpile experiments and harmonic-model checks from the
//! command line.
//!
//! Exit codes: 0 pass, 1 semantic negative (forbidden configuration),
//! 2 tolerance or suite failure, 3 input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod common;
mod green;
mod ideal;
mod output;
mod sandpile;
mod xi;

#[derive(Parser)]
#[command(name = "hsm", version, about = "Abelian sandpiles, lattice Green functions and the harmonic model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the Green function and compare it with the walk series.
    Green(GreenArgs),
    /// Stabilization, burning test, counting and entropy estimates.
    #[command(subcommand)]
    Sandpile(SandpileCmd),
    /// Apply the maps xi_g and run the invariant suites.
    #[command(subcommand)]
    Xi(XiCmd),
    /// Ideal membership certificate, H_g(0) and decay profile of a polynomial.
    Ideal(IdealArgs),
}

#[derive(Args)]
pub struct GreenArgs {
    #[arg(long = "d", default_value_t = 2)]
    pub dim: usize,
    /// Defaults to the critical value 2d.
    #[arg(long)]
    pub gamma: Option<i64>,
    #[arg(long, default_value_t = 16)]
    pub radius: usize,
    /// Target absolute error of every entry.
    #[arg(long)]
    pub target: Option<f64>,
    /// Initial quadrature nodes per axis.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Output CSV; defaults to `green_d<d>_g<gamma>_r<radius>.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum SandpileCmd {
    /// Stabilize a grid; writes the stable grid and `<out>.odometer.csv`.
    Stabilize {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Burning test; exit 0 if recurrent, 1 if a forbidden subconfiguration exists.
    Burn {
        #[arg(long)]
        grid: PathBuf,
        /// JSON burn report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Number of recurrent configurations on a window such as `2x2` or `3x3x2`.
    Count {
        #[arg(long)]
        window: String,
        #[arg(long, default_value_t = 4)]
        gamma: i64,
        #[arg(long, value_enum, default_value_t = BackendChoice::Determinant)]
        backend: BackendChoice,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-volume entropy estimates against the quadrature value.
    Entropy {
        #[arg(long = "d", default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        gamma: Option<i64>,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        sides: Vec<usize>,
        /// CSV `side,estimate,gap`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Bruteforce,
    Determinant,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExtensionChoice {
    /// Zero outside the grid.
    Zero,
    /// Height gamma - 1 outside the grid (the recurrent embedding).
    Max,
}

#[derive(Args)]
pub struct TableArgs {
    /// Green table radius; defaults to 16 for d = 2 and 12 otherwise.
    #[arg(long)]
    pub radius: Option<usize>,
}

#[derive(Subcommand)]
pub enum XiCmd {
    /// Evaluate xi_g on a grid; writes a TorusPoint CSV.
    Apply {
        /// Polynomial expression; `f`, `g1`, `g2`, ... name the standard polynomials.
        #[arg(long)]
        g: String,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, value_enum, default_value_t = ExtensionChoice::Zero)]
        extension: ExtensionChoice,
        #[command(flatten)]
        table: TableArgs,
        /// Output CSV; printed to stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one invariant suite on random recurrent configurations.
    Check {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long = "d", default_value_t = 2)]
        dim: usize,
        /// Number of random samples (pairs for separation and additivity).
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        table: TableArgs,
        /// JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare xi_g(v + delta_n) - xi_g(v) with the shifted homoclinic point.
    DemoAddition {
        #[arg(long)]
        g: String,
        #[arg(long)]
        grid: PathBuf,
        /// Site of the added grain, e.g. `0,0`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        site: Vec<i64>,
        #[arg(long, value_enum, default_value_t = ExtensionChoice::Max)]
        extension: ExtensionChoice,
        #[command(flatten)]
        table: TableArgs,
        /// CSV of the predicted difference.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Suite {
    Harmonicity,
    Equivariance,
    Kernel,
    Separation,
    Additivity,
}

#[derive(Args)]
pub struct IdealArgs {
    /// Inline expression such as `(1-u1)^3` or `g2`.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    pub poly: Option<String>,
    /// Polynomial in the `k1 ... kd : coeff` text format.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long = "d", default_value_t = 2)]
    pub dim: usize,
    /// Also print the decay profile of g* . w on a table of this radius.
    #[arg(long)]
    pub decay: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Green(a) => green::run(&a),
        Command::Sandpile(c) => sandpile::run(&c),
        Command::Xi(c) => xi::run(&c),
        Command::Ideal(a) => ideal::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hsm: {}", f.message());
            f.exit_code()
        }
    }
}
