//! `kspread`: Krylov spreading statistics from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

const EXIT_VALIDATION: u8 = 2;
const EXIT_UNKNOWN_SUBCOMMAND: u8 = 64;
const EXIT_MALFORMED: u8 = 65;

#[derive(Parser)]
#[command(name = "kspread", version, about = "Spread complexity and Krylov-basis statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where the system comes from and which times to evaluate.
#[derive(Args, Clone, Debug)]
pub struct InputArgs {
    /// System specification JSON.
    #[arg(long, conflicts_with = "krylov", required_unless_present = "krylov")]
    pub system: Option<PathBuf>,
    /// Lanczos coefficients as written by `lanczos --out`.
    #[arg(long)]
    pub krylov: Option<PathBuf>,
    /// Overrides the seed of the system specification.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Time-evolution strategy.
    #[arg(long, default_value = "krylov")]
    pub propagator: String,
}

#[derive(Args, Clone, Debug)]
pub struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Lanczos coefficients (and optionally the Krylov basis) as JSON.
    Lanczos {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        include_basis: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Krylov amplitudes and probabilities, one row per (t, n).
    Spread {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Generalized spread complexities C_m(t).
    Gsc {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        m: Vec<u32>,
        /// Append variance and entropy columns.
        #[arg(long)]
        stats: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Spreading distribution at one time as JSON {t, weights}.
    Pdf {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        time: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Characteristic function χ(u) at one time.
    Charfun {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        u: UGrid,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Spreading echo |χ(u)|² at one time.
    Echo {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        u: UGrid,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Spread entropy over time.
    Entropy {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Closed-form su(2) coherent-state statistics.
    Su2 {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long)]
        j: f64,
        #[command(flatten)]
        times: TimeArgs,
        /// Add a column from the matrix pipeline.
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Closed-form su(1,1) statistics for case I or II.
    Su11 {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        omega: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value = "I")]
        case: String,
        #[command(flatten)]
        times: TimeArgs,
        /// Add a column from an adaptively truncated representation.
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// GUE ensemble: Lanczos statistics and mean GSC curves.
    Rmt {
        #[arg(long = "L")]
        dim: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        m: Vec<u32>,
        #[arg(long, default_value_t = 5.0)]
        vmax: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Initial state of the GSC curves: uniform or e0.
        #[arg(long, default_value = "uniform")]
        initial: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Continuum-limit averaged GSC curve.
    Continuum {
        #[arg(long = "L", default_value_t = 512)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 5.0)]
        vmax: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Finite-time bounds on GSC, spread entropy and modified cost changes.
    Bounds {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Infinite-time averages of C_m and of the variance.
    Longtime {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        m: Vec<u32>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Clone, Debug)]
pub struct UGrid {
    #[arg(long)]
    pub time: f64,
    /// Upper end (exclusive) of the u grid; 2π by default.
    #[arg(long)]
    pub u_max: Option<f64>,
    /// Number of u samples; the Krylov dimension by default.
    #[arg(long)]
    pub u_points: Option<usize>,
}

#[derive(Args, Clone, Debug)]
pub struct TimeArgs {
    #[arg(long, default_value_t = 0.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                ErrorKind::InvalidSubcommand => ExitCode::from(EXIT_UNKNOWN_SUBCOMMAND),
                _ => ExitCode::from(EXIT_VALIDATION),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_malformed_input() {
                ExitCode::from(EXIT_MALFORMED)
            } else {
                ExitCode::from(EXIT_VALIDATION)
            }
        }
    }
}

fn run(command: Command) -> krylov_spread::Result<()> {
    use commands as c;
    match command {
        Command::Lanczos {
            input,
            include_basis,
            out,
        } => c::lanczos(&input, include_basis, &out),
        Command::Spread { input, out } => c::spread(&input, &out),
        Command::Gsc { input, m, stats, out } => c::gsc(&input, &m, stats, &out),
        Command::Pdf { input, time, out } => c::pdf(&input, time, &out),
        Command::Charfun { input, u, out } => c::charfun(&input, &u, &out),
        Command::Echo { input, u, out } => c::echo(&input, &u, &out),
        Command::Entropy { input, out } => c::entropy(&input, &out),
        Command::Su2 {
            alpha,
            gamma,
            delta,
            j,
            times,
            numeric,
            out,
        } => c::su2(alpha, gamma, delta, j, &times, numeric, &out),
        Command::Su11 {
            lambda,
            omega,
            beta,
            h,
            case,
            times,
            numeric,
            out,
        } => c::su11(lambda, omega, beta, h, &case, &times, numeric, &out),
        Command::Rmt {
            dim,
            samples,
            seed,
            m,
            vmax,
            points,
            initial,
            out,
        } => c::rmt(dim, samples, seed, &m, vmax, points, &initial, &out),
        Command::Continuum {
            dim,
            m,
            vmax,
            points,
            out,
        } => c::continuum(dim, m, vmax, points, &out),
        Command::Bounds { input, tau, m, out } => c::bounds(&input, tau, m, &out),
        Command::Longtime { input, m, out } => c::longtime(&input, &m, &out),
    }
}
