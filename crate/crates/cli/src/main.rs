//! `windtree`: seeded experiment driver around the core library.
//!
//! All randomness flows through ChaCha12, a counter-based generator, so
//! reruns with the same (config, seed) produce byte-identical artifacts on
//! the same build. A manifest (config echo, version, wall time) is written
//! beside every artifact. `WTD_THREADS` caps worker parallelism; the
//! current orchestrator runs trajectories sequentially, which trivially
//! respects any cap, and the effective value is recorded in the manifest.
//!
//! Exit codes: 0 success, 1 internal error, 2 configuration/domain error,
//! 3 insufficient data.

mod commands;
mod manifest;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "windtree", version, about = "Wind-tree billiard and IET renormalization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate wind-tree trajectories and emit log-spaced distance samples
    /// as CSV with columns t, d_now, d_max, avg_d.
    Simulate {
        /// Horizontal obstacle side, in (0, 1)
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        /// Vertical obstacle side, in (0, 1)
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        /// Remove the obstacles (ballistic control run)
        #[arg(long, default_value_t = false)]
        free: bool,
        /// Fixed direction angle in (0, pi/2); one trajectory
        #[arg(long, conflicts_with = "n_directions")]
        theta: Option<f64>,
        /// Number of seeded random directions; emits per-sample medians
        #[arg(long)]
        n_directions: Option<usize>,
        #[arg(long, default_value_t = 1e6)]
        t_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an interval exchange orbit with its cocycle and emit return-cycle
    /// counts, pairings and cumulative |pairing| sums on a geometric grid.
    IetRun {
        /// TOML definition file (alphabet, orders, exact lengths, cocycle)
        #[arg(long)]
        def: PathBuf,
        /// Starting point in [0, total)
        #[arg(long)]
        x: f64,
        /// Orbit length
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the Lyapunov exponent of the cocycle class of a definition
    /// file along the Zorich-accelerated renormalization.
    Lyapunov {
        #[arg(long)]
        def: PathBuf,
        #[arg(long, default_value_t = 20_000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a log-log exponent to a CSV series.
    Fit {
        /// Input CSV: either simulate output (t,d_now,d_max,avg_d) or a
        /// two-column n/value series such as iet-run output
        #[arg(long = "in")]
        input: PathBuf,
        /// Series kind: maxdistance, avgdistance, cyclesum, pairingabs
        #[arg(long)]
        kind: String,
        /// Fit window as lo:hi on the abscissa
        #[arg(long)]
        window: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// End-to-end diffusion-exponent pipeline with a pass/fail verdict
    /// against the band [0.5, 0.8].
    Reproduce {
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        #[arg(long, default_value_t = false)]
        free: bool,
        #[arg(long, default_value_t = 1e7)]
        t_max: f64,
        #[arg(long, default_value_t = 64)]
        n_directions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output JSON path (default exponents.json)
        #[arg(long, default_value = "exponents.json")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { a, b, free, theta, n_directions, t_max, seed, out } => {
            commands::simulate(a, b, free, theta, n_directions, t_max, seed, &out)
        }
        Command::IetRun { def, x, n, out } => commands::iet_run(&def, x, n, &out),
        Command::Lyapunov { def, steps, seed, out } => {
            commands::lyapunov(&def, steps, seed, &out)
        }
        Command::Fit { input, kind, window, seed, out } => {
            commands::fit(&input, &kind, &window, seed, &out)
        }
        Command::Reproduce { a, b, free, t_max, n_directions, seed, out } => {
            commands::reproduce(a, b, free, t_max, n_directions, seed, &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
