use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use qle_cli::commands::{self, FixtureParams, Outcome, SimulateArgs, EXIT_INPUT};

/// Classical/quantum analysis of quantum Langevin equations.
#[derive(Parser)]
#[command(name = "qle", version)]
struct Cli {
    /// Absolute and relative tolerance (default 1e-9, or $QLE_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a coefficient file describes a unitary equation.
    Validate { path: PathBuf },
    /// Decide whether the whole noise space is classical.
    Classify {
        path: PathBuf,
        /// Exit with status 1 unless the equation is classical.
        #[arg(long)]
        require_classical: bool,
    },
    /// Split the noise space into classical and purely quantum parts.
    Decompose {
        path: PathBuf,
        #[arg(long, default_value_t = 2000)]
        search_budget: usize,
    },
    /// Evaluate the Lindblad semigroup on an observable.
    Lindblad {
        path: PathBuf,
        /// sx, sy, sz, id, diag:a,b,... or a JSON matrix.
        #[arg(long)]
        observable: String,
        #[arg(long)]
        time: f64,
    },
    /// Check detailed balance with respect to the normalized trace.
    DetailedBalance { path: PathBuf },
    /// Monte-Carlo estimate of the semigroup of a classical equation.
    Simulate {
        path: PathBuf,
        #[arg(long)]
        observable: String,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 10_000)]
        ntraj: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        reunitarize: bool,
    },
    /// Write a built-in coefficient file.
    Examples {
        name: String,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Outcome {
    if let Command::Examples { name, theta, lambda, rho, gamma, output } = &cli.command {
        let params = FixtureParams { theta: *theta, lambda: *lambda, rho: *rho, gamma: *gamma };
        return commands::examples(name, &params, output.as_deref());
    }
    let tol = match commands::resolve_tolerance(cli.tol) {
        Ok(t) => t,
        Err(e) => return Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), code: EXIT_INPUT },
    };
    match &cli.command {
        Command::Validate { path } => commands::validate(path, &tol),
        Command::Classify { path, require_classical } => commands::classify(path, &tol, *require_classical),
        Command::Decompose { path, search_budget } => commands::decompose_cmd(path, &tol, *search_budget),
        Command::Lindblad { path, observable, time } => commands::lindblad(path, &tol, observable, *time),
        Command::DetailedBalance { path } => commands::detailed_balance(path, &tol),
        Command::Simulate { path, observable, time, dt, ntraj, seed, reunitarize } => {
            let args = SimulateArgs { observable, time: *time, dt: *dt, ntraj: *ntraj, seed: *seed, reunitarize: *reunitarize };
            commands::simulate(path, &tol, &args)
        }
        Command::Examples { .. } => unreachable!("handled above"),
    }
}

fn main() {
    let outcome = run(Cli::parse());
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    std::process::exit(outcome.code);
}
