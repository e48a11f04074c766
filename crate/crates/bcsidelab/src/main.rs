//! `bcsidelab` — rate regions and block-error simulation for AWGN broadcast
//! channels with receiver message side information.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bcsidelab::cli;

#[derive(Parser)]
#[command(
    name = "bcsidelab",
    version,
    about = "Rate regions and finite-blocklength simulation for AWGN broadcast \
             channels with receiver message side information"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the three-receiver region boundary over a power-split grid.
    Region {
        /// Per-symbol power budget P.
        #[arg(long)]
        power: f64,
        /// Comma-separated noise variances, strongest receiver first.
        #[arg(long, value_delimiter = ',')]
        noise: Vec<f64>,
        /// Point count ("101") or explicit sorted alpha list ("0,0.5,1").
        #[arg(long, default_value = "101")]
        alpha_grid: String,
        /// Output CSV path (header: alpha,R1,R2,R3).
        #[arg(long)]
        out: PathBuf,
    },
    /// Find a rate triple the XOR layer achieves but no multiplexed variant
    /// does, and report each variant's violated constraint.
    Witness {
        #[arg(long)]
        power: f64,
        #[arg(long, value_delimiter = ',')]
        noise: Vec<f64>,
        /// Membership margin.
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        /// Optional JSON output path (also printed to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scenario file and write per-receiver statistics as CSV.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the full statistics record (with receiver 1's layer
        /// breakdown) as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Re-run a scenario across blocklengths, realizing its target rates.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated blocklengths, e.g. "16,32,48".
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compare two scenarios differing only in the coding scheme.
    Compare {
        #[arg(long)]
        scenario_a: PathBuf,
        #[arg(long)]
        scenario_b: PathBuf,
        /// Optional JSON output path (also printed to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn configure_workers(workers: Option<usize>) {
    if let Some(w) = workers {
        // Trial tallies are order-independent, so the thread count never
        // changes results; ignore failure if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global();
    }
}

fn run(args: Args) -> bcsidelab::Result<()> {
    match args.command {
        Command::Region {
            power,
            noise,
            alpha_grid,
            out,
        } => {
            let grid = cli::parse_alpha_grid(&alpha_grid)?;
            cli::cmd_region(power, &noise, &grid, &out)
        }
        Command::Witness {
            power,
            noise,
            eps,
            out,
        } => {
            let json = cli::cmd_witness(power, &noise, eps, out.as_deref())?;
            print!("{json}");
            Ok(())
        }
        Command::Simulate {
            scenario,
            out,
            json,
            seed,
            workers,
        } => {
            configure_workers(workers);
            cli::cmd_simulate(&scenario, &out, json.as_deref(), seed)
        }
        Command::Sweep {
            scenario,
            n_list,
            out,
            seed,
            workers,
        } => {
            configure_workers(workers);
            cli::cmd_sweep(&scenario, &n_list, &out, seed)
        }
        Command::Compare {
            scenario_a,
            scenario_b,
            out,
            workers,
        } => {
            configure_workers(workers);
            let json = cli::cmd_compare(&scenario_a, &scenario_b, out.as_deref())?;
            print!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
