use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pcsim::harness::{load_config, run_sweep, write_results, SweepSpec, SweepVar};
use pcsim::Error;

#[derive(Parser)]
#[command(name = "pcsim", version, about = "Massive MIMO pilot contamination simulator")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the configured scenario once.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Repeat the scenario over values of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        var: SweepVar,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        emit_plots: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cmd: Cmd) -> Result<(), Error> {
    let (config, seed, spec, emit_plots, out) = match cmd {
        Cmd::Run { config, seed, out } => (config, seed, None, false, out),
        Cmd::Sweep {
            config,
            var,
            values,
            seed,
            emit_plots,
            out,
        } => (config, seed, Some(SweepSpec::new(var, values)?), emit_plots, out),
    };
    let mut cfg = load_config(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let spec = match spec {
        Some(s) => s,
        None => SweepSpec::new(SweepVar::Antennas, vec![cfg.antennas as f64])?,
    };
    let table = run_sweep(&cfg, &spec)?;
    for path in write_results(&table, &out, emit_plots)? {
        println!("{}", path.display());
    }
    Ok(())
}
