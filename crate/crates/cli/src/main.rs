use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mhd_cli::commands::{
    basis_command, calibrate_command, experiment_command, run_command, Context,
};
use mhd_cli::{parse_config, CliError};

/// Semi-Galerkin MHD solver and verification harness.
///
/// Settings not given in the configuration file may be supplied through environment
/// variables named `MHD_<SECTION>__<KEY>`, for example `MHD_TIME__DT=1e-3`.
#[derive(Parser, Debug)]
#[command(name = "mhd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Directory for every output file.
    #[arg(long, value_name = "PATH", default_value = "out")]
    output_dir: PathBuf,
    /// Worker threads for batches of experiments.
    #[arg(long, value_name = "N", default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the configured problem and write the energy ledger.
    Run(Common),
    /// Run the experiments named by `experiment.id`.
    Experiment(Common),
    /// Recompute and persist the checker constants.
    Calibrate(Common),
    /// Precompute and cache the eigenbases.
    Basis(Common),
}

fn execute(cmd: Command) -> Result<(), CliError> {
    let (Command::Run(c) | Command::Experiment(c) | Command::Calibrate(c) | Command::Basis(c)) =
        &cmd;
    let cfg = parse_config(&c.config)?;
    let ctx = Context {
        output_dir: c.output_dir.clone(),
        threads: c.threads,
        verbose: c.verbose,
    };
    ctx.verbose
        .then(|| eprintln!("configuration {} resolved", c.config.display()));
    match cmd {
        Command::Run(_) => {
            let out = run_command(&cfg, &ctx)?;
            let s = &out.final_state;
            println!(
                "reached t={} in {} steps; |u|^2+|b|^2 = {:e}; ledger {}",
                s.t,
                out.reports.len(),
                s.u.norm_l2_sq() + s.b.norm_l2_sq(),
                ctx.output_dir.join(&cfg.outputs.ledger).display()
            );
        }
        Command::Experiment(_) => {
            let reports = experiment_command(&cfg, &ctx)?;
            let n: usize = reports.iter().map(|r| r.assertions.len()).sum();
            println!("{} experiment(s), {n} assertion(s) passed", reports.len());
        }
        Command::Calibrate(_) => {
            let (store, path) = calibrate_command(&cfg, &ctx)?;
            print!("{}", store.to_text());
            println!("saved {}", path.display());
        }
        Command::Basis(_) => {
            for p in basis_command(&cfg, &ctx)? {
                println!("saved {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
