//! `bench` — convergence sweeps for tensor-network quadrature.
//!
//! Exit codes: 0 success, 1 usage/configuration problems, 2 runtime failures.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use tensorquad_cli::config::{parse_set, Overrides, RunConfig, UsageError};
use tensorquad_cli::{expr_cmd, record, runner};

#[derive(Parser)]
#[command(
    name = "bench",
    version,
    about = "Tensor-network quadrature: convergence sweeps against reference values"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file; emit CSV records.
    Run(SweepArgs),
    /// Emit only the brute-force grid sums for a config (small n only).
    Oracle(SweepArgs),
    /// Integrate a one-off expression such as "(f(x)+g(y))^2".
    Expr(ExprArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Path to a `key = value` config file.
    config: PathBuf,
    /// Replace the seed list, e.g. `--seed 0,1,2`.
    #[arg(long, value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    /// Replace the bond-dimension list.
    #[arg(long, value_delimiter = ',')]
    chi: Option<Vec<usize>>,
    /// Replace the grid-size list.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Write records here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent sweep cells.
    #[arg(long)]
    threads: Option<usize>,
    /// Override any config key, e.g. `--set delta=0.1` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct ExprArgs {
    /// Expression text, e.g. "f(x)*g(y) + f(x)^2".
    text: String,
    /// Function definitions, one `name = kind ...` per line.
    #[arg(long)]
    bindings: Option<PathBuf>,
    /// Quadrature rule for every variable: gauss:<G> or uniform:<G>.
    #[arg(long, default_value = "gauss:8")]
    rule: String,
    /// Integration interval for every variable (negative bounds welcome).
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    interval: String,
    /// Write the value here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => sweep(args, false),
        Command::Oracle(args) => sweep(args, true),
        Command::Expr(args) => {
            let value = expr_cmd::integrate_expression(
                &args.text,
                args.bindings.as_deref(),
                &args.rule,
                &args.interval,
            )?;
            emit(args.out.as_deref(), &format!("{value}\n"))
        }
    }
}

fn sweep(args: SweepArgs, oracle_only: bool) -> anyhow::Result<()> {
    let overrides = Overrides {
        seeds: args.seed,
        chis: args.chi,
        grids: args.grid,
        out: args.out,
        threads: args.threads,
        sets: args.set.iter().map(|s| parse_set(s)).collect::<anyhow::Result<_>>()?,
    };
    let cfg = RunConfig::load(&args.config, &overrides)?;
    let records = runner::run_sweep(&cfg, oracle_only)?;
    emit(cfg.out.as_deref(), &record::to_csv(&records))
}

fn emit(out: Option<&std::path::Path>, payload: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| anyhow::anyhow!("cannot write `{}`: {e}", path.display())),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}
