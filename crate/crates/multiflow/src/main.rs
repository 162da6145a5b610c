use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use multiflow::parallel::with_threads;
use multiflow::{run, Command, Overrides, SystemConfig};

/// Certified attractor-repeller decompositions of differential inclusions
/// on a grid.
///
/// Exit status: 0 when every certificate passes, 2 when the pipeline ran
/// but a certificate failed, 1 on any error.
#[derive(Parser, Debug)]
#[command(name = "multiflow", version)]
struct Cli {
    /// Pipeline to run.
    #[arg(value_enum)]
    command: Command,
    /// System configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Parameter value; for sweeps this replaces the sample list.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Time step.
    #[arg(long)]
    tau: Option<f64>,
    /// Subdivisions per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(cli: &Cli) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(&cli.config).with_context(|| format!("reading {}", cli.config.display()))?;
    let mut cfg = SystemConfig::parse(&text).with_context(|| format!("in {}", cli.config.display()))?;
    let overrides = Overrides {
        lambda: cli.lambda,
        tau: cli.tau,
        grid: cli.grid.clone(),
    };
    overrides.apply(&mut cfg)?;
    let outcome = with_threads(cli.threads, || run(&cfg, cli.command))?;
    outcome.write(&cli.out).with_context(|| format!("writing to {}", cli.out.display()))?;
    print!("{}", outcome.summary);
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    // clap's own usage-error status is 2, which is reserved for failed
    // certificates here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
