use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use impulsive_logistic_cli::commands::{self, Format, Output};
use impulsive_logistic_cli::ScenarioConfig;

#[derive(Parser)]
#[command(name = "implog", version, about = "Impulsive logistic equation: closed forms, RK4 oracle and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print A, B, (1-E)A, x0_star and the critical harvest fraction
    Constants(Common),
    /// RK4 trajectory next to the closed-form solution, as CSV
    Simulate(Common),
    /// The periodic solution over the configured number of periods
    Periodic(Common),
    /// Run all verification checks; exit status 1 if any fails
    Verify(Common),
    /// Corrected vs. legacy periodic formula at the impulse times
    Counterexample(Common),
    /// Existence and orbit summary across harvest fractions
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated harvest fractions
        #[arg(long = "e-values", value_delimiter = ',')]
        e_values: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output file (defaults to the config's `output`, then stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the analytic tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Override the analytic-vs-RK4 tolerance
    #[arg(long = "oracle-tol")]
    oracle_tol: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    periods: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Common {
    fn load(&self) -> anyhow::Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::load(&self.config)?;
        if let Some(tol) = self.tol {
            cfg.tolerances.analytic = tol;
        }
        if let Some(tol) = self.oracle_tol {
            cfg.tolerances.oracle = tol;
        }
        if let Some(step) = self.step {
            cfg.step = step;
        }
        if let Some(periods) = self.periods {
            cfg.horizon_periods = periods;
        }
        cfg.validate().context("invalid command-line override")?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<Output> {
    let (common, output) = match &cli.command {
        Command::Constants(c) => (c, commands::cmd_constants(&c.load()?, c.format.unwrap_or(Format::Json))?),
        Command::Simulate(c) => (c, commands::cmd_simulate(&c.load()?, c.format.unwrap_or(Format::Csv))?),
        Command::Periodic(c) => (c, commands::cmd_periodic(&c.load()?, c.format.unwrap_or(Format::Csv))?),
        Command::Verify(c) => (c, commands::cmd_verify(&c.load()?, c.format.unwrap_or(Format::Json))?),
        Command::Counterexample(c) => (
            c,
            commands::cmd_counterexample(&c.load()?, c.format.unwrap_or(Format::Json))?,
        ),
        Command::Sweep { common, e_values } => {
            let values = e_values.clone().unwrap_or_else(commands::default_e_values);
            let out = commands::cmd_sweep(&common.load()?, &values, common.format.unwrap_or(Format::Csv))?;
            (common, out)
        }
    };
    let cfg_out = ScenarioConfig::load(&common.config)?.output;
    match common.out.clone().or(cfg_out) {
        Some(path) => std::fs::write(&path, &output.body)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", output.body),
    }
    Ok(output)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) if out.success => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
