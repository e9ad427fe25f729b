use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use isac_cli::{cmd_constellation, cmd_pareto, cmd_tradeoff, cmd_validate, ExperimentConfig, OutputFormat};

#[derive(Parser)]
#[command(name = "isac", version, about = "ISAC constellation, beamforming and trade-off experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one constellation per eta1 grid point.
    Constellation(Common),
    /// Sweep the sensing/communication Pareto bound.
    Pareto(Common),
    /// Pareto sweep plus BER and detection simulation.
    Tradeoff(Common),
    /// Run the invariant suite and report measured errors.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; defaults are used for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Master seed (overrides scenario.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(o) = &self.output {
            cfg.output_dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.scenario.seed = s;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        Ok(cfg)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            b = b.num_threads(n);
        }
        Ok(b.build()?)
    }
}

type Produce = fn(&ExperimentConfig) -> Result<Vec<PathBuf>>;

fn produce(common: &Common, f: Produce) -> Result<bool> {
    let cfg = common.resolve()?;
    for path in common.pool()?.install(|| f(&cfg))? {
        println!("{}", path.display());
    }
    Ok(true)
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Constellation(c) => produce(c, cmd_constellation),
        Command::Pareto(c) => produce(c, cmd_pareto),
        Command::Tradeoff(c) => produce(c, cmd_tradeoff),
        Command::Validate(c) => {
            let cfg = c.resolve()?;
            let report = c.pool()?.install(|| cmd_validate(&cfg));
            println!("{report}");
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
