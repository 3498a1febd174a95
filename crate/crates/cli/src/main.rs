use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use eslab_core::harness::{run_experiment, write_report, ExperimentConfig, ExperimentKind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    Rates,
    Sandwich,
    L2sum,
    Quadrature,
    Petersen,
    Divergence,
    Distribution,
}

impl From<Experiment> for ExperimentKind {
    fn from(e: Experiment) -> Self {
        match e {
            Experiment::Rates => ExperimentKind::Rates,
            Experiment::Sandwich => ExperimentKind::Sandwich,
            Experiment::L2sum => ExperimentKind::L2sum,
            Experiment::Quadrature => ExperimentKind::Quadrature,
            Experiment::Petersen => ExperimentKind::Petersen,
            Experiment::Divergence => ExperimentKind::Divergence,
            Experiment::Distribution => ExperimentKind::Distribution,
        }
    }
}

/// Run a weighted-discrepancy experiment and write its CSV, JSON summary and gnuplot data.
#[derive(Debug, Parser)]
#[command(name = "eslab", version)]
struct Cli {
    experiment: Experiment,

    /// Experiment config (TOML, or JSON when the file ends in .json).
    #[arg(long)]
    config: PathBuf,

    /// Output directory; defaults to the config's `output` field, then the current directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for every random component; overrides seeds in the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (defaults to one per core).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let mut cfg = ExperimentConfig::load(&cli.config).with_context(|| format!("loading {}", cli.config.display()))?;
    let wanted = ExperimentKind::from(cli.experiment);
    if cfg.experiment != wanted {
        bail!(
            "config describes a `{}` experiment but `{}` was requested",
            cfg.experiment.name(),
            wanted.name()
        );
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let out = cli.out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    let report = run_experiment(&cfg)?;
    let files = write_report(&report, &out)?;
    let mut line = format!("{}: {} rows", wanted.name(), report.rows.len());
    if let Some(fit) = &report.fit {
        line.push_str(&format!(", slope {:.4} (r2 {:.4})", fit.slope, fit.r2));
    }
    println!("{line}");
    println!("wrote {}", files.csv.display());
    println!("wrote {}", files.summary.display());
    println!("wrote {}", files.dat.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
