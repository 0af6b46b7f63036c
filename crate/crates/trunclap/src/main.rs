use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::Parser;
use trunclap::{Command, Config, Context};

fn experiment_parser() -> impl TypedValueParser<Value = Command> {
    PossibleValuesParser::new(Command::ALL.map(Command::id)).map(|s| s.parse::<Command>().expect("listed id"))
}

/// Experiments for truncated Laplacian equations. Exits with 0 iff every check passes.
#[derive(Parser)]
#[command(name = "trunclap", version)]
struct Cli {
    #[arg(value_parser = experiment_parser())]
    experiment: Command,
    /// Config file of `key = value` lines
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// RNG seed; overrides `seed` in the config
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for CSV artifacts
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Independent sub-runs executed concurrently
    #[arg(long)]
    jobs: Option<usize>,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(&cli.config).with_context(|| format!("reading {}", cli.config.display()))?;
    let mut cfg = Config::parse(&text).with_context(|| format!("parsing {}", cli.config.display()))?;
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed);
    }
    if let Some(jobs) = cli.jobs {
        cfg.set("jobs", jobs);
    }
    let out = match cli.out {
        Some(dir) => Some(dir),
        None => cfg.get::<PathBuf>("out")?,
    };
    let ctx = Context { seed: cfg.get_or("seed", 1)?, out, jobs: cfg.get_or("jobs", 1)? };
    // flags already live in the context; keep the echoed parameters to the experiment's own keys
    let mut echo = Config::default();
    for (k, v) in cfg.pairs().filter(|(k, _)| !matches!(*k, "seed" | "jobs" | "out")) {
        echo.set(k, v);
    }
    let report = cli.experiment.run(&echo, &ctx).with_context(|| format!("running {}", cli.experiment.id()))?;
    print!("{}", report.render());
    Ok(report.pass())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
