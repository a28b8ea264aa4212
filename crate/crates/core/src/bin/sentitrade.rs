use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sentitrade::pipeline::synthetic::{generate, SynthOptions};
use sentitrade::pipeline::{compare, describe, run, run_all, RunConfig, Stage};
use sentitrade::{Error, Result};

#[derive(Parser)]
#[command(name = "sentitrade", version, about = "Sentiment-aware crypto forecasting and trading backtests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured run directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate inputs and filter posts.
    Ingest(RunArgs),
    /// Label posts and aggregate daily sentiment.
    Label(RunArgs),
    /// Assemble and standardize the feature matrix.
    Features(RunArgs),
    /// Report the VIF elimination.
    Select(RunArgs),
    /// Tune and fit every configured model.
    Train(RunArgs),
    /// Trade the test frames and compare with the benchmarks.
    Backtest(RunArgs),
    /// Write the report tables.
    Report(RunArgs),
    /// Run one stage by name, or `all`.
    Run {
        #[command(flatten)]
        args: RunArgs,
        #[arg(long, default_value = "all")]
        stage: String,
    },
    /// Side-by-side summary of two finished runs.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
    },
    /// Write synthetic inputs and sample configurations.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 400)]
        days: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn load(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = std::path::absolute(out).map_err(|e| Error::Config(vec![format!("--out: {e}")]))?;
    }
    Ok(cfg)
}

fn stage(args: &RunArgs, s: Stage) -> Result<String> {
    Ok(describe(&run(&load(args)?, &[s])?))
}

fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Ingest(a) => stage(&a, Stage::Ingest),
        Command::Label(a) => stage(&a, Stage::Label),
        Command::Features(a) => stage(&a, Stage::Features),
        Command::Select(a) => stage(&a, Stage::Select),
        Command::Train(a) => stage(&a, Stage::Train),
        Command::Backtest(a) => stage(&a, Stage::Backtest),
        Command::Report(a) => stage(&a, Stage::Report),
        Command::Run { args, stage: name } => {
            let cfg = load(&args)?;
            if name == "all" {
                Ok(describe(&run_all(&cfg)?))
            } else {
                let s: Stage = name.parse().map_err(|e: Error| Error::Config(vec![e.to_string()]))?;
                Ok(describe(&run(&cfg, &[s])?))
            }
        }
        Command::Compare { run_a, run_b } => Ok(compare(&run_a, &run_b)?.to_text()),
        Command::Synth { out, days, seed } => {
            let files = generate(
                &out,
                &SynthOptions {
                    days,
                    seed,
                    ..SynthOptions::default()
                },
            )?;
            Ok(format!(
                "{}\n{}\n{}\n",
                files.btc.display(),
                files.btc_no_sentiment.display(),
                files.eth.display()
            ))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sentitrade: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
