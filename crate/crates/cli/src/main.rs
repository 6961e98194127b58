//! `hinfraud` command-line tool.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use hinfraud::bench::BenchMode;

use crate::commands::{BenchOptions, Context};
use crate::config::{ClassifierChoice, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "hinfraud", version, about = "Collective fraud detection over transaction networks")]
struct Cli {
    /// Generator config (generate) or run config (other subcommands), TOML.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; every random component derives its own stream from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for feature columns and forest trees.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Dataset directory.
    #[arg(long)]
    data: PathBuf,
    /// Window to use, 1-based; defaults to the last.
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic dataset.
    Generate,
    /// List downsized meta-paths and the feature columns they pair into.
    InspectPaths {
        #[arg(long)]
        data: PathBuf,
    },
    /// Fit a classifier on the training rows and save it.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum)]
        classifier: Option<ClassifierChoice>,
        /// Feature table to train on instead of the dataset's base features.
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Score the test rows with a saved model.
    Predict {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Baseline plus collective iterations on one window.
    Run {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum)]
        classifier: Option<ClassifierChoice>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Score saved predictions, or run every window and the significance study.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum)]
        classifier: Option<ClassifierChoice>,
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Time dense against decomposed feature computation.
    Bench {
        #[command(flatten)]
        data: DataArgs,
        /// Pair indices; all pairs when omitted.
        #[arg(long = "pair")]
        pairs: Vec<usize>,
        #[arg(long = "mode", value_parser = parse_mode)]
        modes: Vec<BenchMode>,
        /// Let the benchmark use the whole worker pool.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        dense_work_cap: Option<usize>,
    },
    /// Write `[X, Z]` with a provenance sidecar.
    DumpFeatures {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum)]
        classifier: Option<ClassifierChoice>,
        /// Test labels to aggregate; the baseline classifier's when omitted.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<BenchMode, String> {
    BenchMode::from_str(s).map_err(|e| e.to_string())
}

fn usage_error(err: clap::Error) -> ExitCode {
    if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
        let _ = err.print();
        return ExitCode::SUCCESS;
    }
    let _ = err.print();
    let mut cmd = Cli::command();
    let sub = std::env::args().skip(1).find_map(|a| cmd.find_subcommand(&a).map(|s| s.get_name().to_string()));
    let help = match sub {
        Some(name) => cmd.find_subcommand_mut(&name).expect("just found").render_help(),
        None => cmd.render_help(),
    };
    eprintln!("\n{help}");
    ExitCode::from(1)
}

fn run(cli: Cli) -> hinfraud::Result<()> {
    let ctx = Context { config_path: cli.config.clone(), seed: cli.seed, out_dir: cli.out_dir.clone() };
    if let Command::Generate = cli.command {
        return commands::cmd_generate(&ctx);
    }
    let mut config = RunConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Train { classifier, .. }
        | Command::Run { classifier, .. }
        | Command::Evaluate { classifier, .. }
        | Command::DumpFeatures { classifier, .. } => config.choose_classifier(*classifier),
        _ => {}
    }
    if let Command::Run { max_iters: Some(m), .. } = cli.command {
        config.max_iterations = m;
    }
    config.validate()?;
    match &cli.command {
        Command::Generate => unreachable!("handled above"),
        Command::InspectPaths { data } => commands::cmd_inspect_paths(&ctx, data),
        Command::Train { data, features, .. } => {
            commands::cmd_train(&ctx, &config, &data.data, data.window, features.as_deref())
        }
        Command::Predict { data, model, features } => {
            commands::cmd_predict(&ctx, &config, &data.data, data.window, model, features.as_deref())
        }
        Command::Run { data, .. } => commands::cmd_run(&ctx, &config, &data.data, data.window),
        Command::Evaluate { data, predictions, .. } => {
            commands::cmd_evaluate(&ctx, &config, &data.data, data.window, predictions.as_deref())
        }
        Command::Bench { data, pairs, modes, parallel, dense_work_cap } => {
            let modes = if modes.is_empty() { vec![BenchMode::Dense, BenchMode::Decomposed] } else { modes.clone() };
            let opts = BenchOptions { pairs: pairs.clone(), modes, parallel: *parallel, dense_work_cap: *dense_work_cap };
            commands::cmd_bench(&ctx, &config, &data.data, data.window, &opts)
        }
        Command::DumpFeatures { data, predictions, .. } => {
            commands::cmd_dump_features(&ctx, &config, &data.data, data.window, predictions.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => return usage_error(e),
    };
    let level = match log::LevelFilter::from_str(&cli.log_level) {
        Ok(level) => level,
        Err(_) => {
            let err = Cli::command().error(ErrorKind::InvalidValue, format!("unknown log level {:?}", cli.log_level));
            return usage_error(err);
        }
    };
    env_logger::Builder::new().filter_level(level).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(3);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 3 })
        }
    }
}
