use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fastrec_cli::commands;
use fastrec_cli::config::{self, Category, CliError, CliResult, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "fastrec", about = "Multimodal top-K recommender toolkit")]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// run configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// override the configured seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// ablation preset: default, without-item, test-item
    #[arg(long, global = true)]
    variant: Option<String>,

    /// worker threads (training itself is single-threaded)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// override the configured output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Filter, split, and persist the corpus plus all frozen graphs
    Prepare,
    /// Train from a prepared directory and write a checkpoint
    Train,
    /// Score the test split from a checkpoint
    Evaluate,
    /// Write decomposition, cross-modal, and phase-comparison reports
    Investigate,
    /// Time training epochs over the hyper-parameter grid
    Bench,
}

fn build_config(args: &Args) -> CliResult<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => config::load(path)?,
        None => {
            return Err(CliError {
                category: Category::Usage,
                message: "--config is required".into(),
            })
        }
    };
    let overrides = Overrides {
        seed: args.seed,
        variant: args.variant.clone(),
        threads: args.threads,
        out: args.out.clone(),
    };
    config::apply_overrides(&mut cfg, &overrides)?;
    Ok(cfg)
}

fn run(args: &Args) -> CliResult<()> {
    let cfg = build_config(args)?;
    match args.command {
        Command::Prepare => commands::cmd_prepare(&cfg),
        Command::Train => commands::cmd_train(&cfg),
        Command::Evaluate => commands::cmd_evaluate(&cfg),
        Command::Investigate => commands::cmd_investigate(&cfg),
        Command::Bench => commands::cmd_bench(&cfg),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.category {
                Category::Usage => 2,
                Category::Config => 3,
                Category::Io => 4,
                Category::Data => 5,
                Category::Compat => 6,
            })
        }
    }
}
