use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mot_harness::pipeline::{
    cmd_analyze, cmd_evaluate, cmd_reflect, cmd_stats, cmd_transform, CandidateSource, Context,
    Overrides,
};

#[derive(Parser)]
#[command(
    name = "mot-harness",
    version,
    about = "Module-of-Thought data pipeline and evaluation harness"
)]
struct Cli {
    /// JSON pipeline config.
    #[arg(long, global = true, default_value = "mot.json")]
    config: PathBuf,
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory holding a mock.json rule file; replaces the HTTP provider.
    #[arg(long, global = true, value_name = "FIXTURE_DIR")]
    mock_provider: Option<PathBuf>,
    /// Interpreter command, e.g. "python3 -I {file}".
    #[arg(long, global = true)]
    runner: Option<String>,
    #[arg(long, global = true)]
    keep_scratch: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite training solutions into modular and clean form, then filter.
    Transform,
    /// Judge candidate programs on the test split and report pass@k.
    Evaluate {
        /// JSON object mapping problem id to a list of programs.
        #[arg(
            long,
            conflicts_with = "references",
            required_unless_present = "references"
        )]
        candidates: Option<PathBuf>,
        /// Use each problem's reference solutions as candidates.
        #[arg(long)]
        references: bool,
        /// Average the per-difficulty means for the `all` row.
        #[arg(long)]
        per_level_mean: bool,
        #[arg(long)]
        top_level_only: bool,
    },
    /// Self-reflection over problems that failed in the last evaluation.
    Reflect {
        #[arg(long)]
        max_rounds: Option<usize>,
    },
    /// Function-count, resource and maintainability profiles.
    Analyze {
        /// Defaults to `<outdir>/evaluate/results.jsonl`.
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long)]
        top_level_only: bool,
    },
    /// Corpus counts per source, difficulty and split.
    Stats,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut overrides = Overrides {
        outdir: cli.outdir,
        workers: cli.workers,
        mock_provider: cli.mock_provider,
        runner: cli.runner,
        keep_scratch: cli.keep_scratch,
        ..Default::default()
    };
    match &cli.command {
        Command::Evaluate {
            per_level_mean,
            top_level_only,
            ..
        } => {
            overrides.per_level_mean = *per_level_mean;
            overrides.top_level_only = *top_level_only;
        }
        Command::Reflect { max_rounds } => overrides.max_rounds = *max_rounds,
        Command::Analyze { top_level_only, .. } => overrides.top_level_only = *top_level_only,
        _ => {}
    }
    let ctx = Context::load(&cli.config, overrides)?;
    match cli.command {
        Command::Transform => cmd_transform(&ctx).map(drop),
        Command::Evaluate { candidates, .. } => {
            let source = candidates.map_or(CandidateSource::References, CandidateSource::File);
            cmd_evaluate(&ctx, &source).map(drop)
        }
        Command::Reflect { .. } => cmd_reflect(&ctx).map(drop),
        Command::Analyze { results, .. } => cmd_analyze(&ctx, results.as_deref()).map(drop),
        Command::Stats => cmd_stats(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
