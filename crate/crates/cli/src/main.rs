mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AugmentArgs, ClassifyArgs, EvalArgs, Phase1Args, Phase2Args, VocabArgs};
use config::ConfigFile;

#[derive(Parser, Debug)]
#[command(name = "tmae", version, about = "Two-phase Tsetlin Machine autoencoder pipeline")]
struct Cli {
    /// TOML file with one table per command; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for phase 1 and augmentation.
    #[arg(long, global = true, env = "TMAE_JOBS")]
    jobs: Option<usize>,
    /// Where to write the run manifest (defaults next to the primary output).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Print the resolved configuration and exit without running.
    #[arg(long, global = true)]
    show_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a vocabulary from a corpus.
    Vocab(VocabArgs),
    /// Train per-word knowledge.
    Phase1(Phase1Args),
    /// Train target-word embeddings from stored knowledge.
    Phase2(Phase2Args),
    /// Score embeddings against word-pair benchmarks.
    Eval(EvalArgs),
    /// Write one augmented copy of a labelled corpus.
    Augment(AugmentArgs),
    /// Train and evaluate the sentiment classifier.
    Classify(ClassifyArgs),
    /// Re-run a recorded manifest and check its outputs are reproduced.
    Replay {
        #[arg(value_name = "MANIFEST")]
        path: PathBuf,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<tmae::Error> for CliError {
    fn from(e: tmae::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub struct Context {
    pub jobs: usize,
    pub manifest: Option<PathBuf>,
    pub show_config: bool,
    pub write_manifest: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let jobs = match cli.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    // the global pool only serves augmentation; a second build is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let ctx = Context {
        jobs,
        manifest: cli.manifest,
        show_config: cli.show_config,
        write_manifest: true,
    };
    match cli.command {
        Command::Vocab(a) => commands::execute(a, &file, &ctx),
        Command::Phase1(a) => commands::execute(a, &file, &ctx),
        Command::Phase2(a) => commands::execute(a, &file, &ctx),
        Command::Eval(a) => commands::execute(a, &file, &ctx),
        Command::Augment(a) => commands::execute(a, &file, &ctx),
        Command::Classify(a) => commands::execute(a, &file, &ctx),
        Command::Replay { path } => manifest::replay(&path),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
