mod commands;
mod manifest;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use settings::{Settings, CONFIG_ENV};

/// Qualitative spatial features and tree-CRF event classification.
#[derive(Debug, Parser)]
#[command(name = "qsrevent", version)]
struct Cli {
    /// Flat `key = value` configuration file. Command-line flags win over it.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesise a labelled block-world corpus.
    Generate(commands::generate::GenerateArgs),
    /// Write per-segment feature CSVs for one or more kinds.
    Extract(commands::extract::ExtractArgs),
    /// Train one classifier and save a checkpoint.
    Train(commands::train::TrainArgs),
    /// Score a checkpoint on a set of sessions.
    Eval(commands::eval::EvalArgs),
    /// Session-level cross-validation with grid search.
    Xval(commands::xval::XvalArgs),
    /// Compare analytic gradients with central finite differences.
    Gradcheck(commands::gradcheck::GradcheckArgs),
    /// Draw the PCA-embedded trajectories of one factor model as SVG.
    Plot(commands::plot::PlotArgs),
}

/// Training flags shared by `train` and `xval`; unset flags fall back to the
/// configuration file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct HpArgs {
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long = "lr")]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub keep_prob: Option<f64>,
    #[arg(long)]
    pub decay: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub clip_norm: Option<f64>,
}

/// A mistake in how the command was invoked (exit code 1).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

/// How a command that ran to completion went.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    VerificationFailed,
}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Generate(a) => commands::generate::run(a, &settings),
        Command::Extract(a) => commands::extract::run(a, &settings),
        Command::Train(a) => commands::train::run(a, &settings),
        Command::Eval(a) => commands::eval::run(a, &settings),
        Command::Xval(a) => commands::xval::run(a, &settings),
        Command::Gradcheck(a) => commands::gradcheck::run(a, &settings),
        Command::Plot(a) => commands::plot::run(a, &settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(EXIT_VERIFICATION),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_DATA)
            }
        }
    }
}
