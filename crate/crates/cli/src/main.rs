//! `gaze` command line: dataset synthesis, two-stage training, evaluation,
//! inference, shared-attention aggregation, gaze-shift events, and the
//! gradient-check suite.
//!
//! Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure.

mod commands;
mod runcfg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "gaze", version, about = "Gaze-target pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (80/20 train/test split by clip).
    Synth(commands::synth::Args),
    /// Train one stage (spatial or temporal) on a dataset split.
    Train(commands::train::Args),
    /// Evaluate a checkpoint on a dataset split.
    Eval(commands::eval::Args),
    /// Write per-frame heatmaps and in-frame scores for a dataset split.
    Infer(commands::infer::Args),
    /// Aggregate per-person heatmaps into shared-attention detections.
    Shared(commands::shared::Args),
    /// Detect toy-to-eyes gaze shifts from per-frame labels.
    Shifts(commands::shifts::Args),
    /// Run the finite-difference gradient suite over every op.
    Gradcheck(commands::gradcheck::Args),
}

/// Process-level error with its exit code.
pub(crate) enum CliError {
    Config(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<gaze_core::Error> for CliError {
    fn from(e: gaze_core::Error) -> Self {
        use gaze_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Config(_) => CliError::Config(msg),
            E::Data(_) | E::Annotation { .. } | E::Io { .. } | E::Json { .. } | E::Image { .. } => {
                CliError::Data(msg)
            }
            E::Diverged { .. } | E::MetricUndefined(_) => CliError::Numeric(msg),
            E::Tensor(te) => CliError::from(te),
        }
    }
}

impl From<gaze_tensor::TensorError> for CliError {
    fn from(e: gaze_tensor::TensorError) -> Self {
        use gaze_tensor::TensorError as T;
        let msg = e.to_string();
        match e {
            T::GradCheckFailed { .. } | T::NonFinite(_) | T::NonScalarLoss(_) => {
                CliError::Numeric(msg)
            }
            T::Io(_) | T::Format(_) => CliError::Data(msg),
            T::ShapeMismatch(_) | T::InvalidArgument(_) => CliError::Config(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub(crate) type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => commands::synth::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Infer(args) => commands::infer::run(args),
        Command::Shared(args) => commands::shared::run(args),
        Command::Shifts(args) => commands::shifts::run(args),
        Command::Gradcheck(args) => commands::gradcheck::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
