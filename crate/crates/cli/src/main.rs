//! `railvib`: synthetic data, feature extraction and One-Class SVM
//! experiments from the command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 solver non-convergence.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "railvib", version, about = "Bearing anomaly detection from vibration signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write labelled synthetic recordings, speed tracks and a manifest.
    Synth(SynthArgs),
    /// Segment signals and write a feature CSV.
    Extract(ExtractArgs),
    /// Train a One-Class SVM on the healthy rows of a feature CSV.
    Train(TrainArgs),
    /// Grid-search nu and gamma on healthy training and eval draws.
    Gridsearch(GridArgs),
    /// Score a feature CSV with a saved model.
    Classify(ClassifyArgs),
    /// Confusion matrix and rates of a scores CSV.
    Evaluate(EvaluateArgs),
    /// Balanced accuracy as a function of the number of MFCCs.
    Sweep(SweepArgs),
    /// Repeated train/test protocol over every configured feature set.
    Run(RunArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// Configuration file (TOML, or JSON).
    #[arg(long, short)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Signal file format.
    #[arg(long, value_parser = ["wav", "csv"], default_value = "wav")]
    format: String,
    /// Fault kinds, comma separated (none, outer_race, inner_race, cage,
    /// rolling_element, distributed).
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
    #[arg(long)]
    severity: Option<f64>,
    /// Torque levels in percent, comma separated (0, 33, 66, 100).
    #[arg(long, value_delimiter = ',')]
    torques: Option<Vec<u32>>,
    /// Speed levels in rpm, comma separated.
    #[arg(long, value_delimiter = ',')]
    speeds: Option<Vec<f64>>,
    /// Seconds spent at each speed level.
    #[arg(long)]
    hold_s: Option<f64>,
    /// Seconds of linear ramp between speed levels.
    #[arg(long)]
    ramp_s: Option<f64>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Output feature CSV.
    #[arg(long, short)]
    out: PathBuf,
    /// Recording manifest.
    #[arg(long, conflicts_with_all = ["signal", "synthetic"])]
    manifest: Option<PathBuf>,
    /// A single signal file (WAV or CSV).
    #[arg(long, conflicts_with = "synthetic")]
    signal: Option<PathBuf>,
    /// Speed track of `--signal`.
    #[arg(long, requires = "signal", conflicts_with = "rpm")]
    speed_track: Option<PathBuf>,
    /// Constant speed of `--signal` in rpm.
    #[arg(long, requires = "signal")]
    rpm: Option<f64>,
    /// Label of `--signal`: P (healthy) or N (damaged).
    #[arg(long, requires = "signal", default_value = "P")]
    label: String,
    /// Source identifier of `--signal`; defaults to the file stem.
    #[arg(long, requires = "signal")]
    source_id: Option<String>,
    /// Generate the synthetic corpus of the configuration in memory.
    #[arg(long)]
    synthetic: bool,
    /// Feature sets, comma separated (TD, SD, ENV_AMP, AMS, MFCC).
    #[arg(long, value_delimiter = ',')]
    sets: Option<Vec<String>>,
    /// Number of MFCCs to keep (the filterbank grows to match if needed).
    #[arg(long)]
    mfcc_count: Option<usize>,
    /// Also write every segment's AMS matrix as CSV into this directory.
    #[arg(long)]
    ams_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    /// Feature CSV.
    #[arg(long, short)]
    features: PathBuf,
    /// Feature set (TD, SD, ENV_AMP, AMS, MFCC).
    #[arg(long)]
    set: String,
    /// Append the rotational frequency.
    #[arg(long)]
    with_fr: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[command(flatten)]
    select: SelectArgs,
    /// Output model file.
    #[arg(long, short)]
    out: PathBuf,
    /// Train on every healthy row with this nu (requires --gamma).
    #[arg(long, requires = "gamma")]
    nu: Option<f64>,
    #[arg(long, requires = "nu")]
    gamma: Option<f64>,
    /// Seed of the train/eval draw when searching the grid.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[command(flatten)]
    select: SelectArgs,
    /// Per-cell results CSV.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, short)]
    model: PathBuf,
    /// Feature CSV holding the model's columns.
    #[arg(long, short)]
    features: PathBuf,
    /// Output scores CSV.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Scores CSV written by `classify`.
    #[arg(long, short)]
    scores: PathBuf,
    /// Report CSV.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Feature CSV with at least as many MFCC columns as the largest count.
    #[arg(long, short)]
    features: PathBuf,
    #[arg(long)]
    with_fr: bool,
    /// MFCC counts: a list (1,2,5) or a range (1-40).
    #[arg(long)]
    counts: Option<String>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
    /// Also run the MFCC-count sweep.
    #[arg(long)]
    sweep: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Extract(a) => commands::extract(a),
        Command::Train(a) => commands::train(a),
        Command::Gridsearch(a) => commands::gridsearch(a),
        Command::Classify(a) => commands::classify(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Run(a) => commands::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("railvib: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
