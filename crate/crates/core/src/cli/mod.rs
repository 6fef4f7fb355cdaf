//! The `nids` command line: one binary with a subcommand per pipeline stage.
//!
//! Every parameter can come from a flag, from a flat `key=value` file given
//! with `--config` (keys are the long flag names, `-` or `_` alike), or from
//! its default; flags win over the file with a warning. Each successful run
//! writes `manifest.txt` into `--out-dir`.

mod commands;
mod manifest;
mod params;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

pub use manifest::{sha256_file, Manifest, MANIFEST_FILE};
pub use params::{normalize_key, parse_config_text, Params};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_ANOMALIES: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, parameter values or config file syntax (exit 64).
    Usage(String),
    /// Anything that goes wrong while running (exit 1).
    Failure(String),
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "nids", version, about = "Flow-based network intrusion detection pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SharedArgs {
    /// Flat key=value parameter file
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<String>,
    /// Seed for every random stream [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Dataset profile: label rules and excluded columns [default: ids2017]
    #[arg(long, global = true, value_parser = ["ids2017", "ids2018", "custom"])]
    pub profile: Option<String>,
    /// Directory for outputs and the run manifest [default: nids-out]
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<String>,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Parse, relabel and clean a flow CSV into clean.csv
    Preprocess {
        /// Raw flow CSV
        #[arg(long, value_name = "CSV")]
        input: Option<String>,
        #[command(flatten)]
        clean: CleanOpts,
    },
    /// Rank features with RFE on the training split
    SelectFeatures {
        /// Flow CSV (raw or preprocessed)
        #[arg(long, value_name = "CSV")]
        data: Option<String>,
        #[command(flatten)]
        clean: CleanOpts,
        #[command(flatten)]
        split: SplitOpts,
        #[command(flatten)]
        rfe: RfeOpts,
    },
    /// Scale and rebalance the training split with SMOTE then ENN
    Resample {
        #[arg(long, value_name = "CSV")]
        data: Option<String>,
        /// Keep only the features listed in this file (one per line)
        #[arg(long, value_name = "FILE")]
        features: Option<String>,
        #[command(flatten)]
        clean: CleanOpts,
        #[command(flatten)]
        split: SplitOpts,
        #[command(flatten)]
        resample: ResampleOpts,
    },
    /// Train the CNN-LSTM and report held-out metrics
    Train {
        #[arg(long, value_name = "CSV")]
        data: Option<String>,
        /// Model file to write [default: <out-dir>/model.nidm]
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
        /// Use these features instead of running RFE
        #[arg(long, value_name = "FILE")]
        features: Option<String>,
        /// Keep every feature (no RFE)
        #[arg(long)]
        no_select: bool,
        /// Train on the scaled split without SMOTE/ENN
        #[arg(long)]
        no_resample: bool,
        #[command(flatten)]
        clean: CleanOpts,
        #[command(flatten)]
        split: SplitOpts,
        #[command(flatten)]
        rfe: RfeOpts,
        #[command(flatten)]
        resample: ResampleOpts,
        #[command(flatten)]
        model: ModelOpts,
    },
    /// Score a labelled flow CSV and write metrics and the confusion matrix
    Evaluate {
        #[arg(long, value_name = "FILE")]
        model: Option<String>,
        #[arg(long, value_name = "CSV")]
        data: Option<String>,
    },
    /// Write per-row class distributions to predictions.csv
    Predict {
        #[arg(long, value_name = "FILE")]
        model: Option<String>,
        #[arg(long, value_name = "CSV")]
        data: Option<String>,
    },
    /// Score a flow stream into <stage>.log; exit 2 on anomalies
    Monitor {
        #[arg(long, value_name = "FILE")]
        model: Option<String>,
        #[arg(long, value_name = "CSV")]
        input: Option<String>,
        /// build, test, deploy or monitor [default: monitor]
        #[arg(long)]
        stage: Option<String>,
        #[command(flatten)]
        alert: AlertOpts,
        /// Keep reading appended rows until the input goes idle
        #[arg(long)]
        follow: bool,
        /// Follow-mode poll interval [default: 500]
        #[arg(long, value_name = "MS")]
        poll_ms: Option<u64>,
        /// Follow-mode idle timeout [default: 5000]
        #[arg(long, value_name = "MS")]
        idle_ms: Option<u64>,
    },
    /// Run the monitor over build, test, deploy and monitor inputs in order
    StageRun {
        #[arg(long, value_name = "FILE")]
        model: Option<String>,
        #[arg(long, value_name = "CSV")]
        build: Option<String>,
        #[arg(long, value_name = "CSV")]
        test: Option<String>,
        #[arg(long, value_name = "CSV")]
        deploy: Option<String>,
        #[arg(long, value_name = "CSV")]
        monitor: Option<String>,
        #[command(flatten)]
        alert: AlertOpts,
    },
}

#[derive(Debug, Args)]
pub struct CleanOpts {
    /// Label rule file (required with --profile custom)
    #[arg(long, value_name = "FILE")]
    pub labels: Option<String>,
    /// Drop columns whose zero fraction exceeds this [default: 0.3]
    #[arg(long)]
    pub zero_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SplitOpts {
    /// Stratified training fraction [default: 0.8]
    #[arg(long)]
    pub train_frac: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RfeOpts {
    /// Features kept by RFE [default: 30]
    #[arg(long)]
    pub rfe_k: Option<usize>,
    /// Features dropped per RFE round [default: 1]
    #[arg(long)]
    pub rfe_step: Option<usize>,
    /// Trees per forest [default: 50]
    #[arg(long)]
    pub trees: Option<usize>,
    /// Maximum tree depth [default: 12]
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Minimum rows per leaf [default: 2]
    #[arg(long)]
    pub min_leaf: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ResampleOpts {
    /// SMOTE neighbours [default: 5]
    #[arg(long)]
    pub smote_k: Option<usize>,
    /// ENN neighbours [default: 3]
    #[arg(long)]
    pub enn_k: Option<usize>,
    /// `auto` or `Class:ratio,...` of the largest class [default: auto]
    #[arg(long)]
    pub smote_target: Option<String>,
}

#[derive(Debug, Args)]
pub struct ModelOpts {
    /// Conv blocks as filters:kernel:pool,... [default: 32:3:2,64:3:2,64:3:2]
    #[arg(long)]
    pub conv: Option<String>,
    /// Dropout rates after the last conv blocks [default: 0.2,0.3]
    #[arg(long)]
    pub dropout: Option<String>,
    /// Stacked LSTM widths [default: 64,32]
    #[arg(long)]
    pub lstm: Option<String>,
    /// [default: 30]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// [default: 256]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Adam step size [default: 0.001]
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AlertOpts {
    /// Minimum confidence for an alert [default: 0.5]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Comma-separated alerting classes [default: every class but Benign]
    #[arg(long)]
    pub anomalous: Option<String>,
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match commands::execute(cli, out, err) {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Failure(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_FAILURE
        }
    }
}

/// Entry point for the `nids` binary.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let (stdout, stderr) = (std::io::stdout(), std::io::stderr());
    run(args, &mut stdout.lock(), &mut stderr.lock())
}
