//! Dataset plumbing behind the `cellseg` binary: configuration and presets, the
//! challenge directory layout, the oracle predictor, the synthetic data
//! generator, comparison experiments and the subcommands.

pub mod commands;
pub mod config;
pub mod experiment;
pub mod layout;
pub mod oracle;
pub mod synth;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use commands::{Outcome, RunContext};
use config::DatasetConfig;

pub use commands::{cmd_calibrate, cmd_evaluate, cmd_experiment, cmd_oracle_predict, cmd_prepare, cmd_segment, cmd_synth};
pub use oracle::{oracle_predict, OraclePredictorSpec};
pub use synth::SynthSpec;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "cellseg", version, about = "Marker-controlled watershed cell segmentation")]
pub struct Cli {
    /// Config file, or a bundled preset name (dic-hela, fluo-sim, phc-psc, synthetic).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Sequence ids, overriding the config (repeat or comma-separate).
    #[arg(long, global = true, value_delimiter = ',')]
    pub seq: Vec<String>,
    /// Worker threads for per-frame work.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: u16,
    /// Seed overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; also the data root when the config names none.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write normalized images, marker/foreground targets and weight maps.
    Prepare,
    /// Write blurred ground truth as marker and foreground predictions.
    OraclePredict,
    /// Choose the foreground threshold on annotated frames.
    Calibrate,
    /// Turn predictions into label masks.
    Segment,
    /// Score label masks against full annotations.
    Evaluate,
    /// Run a comparison experiment.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
    },
    /// Generate synthetic sequences.
    Synth {
        #[arg(long, default_value_t = 20)]
        frames: usize,
        /// Frame width and height in pixels.
        #[arg(long, default_value_t = 160)]
        size: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentName {
    Augmentation,
    Segfunction,
    Markertype,
}

impl ExperimentName {
    fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Augmentation => "augmentation",
            ExperimentName::Segfunction => "segfunction",
            ExperimentName::Markertype => "markertype",
        }
    }
}

/// Exit status for an error: 1 for usage and configuration problems, 2 for
/// problems with the data.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter { .. } => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::InvalidParameter { .. } => "invalid_parameter",
        Error::OutOfRange { .. } => "out_of_range",
        Error::MarkerAboveCeiling { .. } => "marker_above_ceiling",
        Error::Empty(_) => "empty",
        Error::Config(_) => "config",
        Error::Frame { .. } => "frame",
        Error::MissingFile(_) => "missing_file",
        Error::Format { .. } => "format",
        Error::Io(_) => "io",
        Error::Image(_) => "image",
        Error::Json(_) => "json",
    }
}

fn context(cli: &Cli) -> Result<RunContext, Error> {
    let (config, config_path) = match &cli.config {
        Some(path) => {
            let cfg = DatasetConfig::load(path)?;
            (cfg, path.is_file().then(|| path.clone()))
        }
        None => (DatasetConfig::default(), None),
    };
    let root = config
        .root
        .clone()
        .or_else(|| cli.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let out = cli.out.clone().unwrap_or_else(|| root.clone());
    let sequences = if cli.seq.is_empty() {
        config.sequences.clone()
    } else {
        cli.seq.clone()
    };
    Ok(RunContext {
        seed: cli.seed.unwrap_or(config.seed),
        config,
        config_path,
        root,
        out,
        sequences,
        workers: cli.workers as usize,
    })
}

fn dispatch(cli: &Cli) -> Result<Outcome, Error> {
    let ctx = context(cli)?;
    match &cli.command {
        Command::Prepare => cmd_prepare(&ctx),
        Command::OraclePredict => cmd_oracle_predict(&ctx),
        Command::Calibrate => cmd_calibrate(&ctx),
        Command::Segment => cmd_segment(&ctx),
        Command::Evaluate => cmd_evaluate(&ctx),
        Command::Experiment { name } => cmd_experiment(&ctx, name.as_str()),
        Command::Synth { frames, size } => cmd_synth(
            &ctx,
            &SynthSpec {
                frames: *frames,
                width: *size,
                height: *size,
                ..SynthSpec::default()
            },
        ),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status. Results go to `stdout`; warnings and errors go to `stderr` as
/// `warning: key=value ...` and `error: kind=... message=...` lines.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if shown {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let _ = write!(stderr, "{e}");
            return EXIT_USAGE;
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            for line in &outcome.lines {
                let _ = writeln!(stdout, "{line}");
            }
            EXIT_OK
        }
        Err(err) => {
            let _ = writeln!(stderr, "error: kind={} message={:?}", error_kind(&err), err.to_string());
            exit_code(&err)
        }
    }
}
