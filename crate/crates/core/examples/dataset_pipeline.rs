//! The full dataset workflow on a generated sequence: synth, prepare,
//! oracle-predict, calibrate, segment and evaluate, driven through the same
//! functions as the `cellseg` binary.
//!
//! `cargo run --example dataset_pipeline -- [dir]` (defaults to a fresh
//! directory under the system temp dir).

use std::path::PathBuf;

use cellseg::cli::commands::{Outcome, RunContext};
use cellseg::cli::config::DatasetConfig;
use cellseg::cli::{cmd_calibrate, cmd_evaluate, cmd_oracle_predict, cmd_prepare, cmd_segment, cmd_synth, SynthSpec};

fn report(step: &str, outcome: Outcome) {
    for line in outcome.lines {
        println!("{step:>14}: {line}");
    }
    for warning in outcome.warnings {
        println!("{step:>14}: warning {warning}");
    }
}

fn main() -> cellseg::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("cellseg-pipeline-{}", std::process::id())));
    std::fs::create_dir_all(&dir)?;
    let cfg_path = dir.join("dataset.cfg");
    std::fs::write(&cfg_path, "preset = synthetic\nroot = .\nsequences = 01\n")?;

    let mut ctx = RunContext::new(DatasetConfig::load(&cfg_path)?, &dir);
    ctx.config_path = Some(cfg_path.clone());
    ctx.workers = 4;

    report("synth", cmd_synth(&ctx, &SynthSpec { frames: 8, ..SynthSpec::default() })?);
    report("prepare", cmd_prepare(&ctx)?);
    report("oracle-predict", cmd_oracle_predict(&ctx)?);
    report("calibrate", cmd_calibrate(&ctx)?);
    // calibrate wrote t_c back into the config file
    ctx.config = DatasetConfig::load(&cfg_path)?;
    report("segment", cmd_segment(&ctx)?);
    report("evaluate", cmd_evaluate(&ctx)?);
    println!("outputs in {}", dir.display());
    Ok(())
}
