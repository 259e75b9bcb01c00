//! Choosing the foreground threshold by maximizing the pooled Jaccard index of
//! the thresholded predictions against annotated masks.

use cellseg::cli::experiment::oracle_predictions;
use cellseg::cli::oracle::OraclePredictorSpec;
use cellseg::cli::synth::{synth_sequence, SynthSpec};
use cellseg::markerseg::calibrate_tc;
use cellseg::raster::{Connectivity, LabelMap};

fn main() -> cellseg::Result<()> {
    let frames = synth_sequence(&SynthSpec { frames: 5, ..SynthSpec::default() })?;
    let truths: Vec<LabelMap> = frames.into_iter().map(|f| f.labels).collect();
    let refs: Vec<_> = truths.iter().map(|t| t.to_mask()).collect();

    for sigma in [1.0, 2.0, 4.0] {
        let spec = OraclePredictorSpec { sigma, ..OraclePredictorSpec::default() };
        let preds = oracle_predictions(&truths, &spec, Connectivity::Eight, 0)?;
        let fg: Vec<_> = preds.into_iter().map(|(_, f)| f).collect();
        let cal = calibrate_tc(&fg, &refs)?;
        let at = |t: usize| cal.curve[t];
        println!(
            "sigma {sigma}: t_c = {} (J = {:.4}); J at 64/128/192 = {:.4}/{:.4}/{:.4}",
            cal.t_c,
            cal.best_jaccard(),
            at(64),
            at(128),
            at(192)
        );
    }
    Ok(())
}
