//! The comparison experiments: watershed against the nearest-marker baseline
//! on touching pairs, marker size, and training-set augmentation.

use cellseg::cli::experiment::{augmentation_table, markertype_table, measure_d_inf, oracle_predictions, calibrate_on, segfunction_table};
use cellseg::cli::oracle::OraclePredictorSpec;
use cellseg::cli::synth::{synth_sequence, touching_pair_case, SynthSpec};
use cellseg::markerseg::PipelineParams;
use cellseg::raster::{Connectivity, GrayImage, LabelMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cellseg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let cases = (0..20)
        .map(|i| touching_pair_case(&mut rng, [0.3, 0.4, 0.5][i % 3]))
        .collect::<cellseg::Result<Vec<_>>>()?;
    let truths: Vec<LabelMap> = cases.iter().map(|c| c.truth.clone()).collect();
    let params = PipelineParams { k: 0.2, h: 20, t_c: 128, d_inf: measure_d_inf(&truths)?, ..PipelineParams::default() };
    let table = segfunction_table(&cases, &params)?;
    println!("segmentation function, mean row: {}", table.rows.last().expect("mean row").join(","));

    let frames = synth_sequence(&SynthSpec { frames: 8, ..SynthSpec::default() })?;
    let truths: Vec<LabelMap> = frames.iter().map(|f| f.labels.clone()).collect();
    let weak: Vec<LabelMap> = frames.iter().map(|f| f.markers.clone()).collect();
    let spec = OraclePredictorSpec::default();
    let preds = oracle_predictions(&truths, &spec, Connectivity::Eight, 0)?;
    let params = PipelineParams { k: 0.5, h: 20, t_c: calibrate_on(&truths, &preds)?, d_inf: measure_d_inf(&truths)?, ..PipelineParams::default() };

    println!("\nmarker type\n{}", markertype_table(&truths, Some(&weak), &[0.2, 0.4, 0.6, 0.8], &spec, &params, 0)?.to_csv());

    let annotated: Vec<(GrayImage, LabelMap)> = frames.into_iter().map(|f| (f.image, f.labels)).collect();
    println!("augmentation\n{}", augmentation_table(&annotated, &spec, &params, 0)?.to_csv());
    Ok(())
}
