//! Post-processing of marker and foreground probability maps into cell
//! instances, step by step, with the nearest-marker baseline for comparison.

use cellseg::cli::oracle::{oracle_predict, OraclePredictorSpec};
use cellseg::cli::synth::{synth_frame, SynthSpec};
use cellseg::dataprep::FullAnnotation;
use cellseg::markerseg::{
    cell_region_mask, clip_markers, distance_baseline, extract_markers, segment_image_detailed, segmentation_function, watershed,
    PipelineParams,
};
use cellseg::metrics::{det_measure, seg_measure};
use cellseg::raster::Connectivity;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cellseg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let frame = synth_frame(&SynthSpec { touching_probability: 0.8, ..SynthSpec::default() }, &mut rng)?;
    let truth = &frame.labels;
    println!("{} cells, {} touching pairs", truth.object_count(), frame.touching_pairs.len());

    // blurred ground truth stands in for a trained predictor
    let (marker_pred, fg_pred) = oracle_predict(&FullAnnotation(truth.clone()), &OraclePredictorSpec::default(), Connectivity::Eight, &mut rng)?;
    let params = PipelineParams { k: 0.5, h: 20, t_c: 120, d_inf: 16.0, ..PipelineParams::default() };

    let markers = extract_markers(&marker_pred, params.marker_diameter(), params.t_m, params.h, params.connectivity)?;
    let region = cell_region_mask(&fg_pred, params.t_c)?;
    let (_, dropped) = clip_markers(&markers, &region)?;
    println!("markers: {} ({} outside the cell region); region pixels: {}", markers.count(), dropped, region.count());

    let relief = segmentation_function(&fg_pred)?;
    let flooded = watershed(&markers, &relief, &region, params.connectivity)?;
    let nearest = distance_baseline(&markers, &region)?;
    for (name, labels) in [("watershed", &flooded), ("nearest marker", &nearest)] {
        println!(
            "{name:>14}: {} segments, SEG {:.4}, DET {:.4}",
            labels.object_count(),
            seg_measure(truth, labels)?.seg,
            det_measure(truth, labels)?.det
        );
    }

    // the same steps in one call
    let report = segment_image_detailed(&marker_pred, &fg_pred, &params)?;
    assert_eq!(report.labels, flooded.canonicalize());
    println!("segment_image_detailed: {} segments", report.segments);
    Ok(())
}
