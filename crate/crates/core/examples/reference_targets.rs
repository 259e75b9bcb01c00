//! Training targets from a full annotation: marker and foreground images, the
//! border-emphasis weight map and the weighted cross-entropy of a prediction.
//!
//! `cargo run --example reference_targets -- [out_dir]` also writes the rasters.

use std::path::PathBuf;

use cellseg::cli::synth::{synth_frame, SynthSpec};
use cellseg::dataprep::{make_reference, weight_map, weighted_cross_entropy, Balance, FullAnnotation, WeightParams};
use cellseg::io::{write_mask, write_scaled};
use cellseg::raster::{gaussian_blur, Connectivity};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cellseg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let frame = synth_frame(&SynthSpec { width: 128, height: 128, ..SynthSpec::default() }, &mut rng)?;
    let full = FullAnnotation(frame.labels.clone());

    let reference = make_reference(&full, 0.6, Connectivity::Eight)?;
    println!(
        "{} cells, {} foreground pixels, {} marker pixels in {} markers",
        frame.labels.object_count(),
        reference.foreground.count(),
        reference.markers.count(),
        reference.marker_labels.object_count()
    );

    for balance in [Balance::None, Balance::ClassFrequency] {
        let params = WeightParams { balance, ..WeightParams::default() };
        let w = weight_map(&full, &params)?;
        let (lo, hi) = w.min_max().expect("non-empty");
        println!("weights ({balance:?}): min {lo:.3}, max {hi:.3}");
    }

    let w = weight_map(&full, &WeightParams::default())?;
    let target = reference.foreground.to_gray();
    for sigma in [0.5, 2.0, 4.0] {
        let p = gaussian_blur(&target, sigma).map(|&v| v.clamp(0.0, 1.0));
        println!("loss of the target blurred with sigma {sigma}: {:.4}", weighted_cross_entropy(&p, &reference.foreground, &w)?);
    }

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir)?;
        write_mask(&dir.join("markers.tif"), &reference.markers)?;
        write_mask(&dir.join("foreground.tif"), &reference.foreground)?;
        write_scaled(&dir.join("weights.tif"), &w, 1000.0)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
