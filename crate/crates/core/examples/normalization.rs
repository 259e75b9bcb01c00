//! Intensity normalization of a dim, unevenly lit frame.

use cellseg::cli::synth::{synth_frame, SynthSpec};
use cellseg::dataprep::{normalize, ClaheParams, Normalization};
use cellseg::raster::GrayImage;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn describe(name: &str, img: &GrayImage) {
    let n = img.len() as f64;
    let mean = img.data().iter().map(|&v| v as f64).sum::<f64>() / n;
    let (lo, hi) = img.min_max().expect("non-empty");
    println!("{name:>8}: min {lo:.3} max {hi:.3} mean {mean:.3}");
}

fn main() -> cellseg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let frame = synth_frame(&SynthSpec { width: 128, height: 128, ..SynthSpec::default() }, &mut rng)?;
    // compress the contrast and add a left-to-right ramp
    let dim = GrayImage::from_fn(128, 128, |x, y| 0.1 + 0.3 * frame.image.get(x, y) + 0.2 * x as f32 / 127.0);
    describe("input", &dim);
    for (name, method) in [
        ("he", Normalization::He),
        ("clahe", Normalization::Clahe(ClaheParams::default())),
        ("median", Normalization::Median),
    ] {
        describe(name, &normalize(&dim, method));
    }
    Ok(())
}
