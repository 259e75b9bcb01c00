//! Rigid and elastic augmentation of an image together with its labels.

use cellseg::cli::synth::{synth_frame, SynthSpec};
use cellseg::dataprep::{augment, AugmentationSpec, ElasticParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cellseg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let frame = synth_frame(&SynthSpec { width: 128, height: 128, ..SynthSpec::default() }, &mut rng)?;
    println!("original: {} cells, {} cell pixels", frame.labels.object_count(), frame.labels.to_mask().count());

    let settings = [
        ("rigid", AugmentationSpec::default()),
        ("elastic", AugmentationSpec { elastic: Some(ElasticParams::default()), ..AugmentationSpec::identity() }),
        ("both", AugmentationSpec { elastic: Some(ElasticParams::default()), ..AugmentationSpec::default() }),
    ];
    for (name, spec) in settings {
        for copy in 0..3u64 {
            let spec = AugmentationSpec { seed: copy, ..spec };
            let mut rng = spec.rng();
            let (image, labels) = augment(&frame.image, &frame.labels, &spec, &mut rng)?;
            let (lo, hi) = image.min_max().expect("non-empty");
            println!(
                "{name:>7} #{copy}: {} cells, {} cell pixels, intensities {lo:.2}..{hi:.2}",
                labels.object_count(),
                labels.to_mask().count()
            );
        }
    }
    Ok(())
}
