use rand::Rng;

use crate::dataprep::{make_reference, FullAnnotation};
use crate::error::{Error, Result};
use crate::raster::{gaussian_blur, Connectivity, GrayImage};

/// Ground-truth-derived stand-in for the two trained predictors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OraclePredictorSpec {
    /// Gaussian blur sigma in pixels.
    pub sigma: f64,
    /// Marker size ratio of the marker targets that get blurred.
    pub k: f64,
    /// Amplitude of uniform noise added before clipping.
    pub noise: f32,
}

impl Default for OraclePredictorSpec {
    fn default() -> Self {
        OraclePredictorSpec {
            sigma: 2.0,
            k: 0.6,
            noise: 0.0,
        }
    }
}

impl OraclePredictorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) {
            return Err(Error::param("oracle_sigma", format!("{} must be nonnegative", self.sigma)));
        }
        if !(0.0..=1.0).contains(&self.k) {
            return Err(Error::param("oracle_k", format!("{} is outside [0, 1]", self.k)));
        }
        if !(0.0..0.5).contains(&self.noise) {
            return Err(Error::param("oracle_noise", format!("{} is outside [0, 0.5)", self.noise)));
        }
        Ok(())
    }
}

/// Marker and foreground predictions: blurred marker and foreground targets,
/// with optional noise, clipped to `[0, 1]`. The RNG is only drawn from when
/// noise is enabled.
pub fn oracle_predict<R: Rng>(
    full: &FullAnnotation,
    spec: &OraclePredictorSpec,
    connectivity: Connectivity,
    rng: &mut R,
) -> Result<(GrayImage, GrayImage)> {
    spec.validate()?;
    let reference = make_reference(full, spec.k, connectivity)?;
    let mut predict = |target: &GrayImage| {
        let blurred = gaussian_blur(target, spec.sigma);
        blurred.map(|&v| {
            let jitter = if spec.noise > 0.0 {
                rng.gen_range(-spec.noise..=spec.noise)
            } else {
                0.0
            };
            (v + jitter).clamp(0.0, 1.0)
        })
    };
    let marker = predict(&reference.markers.to_gray());
    let fg = predict(&reference.foreground.to_gray());
    Ok((marker, fg))
}

/// Stable per-frame seed derived from a run seed and a frame key.
pub fn frame_seed(seed: u64, key: &str) -> u64 {
    // FNV-1a over the key, mixed with the seed
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for b in key.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::LabelMap;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn disk_cell() -> FullAnnotation {
        FullAnnotation(LabelMap::from_fn(31, 31, |x, y| {
            u32::from((x as i32 - 15).pow(2) + (y as i32 - 15).pow(2) <= 64)
        }))
    }

    #[test]
    fn zero_sigma_reproduces_targets() {
        let full = disk_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let spec = OraclePredictorSpec { sigma: 0.0, ..Default::default() };
        let (m, fg) = oracle_predict(&full, &spec, Connectivity::Eight, &mut rng).unwrap();
        let reference = make_reference(&full, 0.6, Connectivity::Eight).unwrap();
        assert_eq!(m, reference.markers.to_gray());
        assert_eq!(fg, full.0.to_mask().to_gray());
    }

    #[test]
    fn blurred_disk_peaks_at_center_and_decays() {
        let full = disk_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, fg) = oracle_predict(&full, &OraclePredictorSpec::default(), Connectivity::Eight, &mut rng).unwrap();
        assert!(fg.get(15, 15) > 0.999);
        for x in 15..30 {
            assert!(fg.get(x + 1, 15) <= fg.get(x, 15));
        }
        // direct convolution at the boundary pixel
        let mask = full.0.to_mask().to_gray();
        let r = 6i32;
        let g: Vec<f64> = (-r..=r).map(|t| (-(t * t) as f64 / 8.0).exp()).collect();
        let norm: f64 = g.iter().sum();
        let mut direct = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let v = mask.get((23 + dx) as usize, (15 + dy) as usize) as f64;
                direct += v * g[(dx + r) as usize] * g[(dy + r) as usize];
            }
        }
        assert!((fg.get(23, 15) as f64 - direct / (norm * norm)).abs() < 1e-5);
    }

    #[test]
    fn noise_is_seeded() {
        let full = disk_cell();
        let spec = OraclePredictorSpec { noise: 0.2, ..Default::default() };
        let run = |s| oracle_predict(&full, &spec, Connectivity::Eight, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
        let (m, fg) = run(3);
        assert!(m.check_probability().is_ok() && fg.check_probability().is_ok());
        assert!(OraclePredictorSpec { noise: 0.5, ..spec }.validate().is_err());
    }

    #[test]
    fn frame_seeds_differ_by_key() {
        assert_eq!(frame_seed(1, "01/000"), frame_seed(1, "01/000"));
        assert_ne!(frame_seed(1, "01/000"), frame_seed(1, "01/001"));
        assert_ne!(frame_seed(1, "01/000"), frame_seed(2, "01/000"));
    }
}
