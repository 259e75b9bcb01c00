use crate::error::{Error, Result};
use crate::raster::{quantize, BinaryMask, GrayImage};

/// Relief flooded by the watershed: low inside cells, high on boundaries.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentationFunction(pub GrayImage);

/// Inverts the foreground prediction: `1 - p`.
pub fn segmentation_function(fg_pred: &GrayImage) -> Result<SegmentationFunction> {
    fg_pred.check_probability()?;
    Ok(SegmentationFunction(fg_pred.map(|&p| 1.0 - p)))
}

/// Pixels whose quantized foreground probability is at least `t_c`.
pub fn cell_region_mask(fg_pred: &GrayImage, t_c: u8) -> Result<BinaryMask> {
    Ok(quantize(fg_pred)?.map(|&q| q >= t_c))
}

/// Result of the foreground threshold sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub t_c: u8,
    /// Pooled Jaccard index for every threshold `0..=255`.
    pub curve: Vec<f64>,
}

impl Calibration {
    pub fn best_jaccard(&self) -> f64 {
        self.curve[self.t_c as usize]
    }
}

/// Sweeps every threshold and returns the one maximizing the Jaccard index
/// between `{quantized prediction >= t}` and the foreground reference, pooled
/// over all pixels of all pairs. Ties go to the smallest threshold.
pub fn calibrate_tc(fg_preds: &[GrayImage], refs: &[BinaryMask]) -> Result<Calibration> {
    if fg_preds.is_empty() {
        return Err(Error::Empty("prediction list"));
    }
    if fg_preds.len() != refs.len() {
        return Err(Error::param(
            "refs",
            format!("{} predictions but {} references", fg_preds.len(), refs.len()),
        ));
    }
    // histograms of quantized values split by reference class
    let mut fg_hist = [0u64; 256];
    let mut bg_hist = [0u64; 256];
    for (pred, reference) in fg_preds.iter().zip(refs) {
        pred.ensure_same_dims(reference)?;
        let q = quantize(pred)?;
        for (&v, &r) in q.data().iter().zip(reference.data()) {
            if r {
                fg_hist[v as usize] += 1;
            } else {
                bg_hist[v as usize] += 1;
            }
        }
    }
    let total_fg: u64 = fg_hist.iter().sum();
    let mut curve = vec![0f64; 256];
    let (mut tp, mut fp) = (0u64, 0u64);
    for t in (0..256).rev() {
        tp += fg_hist[t];
        fp += bg_hist[t];
        let union = total_fg + fp;
        curve[t] = if union == 0 { 1.0 } else { tp as f64 / union as f64 };
    }
    let mut best = 0usize;
    for t in 1..256 {
        if curve[t] > curve[best] {
            best = t;
        }
    }
    Ok(Calibration {
        t_c: best as u8,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Thresholds every image directly for every t and recounts the sets.
    fn sweep_oracle(preds: &[GrayImage], refs: &[BinaryMask]) -> (u8, Vec<f64>) {
        let curve: Vec<f64> = (0..=255u8)
            .map(|t| {
                let (mut inter, mut uni) = (0usize, 0usize);
                for (p, r) in preds.iter().zip(refs) {
                    let m = cell_region_mask(p, t).unwrap();
                    for (&a, &b) in m.data().iter().zip(r.data()) {
                        inter += (a && b) as usize;
                        uni += (a || b) as usize;
                    }
                }
                if uni == 0 {
                    1.0
                } else {
                    inter as f64 / uni as f64
                }
            })
            .collect();
        let best = curve
            .iter()
            .enumerate()
            .fold(0, |b, (t, &j)| if j > curve[b] { t } else { b });
        (best as u8, curve)
    }

    fn cells() -> BinaryMask {
        BinaryMask::from_fn(20, 16, |x, y| ((x / 5) + (y / 4)) % 2 == 0)
    }

    #[test]
    fn inversion() {
        let fg = GrayImage::new(3, 1, vec![1.0, 0.8, 0.0]).unwrap();
        let relief = segmentation_function(&fg).unwrap();
        assert_eq!(relief.0.get(0, 0), 0.0);
        assert!((relief.0.get(1, 0) - 0.2).abs() < 1e-6);
        let twice = segmentation_function(&relief.0).unwrap();
        for (a, b) in twice.0.data().iter().zip(fg.data()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(segmentation_function(&fg.map(|v| v + 0.5)).is_err());
    }

    #[test]
    fn region_mask_thresholds() {
        let half = GrayImage::filled(4, 4, 0.5);
        assert!(cell_region_mask(&half, 0).unwrap().data().iter().all(|&b| b));
        assert!(cell_region_mask(&half, 156).unwrap().is_blank());
        let checker = GrayImage::from_fn(6, 6, |x, y| if (x + y) % 2 == 0 { 0.9 } else { 0.1 });
        let m = cell_region_mask(&checker, 216).unwrap();
        assert!(m.data().iter().zip(checker.data()).all(|(&b, &p)| b == (p == 0.9)));
    }

    #[test]
    fn exact_reference_prefers_lowest_tie() {
        let y = cells();
        let cal = calibrate_tc(&[y.to_gray()], &[y.clone()]).unwrap();
        assert_eq!(cal.t_c, 1);
        assert!(cal.curve[1..].iter().all(|&j| j == 1.0));
        assert!(cal.curve[0] < 1.0);
    }

    #[test]
    fn lifted_reference_step_function() {
        // background quantizes to round(0.1 * 255) = 26 and cells to 255, so every
        // t in 27..=255 is perfect and the tie rule picks 27
        let y = cells();
        let pred = y.to_gray().map(|v| 0.9 * v + 0.1);
        let cal = calibrate_tc(&[pred], &[y]).unwrap();
        assert_eq!(cal.t_c, 27);
        assert!(cal.curve[27..].iter().all(|&j| j == 1.0));
        assert!(cal.curve[26] < 1.0);
    }

    #[test]
    fn blurred_masks_match_exhaustive_sweep() {
        let refs: Vec<BinaryMask> = (0..3)
            .map(|i| BinaryMask::from_fn(24, 24, |x, y| (x as i32 - 8 - 3 * i).pow(2) + (y as i32 - 12).pow(2) < 40))
            .collect();
        let preds: Vec<GrayImage> = refs
            .iter()
            .enumerate()
            .map(|(i, r)| crate::raster::gaussian_blur(&r.to_gray(), 1.0 + i as f64 * 0.7))
            .collect();
        let cal = calibrate_tc(&preds, &refs).unwrap();
        let (best, curve) = sweep_oracle(&preds, &refs);
        assert_eq!(cal.t_c, best);
        for (a, b) in cal.curve.iter().zip(&curve) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let y = cells();
        assert!(calibrate_tc(&[], &[]).is_err());
        assert!(calibrate_tc(&[y.to_gray()], &[]).is_err());
        let small = BinaryMask::filled(3, 3, true);
        assert!(matches!(
            calibrate_tc(&[y.to_gray()], &[small]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
