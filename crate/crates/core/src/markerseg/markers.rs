use crate::error::{Error, Result};
use crate::morphology::{dome_pixels, gray_open, max_inscribed_diameter, DiskSE};
use crate::raster::{connected_components, quantize, quantize_value, BinaryMask, ByteImage, Connectivity, GrayImage, LabelMap};

/// Watershed seeds: every positive label is one marker.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkerFunction(pub LabelMap);

impl MarkerFunction {
    pub fn count(&self) -> usize {
        self.0.object_count()
    }

    pub fn labels(&self) -> &LabelMap {
        &self.0
    }
}

/// Opening diameter `k · d_inf`, where `d_inf` is the smallest maximal
/// inscribed diameter among the training cells.
pub fn marker_filter_diameter(training_cells: &[BinaryMask], k: f64) -> Result<f64> {
    if training_cells.is_empty() {
        return Err(Error::Empty("training cell list"));
    }
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::param("k", format!("{k} is outside (0, 1]")));
    }
    let mut d_inf = f64::INFINITY;
    for cell in training_cells {
        d_inf = d_inf.min(max_inscribed_diameter(cell)?);
    }
    Ok(k * d_inf)
}

/// Extracts markers from a marker probability map in three steps on the 0–255
/// scale: grayscale opening with a disk of diameter `d`, zeroing of pixels below
/// `round(t_m · 255)`, and selection of the h-dome tops. Marker pixels must
/// survive the threshold, so an all-background map yields no markers.
pub fn extract_markers(
    marker_pred: &GrayImage,
    d: f64,
    t_m: f32,
    h: u8,
    connectivity: Connectivity,
) -> Result<MarkerFunction> {
    if !(t_m > 0.0 && t_m < 1.0) {
        return Err(Error::param("t_m", format!("{t_m} is outside (0, 1)")));
    }
    let se = DiskSE::new(d)?;
    let bytes = quantize(marker_pred)?;
    let opened = gray_open(&bytes.to_gray(), &se);
    let floor = quantize_value(t_m).max(1) as f32;
    let kept: ByteImage = opened.map(|&v| if v >= floor { v as u8 } else { 0 });
    let tops = dome_pixels(&kept, h, connectivity)?;
    let marker_px = tops.zip_map(&kept, |&t, &v| t && v > 0)?;
    Ok(MarkerFunction(connected_components(&marker_px, connectivity)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(size: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(size, size, |x, y| {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            dx * dx + dy * dy <= r * r
        })
    }

    fn blobs(peak: f32, valley: f32) -> GrayImage {
        // two Gaussian bumps over a floor at `valley`
        GrayImage::from_fn(64, 64, |x, y| {
            let g = |cx: f32, cy: f32| {
                let d2 = (x as f32 - cx).powi(2) + (y as f32 - cy).powi(2);
                (-d2 / (2.0 * 6.0 * 6.0)).exp()
            };
            valley + (peak - valley) * g(20.0, 32.0).max(g(44.0, 32.0))
        })
    }

    #[test]
    fn filter_diameter_from_training_cells() {
        // disks with inscribed diameters 7, 11 and 13 (2m - 1 on the pixel grid)
        let cells = [disk(21, 10.0, 10.0, 3.5), disk(21, 10.0, 10.0, 5.5), disk(21, 10.0, 10.0, 6.5)];
        let dmax: Vec<f64> = cells.iter().map(|c| max_inscribed_diameter(c).unwrap()).collect();
        let expect = 0.8 * dmax.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(marker_filter_diameter(&cells, 0.8).unwrap(), expect);
        assert_eq!(marker_filter_diameter(&cells[1..2], 1.0).unwrap(), dmax[1]);
        assert!(marker_filter_diameter(&[], 0.8).is_err());
        assert!(marker_filter_diameter(&cells, 0.0).is_err());
    }

    #[test]
    fn filter_diameter_arithmetic() {
        // 1-pixel-tall strips measure 1, a 6x6 square measures 5
        let strip = BinaryMask::filled(9, 1, true);
        let square = BinaryMask::filled(6, 6, true);
        assert_eq!(marker_filter_diameter(&[square.clone()], 0.5).unwrap(), 2.5);
        assert_eq!(marker_filter_diameter(&[square, strip], 0.5).unwrap(), 0.5);
    }

    #[test]
    fn blank_prediction_has_no_markers() {
        let pred = GrayImage::filled(32, 32, 0.0);
        let m = extract_markers(&pred, 5.0, 0.6, 5, Connectivity::Eight).unwrap();
        assert_eq!(m.count(), 0);
    }

    #[test]
    fn two_blobs_two_markers() {
        let pred = blobs(0.95, 0.3);
        let m = extract_markers(&pred, 7.0, 0.6, 5, Connectivity::Eight).unwrap();
        assert_eq!(m.count(), 2);
        assert!(m.0.get(20, 32) > 0 && m.0.get(44, 32) > 0);
        assert_ne!(m.0.get(20, 32), m.0.get(44, 32));
    }

    #[test]
    fn two_blobs_per_step_oracle() {
        // step 1: opening by brute-force min/max over the disk
        let pred = blobs(0.95, 0.3);
        let q = quantize(&pred).unwrap();
        let offs = DiskSE::new(7.0).unwrap().offsets();
        let rank = |img: &ByteImage, max: bool| {
            ByteImage::from_fn(64, 64, |x, y| {
                let vals = offs.iter().filter_map(|&(dx, dy)| {
                    let sx = x as isize + dx;
                    let sy = y as isize + dy;
                    (sx >= 0 && sy >= 0 && sx < 64 && sy < 64).then(|| img.get(sx as usize, sy as usize))
                });
                if max {
                    vals.max().unwrap()
                } else {
                    vals.min().unwrap()
                }
            })
        };
        let opened = rank(&rank(&q, false), true);
        // step 2: threshold at round(0.6 * 255) = 153
        let kept = opened.map(|&v| if v >= 153 { v } else { 0 });
        // step 3: h-dome tops; both blobs have equal peaks, so each plateau top is kept
        let tops = dome_pixels(&kept, 5, Connectivity::Eight).unwrap();
        let expect = connected_components(&tops.zip_map(&kept, |&t, &v| t && v > 0).unwrap(), Connectivity::Eight);
        let got = extract_markers(&pred, 7.0, 0.6, 5, Connectivity::Eight).unwrap();
        assert_eq!(got.0, expect);
        assert_eq!(expect.max_label(), 2);
    }

    #[test]
    fn faint_blob_removed_by_threshold() {
        let pred = GrayImage::from_fn(40, 40, |x, y| {
            let d2 = (x as f32 - 20.0).powi(2) + (y as f32 - 20.0).powi(2);
            0.5 * (-d2 / 72.0).exp()
        });
        assert_eq!(extract_markers(&pred, 5.0, 0.6, 3, Connectivity::Eight).unwrap().count(), 0);
    }

    #[test]
    fn count_non_increasing_in_parameters() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..12 {
            let noise = GrayImage::from_fn(48, 48, |_, _| rng.gen_range(0.0f32..1.0));
            let pred = crate::raster::gaussian_blur(&noise, 2.0);
            let (lo, hi) = pred.min_max().unwrap();
            let pred = pred.map(|&v| (v - lo) / (hi - lo));
            let count = |d: f64, t_m: f32, h: u8| extract_markers(&pred, d, t_m, h, Connectivity::Eight).unwrap().count();
            let ds = [1.0, 3.0, 5.0, 7.0];
            let ts = [0.2f32, 0.4, 0.6, 0.8];
            let hs = [1u8, 3, 5, 10, 20];
            for w in ds.windows(2) {
                assert!(count(w[1], 0.4, 3) <= count(w[0], 0.4, 3));
            }
            for w in ts.windows(2) {
                assert!(count(3.0, w[1], 3) <= count(3.0, w[0], 3));
            }
            for w in hs.windows(2) {
                assert!(count(3.0, 0.4, w[1]) <= count(3.0, 0.4, w[0]));
            }
        }
    }

    #[test]
    fn raising_threshold_can_split_a_saddle() {
        // the 190 peak is 10 above its saddle with the 200 peak, too shallow for
        // h = 30; once the saddle falls below the threshold it stands alone
        let pred = GrayImage::new(5, 1, [0u8, 200, 180, 190, 0].iter().map(|&v| v as f32 / 255.0).collect()).unwrap();
        let count = |t_m| extract_markers(&pred, 1.0, t_m, 30, Connectivity::Eight).unwrap().count();
        assert_eq!(count(0.6), 1);
        assert_eq!(count(0.72), 2);
    }
}
