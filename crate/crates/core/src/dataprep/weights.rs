use crate::error::{Error, Result};
use crate::morphology::squared_distance_transform;
use crate::raster::{BinaryMask, GrayImage};

use super::FullAnnotation;

/// Clipping bound for probabilities inside the log of the loss.
pub const PROBABILITY_EPSILON: f64 = 1e-7;

/// Class-balancing factor applied on top of the border term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Balance {
    None,
    /// `|Ω| / (2 · |pixels of q's class|)`, classes being cell and background.
    ClassFrequency,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightParams {
    /// Weight magnitude per pixel of border proximity.
    pub a: f64,
    /// Width of the band around each cell that receives extra weight.
    pub d: f64,
    pub balance: Balance,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            a: 0.075,
            d: 20.0,
            balance: Balance::None,
        }
    }
}

impl WeightParams {
    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) {
            return Err(Error::param("a", format!("{} must be positive", self.a)));
        }
        if !(self.d > 0.0) {
            return Err(Error::param("d", format!("{} must be positive", self.d)));
        }
        Ok(())
    }
}

/// Per-pixel loss weights: `w(q) = [1 + a Σ_φ max(d − dist(q, φ), 0)] · b(q)`.
///
/// Distances are exact Euclidean distances to each cell, evaluated inside the
/// cell's bounding box grown by `d` (farther pixels contribute nothing).
pub fn weight_map(full: &FullAnnotation, params: &WeightParams) -> Result<GrayImage> {
    params.validate()?;
    let labels = &full.0;
    let (w, h) = labels.dims();
    let reach = params.d.ceil() as usize;
    let mut acc = vec![0f64; w * h];
    for (label, bbox) in labels.bounding_boxes().into_iter().enumerate().skip(1) {
        let Some((x0, y0, x1, y1)) = bbox else { continue };
        let (bx0, by0) = (x0.saturating_sub(reach), y0.saturating_sub(reach));
        let (bx1, by1) = ((x1 + reach).min(w - 1), (y1 + reach).min(h - 1));
        let window = BinaryMask::from_fn(bx1 - bx0 + 1, by1 - by0 + 1, |x, y| {
            labels.get(bx0 + x, by0 + y) == label as u32
        });
        let sq = squared_distance_transform(&window);
        for y in 0..window.height() {
            for x in 0..window.width() {
                let dist = sq[y * window.width() + x].sqrt();
                acc[(by0 + y) * w + bx0 + x] += (params.d - dist).max(0.0);
            }
        }
    }

    let total = (w * h) as f64;
    let fg = labels.data().iter().filter(|&&l| l > 0).count() as f64;
    let out = acc
        .iter()
        .zip(labels.data())
        .map(|(&s, &l)| {
            let b = match params.balance {
                Balance::None => 1.0,
                Balance::ClassFrequency => {
                    let class = if l > 0 { fg } else { total - fg };
                    total / (2.0 * class)
                }
            };
            ((1.0 + params.a * s) * b) as f32
        })
        .collect();
    GrayImage::new(w, h, out)
}

/// Weighted binary cross-entropy normalized by the total weight:
/// `−Σ w(q) log p_{y(q)}(q) / Σ w(q)` with `p_1 = p`, `p_0 = 1 − p`.
pub fn weighted_cross_entropy(p: &GrayImage, y: &BinaryMask, w: &GrayImage) -> Result<f64> {
    p.ensure_same_dims(y)?;
    p.ensure_same_dims(w)?;
    let mut num = 0f64;
    let mut den = 0f64;
    for ((&pq, &yq), &wq) in p.data().iter().zip(y.data()).zip(w.data()) {
        let pq = (pq as f64).clamp(PROBABILITY_EPSILON, 1.0 - PROBABILITY_EPSILON);
        let py = if yq { pq } else { 1.0 - pq };
        num -= wq as f64 * py.ln();
        den += wq as f64;
    }
    if den == 0.0 {
        return Err(Error::param("w", "weights sum to zero"));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::LabelMap;
    use proptest::prelude::*;

    fn params(a: f64, d: f64) -> WeightParams {
        WeightParams {
            a,
            d,
            balance: Balance::None,
        }
    }

    /// Direct evaluation of the formula with brute-force nearest-pixel scans.
    pub(crate) fn weight_oracle(labels: &LabelMap, p: &WeightParams) -> Vec<f64> {
        let cells: Vec<Vec<(usize, usize)>> = labels
            .labels()
            .into_iter()
            .map(|l| labels.mask_of(l).pixels())
            .collect();
        let n = labels.len() as f64;
        let fg = labels.to_mask().count() as f64;
        (0..labels.len())
            .map(|i| {
                let (x, y) = (i % labels.width(), i / labels.width());
                let s: f64 = cells
                    .iter()
                    .map(|cell| {
                        let dist = cell
                            .iter()
                            .map(|&(cx, cy)| {
                                let dx = cx as f64 - x as f64;
                                let dy = cy as f64 - y as f64;
                                (dx * dx + dy * dy).sqrt()
                            })
                            .fold(f64::INFINITY, f64::min);
                        (p.d - dist).max(0.0)
                    })
                    .sum();
                let b = match p.balance {
                    Balance::None => 1.0,
                    Balance::ClassFrequency => {
                        let class = if labels.data()[i] > 0 { fg } else { n - fg };
                        n / (2.0 * class)
                    }
                };
                (1.0 + p.a * s) * b
            })
            .collect()
    }

    #[test]
    fn far_pixels_weigh_one() {
        let mut labels = LabelMap::filled(40, 5, 0);
        labels.set(0, 2, 1);
        let w = weight_map(&FullAnnotation(labels), &params(0.075, 20.0)).unwrap();
        assert_eq!(w.get(25, 2), 1.0);
        assert_eq!(w.get(39, 0), 1.0);
    }

    #[test]
    fn single_cell_at_distance_ten() {
        let mut labels = LabelMap::filled(30, 3, 0);
        labels.set(0, 1, 1);
        let w = weight_map(&FullAnnotation(labels), &params(0.075, 20.0)).unwrap();
        assert!((w.get(10, 1) as f64 - 1.75).abs() < 1e-6);
    }

    #[test]
    fn equidistant_from_two_cells() {
        let mut labels = LabelMap::filled(11, 1, 0);
        labels.set(0, 0, 1);
        labels.set(10, 0, 2);
        let w = weight_map(&FullAnnotation(labels), &params(0.075, 20.0)).unwrap();
        assert!((w.get(5, 0) as f64 - 3.25).abs() < 1e-6);
    }

    #[test]
    fn invalid_params_rejected() {
        let labels = FullAnnotation(LabelMap::filled(2, 2, 0));
        assert!(weight_map(&labels, &params(0.0, 20.0)).is_err());
        assert!(weight_map(&labels, &params(0.075, -1.0)).is_err());
    }

    #[test]
    fn loss_of_perfect_prediction_vanishes() {
        let y = BinaryMask::from_fn(6, 6, |x, y| (x + y) % 3 == 0);
        let p = y.to_gray();
        let w = GrayImage::filled(6, 6, 2.0);
        assert!(weighted_cross_entropy(&p, &y, &w).unwrap() <= 1e-6);
    }

    #[test]
    fn loss_of_coin_flip_is_ln2() {
        let y = BinaryMask::from_fn(5, 4, |x, _| x % 2 == 0);
        let p = GrayImage::filled(5, 4, 0.5);
        let w = GrayImage::from_fn(5, 4, |x, y| 0.5 + (x * y) as f32);
        let l = weighted_cross_entropy(&p, &y, &w).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn two_pixel_hand_computation() {
        let y = BinaryMask::new(2, 1, vec![true, false]).unwrap();
        let p = GrayImage::new(2, 1, vec![0.8, 0.4]).unwrap();
        let w = GrayImage::new(2, 1, vec![1.0, 3.0]).unwrap();
        let l = weighted_cross_entropy(&p, &y, &w).unwrap();
        let expect = (-(0.8f64.ln()) - 3.0 * 0.6f64.ln()) / 4.0;
        assert!((expect - 0.438905).abs() < 1e-6);
        assert!((l - expect).abs() < 1e-6);
    }

    #[test]
    fn zero_weights_rejected() {
        let y = BinaryMask::filled(2, 2, true);
        let p = GrayImage::filled(2, 2, 0.3);
        assert!(weighted_cross_entropy(&p, &y, &GrayImage::filled(2, 2, 0.0)).is_err());
    }

    fn arb_labels() -> impl Strategy<Value = LabelMap> {
        (4usize..24, 4usize..24, any::<u64>()).prop_map(|(w, h, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            LabelMap::from_fn(w, h, |_, _| if rng.gen_bool(0.15) { rng.gen_range(1..4) } else { 0 })
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force_formula(labels in arb_labels(), d in 1.0f64..12.0, balanced in any::<bool>()) {
            let p = WeightParams {
                a: 0.075,
                d,
                balance: if balanced { Balance::ClassFrequency } else { Balance::None },
            };
            let got = weight_map(&FullAnnotation(labels.clone()), &p).unwrap();
            let expect = weight_oracle(&labels, &p);
            for (g, e) in got.data().iter().zip(&expect) {
                prop_assert_eq!(*g, *e as f32);
            }
        }

        #[test]
        fn weight_at_least_balance(labels in arb_labels(), d in 1.0f64..12.0) {
            let w = weight_map(&FullAnnotation(labels), &params(0.075, d)).unwrap();
            prop_assert!(w.data().iter().all(|&v| v >= 1.0));
        }

        #[test]
        fn loss_invariant_under_weight_scaling(seed in any::<u64>(), scale in 0.01f32..100.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = GrayImage::from_fn(7, 5, |_, _| rng.gen_range(0.0..1.0));
            let y = BinaryMask::from_fn(7, 5, |_, _| rng.gen_bool(0.5));
            let w = GrayImage::from_fn(7, 5, |_, _| rng.gen_range(0.1..5.0));
            let a = weighted_cross_entropy(&p, &y, &w).unwrap();
            let b = weighted_cross_entropy(&p, &y, &w.map(|v| v * scale)).unwrap();
            prop_assert!((a - b).abs() < 1e-5 * a.max(1.0));
        }
    }
}
