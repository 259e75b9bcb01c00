use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage};

/// 1D lower envelope of parabolas (Felzenszwalb & Huttenlocher). `f` holds
/// squared distances along one line, `INFINITY` where no feature exists.
fn envelope_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    let first = match f.iter().position(|x| x.is_finite()) {
        Some(i) => i,
        None => {
            out.iter_mut().for_each(|o| *o = f64::INFINITY);
            return;
        }
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                // k > 0 here: z[0] is -inf
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Exact squared Euclidean distance from every pixel to the nearest set pixel of
/// `mask`, as integers stored in `f64`. `INFINITY` everywhere when `mask` is empty.
pub fn squared_distance_transform(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = mask.dims();
    let n = w.max(h);
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut col_in = vec![0f64; h];
    let mut col_out = vec![0f64; h];
    let mut grid = vec![0f64; w * h];
    for x in 0..w {
        for y in 0..h {
            col_in[y] = if mask.get(x, y) { 0.0 } else { f64::INFINITY };
        }
        envelope_1d(&col_in, &mut col_out, &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = col_out[y];
        }
    }
    let mut row_out = vec![0f64; w];
    for y in 0..h {
        envelope_1d(&grid[y * w..(y + 1) * w], &mut row_out, &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&row_out);
    }
    grid
}

/// Exact Euclidean distance to the nearest set pixel (0 on the mask). For an
/// empty mask every value is `f32::INFINITY`, which exceeds any image diagonal.
pub fn distance_transform(mask: &BinaryMask) -> GrayImage {
    let sq = squared_distance_transform(mask);
    GrayImage::new(
        mask.width(),
        mask.height(),
        sq.into_iter().map(|d| d.sqrt() as f32).collect(),
    )
    .expect("dimensions preserved")
}

/// Diameter of the largest disk that fits inside `cell`.
///
/// With `m` the largest distance from a cell pixel to a non-cell pixel (the
/// outside of the image counts as non-cell), the disk reaches the edge of the
/// nearest non-cell pixel at radius `m - 0.5`, giving `2m - 1`. A one-pixel-wide
/// structure therefore measures 1.
pub fn max_inscribed_diameter(cell: &BinaryMask) -> Result<f64> {
    if cell.is_blank() {
        return Err(Error::Empty("cell mask"));
    }
    let best = interior_squared_distance(cell)
        .into_iter()
        .fold(0f64, f64::max);
    Ok(2.0 * best.sqrt() - 1.0)
}

/// Squared distance from every cell pixel to the nearest non-cell pixel, with
/// the outside of the image counted as non-cell. Zero off the cell.
pub fn interior_squared_distance(cell: &BinaryMask) -> Vec<f64> {
    let (w, h) = cell.dims();
    let outside = BinaryMask::from_fn(w + 2, h + 2, |x, y| {
        x == 0 || y == 0 || x == w + 1 || y == h + 1 || !cell.get(x - 1, y - 1)
    });
    let sq = squared_distance_transform(&outside);
    let mut out = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = sq[(y + 1) * (w + 2) + x + 1];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(mask: &BinaryMask) -> Vec<f32> {
        let pts = mask.pixels();
        (0..mask.len())
            .map(|i| {
                let (x, y) = ((i % mask.width()) as i64, (i / mask.width()) as i64);
                pts.iter()
                    .map(|&(px, py)| {
                        let dx = px as i64 - x;
                        let dy = py as i64 - y;
                        (dx * dx + dy * dy) as f64
                    })
                    .fold(f64::INFINITY, f64::min)
                    .sqrt() as f32
            })
            .collect()
    }

    /// Exhaustive scan: for every cell pixel, the nearest non-cell lattice point
    /// (including a one-pixel frame outside the image).
    fn inscribed_oracle(cell: &BinaryMask) -> f64 {
        let (w, h) = (cell.width() as i64, cell.height() as i64);
        let mut best = 0f64;
        for (cx, cy) in cell.pixels() {
            let (cx, cy) = (cx as i64, cy as i64);
            let mut nearest = i64::MAX;
            for y in -1..=h {
                for x in -1..=w {
                    let inside = x >= 0 && y >= 0 && x < w && y < h && cell.get(x as usize, y as usize);
                    if !inside {
                        nearest = nearest.min((x - cx).pow(2) + (y - cy).pow(2));
                    }
                }
            }
            best = best.max(nearest as f64);
        }
        2.0 * best.sqrt() - 1.0
    }

    #[test]
    fn zero_on_mask_and_pythagorean_triple() {
        let mut m = BinaryMask::filled(6, 6, false);
        m.set(0, 0, true);
        let dt = distance_transform(&m);
        assert_eq!(dt.get(0, 0), 0.0);
        assert_eq!(dt.get(3, 4), 5.0);
    }

    #[test]
    fn empty_mask_gives_sentinel_beyond_diagonal() {
        let dt = distance_transform(&BinaryMask::filled(5, 3, false));
        let diag = ((5 * 5 + 3 * 3) as f32).sqrt();
        assert!(dt.data().iter().all(|&v| v > diag));
    }

    #[test]
    fn random_16x16_masks_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let density = rng.gen_range(0.01..0.5);
            let m = BinaryMask::from_fn(16, 16, |_, _| rng.gen_bool(density));
            assert_eq!(distance_transform(&m).data(), brute_force(&m).as_slice());
        }
    }

    #[test]
    fn inscribed_diameter_of_disk() {
        let c = 7.0;
        let disk = BinaryMask::from_fn(15, 15, |x, y| {
            let dx = x as f64 - c;
            let dy = y as f64 - c;
            4.0 * (dx * dx + dy * dy) <= 121.0
        });
        let d = max_inscribed_diameter(&disk).unwrap();
        assert!((d - 11.0).abs() <= 1.0, "{d}");
        assert_eq!(d, inscribed_oracle(&disk));
    }

    #[test]
    fn inscribed_diameter_of_line_is_one() {
        let line = BinaryMask::filled(9, 1, true);
        assert_eq!(max_inscribed_diameter(&line).unwrap(), 1.0);
        let mut single = BinaryMask::filled(5, 5, false);
        single.set(2, 2, true);
        assert_eq!(max_inscribed_diameter(&single).unwrap(), 1.0);
    }

    #[test]
    fn inscribed_diameter_of_rectangle() {
        let rect = BinaryMask::from_fn(14, 8, |x, y| (2..12).contains(&x) && (2..6).contains(&y));
        let d = max_inscribed_diameter(&rect).unwrap();
        assert!((d - 4.0).abs() <= 1.0, "{d}");
        assert_eq!(d, inscribed_oracle(&rect));
    }

    #[test]
    fn empty_cell_rejected() {
        assert!(max_inscribed_diameter(&BinaryMask::filled(3, 3, false)).is_err());
    }

    proptest! {
        #[test]
        fn edt_matches_brute_force(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = BinaryMask::from_fn(w, h, |_, _| rng.gen_bool(0.15));
            prop_assert_eq!(distance_transform(&m).into_data(), brute_force(&m));
        }
    }
}
