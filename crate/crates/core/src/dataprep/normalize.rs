use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// Contrast-limited adaptive histogram equalization settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClaheParams {
    pub tiles_x: usize,
    pub tiles_y: usize,
    /// Histogram bin cap as a multiple of the mean bin count.
    pub clip_limit: f64,
}

impl Default for ClaheParams {
    fn default() -> Self {
        ClaheParams {
            tiles_x: 8,
            tiles_y: 8,
            clip_limit: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalization {
    /// Global histogram equalization.
    He,
    Clahe(ClaheParams),
    /// Median maps to 0, maximum to 0.5.
    Median,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "he" => Ok(Normalization::He),
            "clahe" => Ok(Normalization::Clahe(ClaheParams::default())),
            "median" => Ok(Normalization::Median),
            other => Err(Error::param("normalization", format!("unknown method `{other}`"))),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::He => "he",
            Normalization::Clahe(_) => "clahe",
            Normalization::Median => "median",
        })
    }
}

/// Maps an image to the `[-0.5, 0.5]` input range. Constant images map to zeros.
pub fn normalize(img: &GrayImage, method: Normalization) -> GrayImage {
    let Some((lo, hi)) = img.min_max() else {
        return img.clone();
    };
    if hi <= lo {
        return img.map(|_| 0.0);
    }
    match method {
        Normalization::He => equalize(img, lo, hi),
        Normalization::Clahe(params) => clahe(img, lo, hi, params),
        Normalization::Median => median_scale(img, hi),
    }
}

#[inline]
fn bin_of(v: f32, lo: f32, hi: f32) -> usize {
    (((v - lo) as f64 / (hi - lo) as f64) * 255.0).round() as usize
}

fn equalize(img: &GrayImage, lo: f32, hi: f32) -> GrayImage {
    let mut hist = [0usize; 256];
    for &v in img.data() {
        hist[bin_of(v, lo, hi)] += 1;
    }
    let n = img.len() as f64;
    let mut cdf = [0f64; 256];
    let mut acc = 0usize;
    for (c, h) in cdf.iter_mut().zip(hist) {
        acc += h;
        *c = acc as f64 / n;
    }
    img.map(|&v| (cdf[bin_of(v, lo, hi)] - 0.5) as f32)
}

fn median_scale(img: &GrayImage, hi: f32) -> GrayImage {
    let mut sorted = img.data().to_vec();
    sorted.sort_by(f32::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    };
    let span = hi as f64 - median;
    if span <= 0.0 {
        return img.map(|_| 0.0);
    }
    img.map(|&v| (0.5 * (v as f64 - median) / span).clamp(-0.5, 0.5) as f32)
}

/// Tile `i` of `n` over `len` pixels spans `[i*len/n, (i+1)*len/n)`.
fn tile_bounds(i: usize, n: usize, len: usize) -> (usize, usize) {
    (i * len / n, (i + 1) * len / n)
}

fn clahe(img: &GrayImage, lo: f32, hi: f32, params: ClaheParams) -> GrayImage {
    let (w, h) = img.dims();
    let nx = params.tiles_x.clamp(1, w);
    let ny = params.tiles_y.clamp(1, h);

    // per-tile clipped cumulative histograms, normalized to [0, 1]
    let mut maps = vec![[0f64; 256]; nx * ny];
    for ty in 0..ny {
        let (y0, y1) = tile_bounds(ty, ny, h);
        for tx in 0..nx {
            let (x0, x1) = tile_bounds(tx, nx, w);
            let mut hist = [0f64; 256];
            for y in y0..y1 {
                for x in x0..x1 {
                    hist[bin_of(img.get(x, y), lo, hi)] += 1.0;
                }
            }
            let count = ((x1 - x0) * (y1 - y0)) as f64;
            let limit = (params.clip_limit * count / 256.0).max(1.0);
            let mut excess = 0.0;
            for b in hist.iter_mut() {
                if *b > limit {
                    excess += *b - limit;
                    *b = limit;
                }
            }
            let share = excess / 256.0;
            let map = &mut maps[ty * nx + tx];
            let mut acc = 0.0;
            for (m, b) in map.iter_mut().zip(hist) {
                acc += b + share;
                *m = acc / count;
            }
        }
    }

    // tile centers for bilinear blending between neighboring mappings
    let centers = |n: usize, len: usize| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let (a, b) = tile_bounds(i, n, len);
                (a + b - 1) as f64 / 2.0
            })
            .collect()
    };
    let cx = centers(nx, w);
    let cy = centers(ny, h);
    let locate = |c: &[f64], p: f64| -> (usize, usize, f64) {
        if p <= c[0] {
            return (0, 0, 0.0);
        }
        if p >= c[c.len() - 1] {
            let last = c.len() - 1;
            return (last, last, 0.0);
        }
        let i = c.iter().rposition(|&v| v <= p).unwrap_or(0);
        (i, i + 1, (p - c[i]) / (c[i + 1] - c[i]))
    };

    GrayImage::from_fn(w, h, |x, y| {
        let bin = bin_of(img.get(x, y), lo, hi);
        let (x0, x1, fx) = locate(&cx, x as f64);
        let (y0, y1, fy) = locate(&cy, y as f64);
        let at = |tx: usize, ty: usize| maps[ty * nx + tx][bin];
        let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
        let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
        ((top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0) - 0.5) as f32
    })
}
