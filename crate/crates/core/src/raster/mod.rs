//! Raster containers shared by every stage of the pipeline.
//!
//! All images are single-channel, row-major, and immutable in spirit: every
//! operation returns a fresh raster. The four domain rasters are aliases of
//! one generic container so shape handling lives in one place.

mod components;
mod filter;
mod pad;

pub use components::{connected_components, largest_component};
pub use filter::gaussian_blur;
pub use pad::{pad_to_multiple, PadMode, Padding};

use crate::error::{Error, Result};

/// A dense 2D raster stored in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// Real-valued image: raw intensities, normalized inputs, probability maps.
pub type GrayImage = Raster<f32>;
/// 8-bit image on the 0–255 scale used by thresholds and contrasts.
pub type ByteImage = Raster<u8>;
/// Object labels, 0 is background.
pub type LabelMap = Raster<u32>;
/// Binary mask.
pub type BinaryMask = Raster<bool>;

impl<T> Raster<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::param(
                "data",
                format!(
                    "length {} does not match {}x{}",
                    data.len(),
                    width,
                    height
                ),
            ));
        }
        Ok(Raster {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Raster {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// `(width, height)`
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip_map<U, V>(&self, other: &Raster<U>, mut f: impl FnMut(&T, &U) -> V) -> Result<Raster<V>> {
        self.ensure_same_dims(other)?;
        Ok(Raster {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn ensure_same_dims<U>(&self, other: &Raster<U>) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }

    /// Returns true if the pixel lies on the outermost row or column.
    #[inline]
    pub fn on_border(&self, x: usize, y: usize) -> bool {
        x == 0 || y == 0 || x + 1 == self.width || y + 1 == self.height
    }
}

impl<T: Copy> Raster<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Raster {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    pub fn transpose(&self) -> Self {
        Raster::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }

    /// Copies the `width`×`height` window whose top-left corner is `(left, top)`.
    pub fn crop(&self, left: usize, top: usize, width: usize, height: usize) -> Result<Self> {
        if left + width > self.width || top + height > self.height {
            return Err(Error::param(
                "crop",
                format!(
                    "window {}x{}+{}+{} exceeds {}x{}",
                    width, height, left, top, self.width, self.height
                ),
            ));
        }
        Ok(Raster::from_fn(width, height, |x, y| self.get(left + x, top + y)))
    }
}

/// Pixel adjacency used by labeling, reconstruction and flooding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

const OFFSETS_4: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
const OFFSETS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

impl Connectivity {
    /// Neighbor offsets `(dx, dy)` in raster order.
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &OFFSETS_4,
            Connectivity::Eight => &OFFSETS_8,
        }
    }

    /// Offsets that precede the center pixel in raster order.
    pub fn causal_offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &OFFSETS_4[..2],
            Connectivity::Eight => &OFFSETS_8[..4],
        }
    }

    /// Offsets that follow the center pixel in raster order.
    pub fn anticausal_offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &OFFSETS_4[2..],
            Connectivity::Eight => &OFFSETS_8[4..],
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(Error::param("connectivity", format!("{other} is not 4 or 8"))),
        }
    }
}

impl std::fmt::Display for Connectivity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Calls `f` with the linear index of every in-bounds neighbor of `(x, y)`.
#[inline]
pub(crate) fn for_each_neighbor(
    x: usize,
    y: usize,
    width: usize,
    height: usize,
    offsets: &[(isize, isize)],
    mut f: impl FnMut(usize),
) {
    for &(dx, dy) in offsets {
        let nx = x as isize + dx;
        let ny = y as isize + dy;
        if nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height {
            f(ny as usize * width + nx as usize);
        }
    }
}

/// Reflects an out-of-range coordinate back into `0..n` without repeating the edge
/// sample (`-1 -> 1`, `n -> n - 2`).
pub fn mirror_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let period = 2 * (n - 1);
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - m;
    }
    m as usize
}

impl GrayImage {
    /// Checks the probability-map contract: every value in `[0, 1]`.
    pub fn check_probability(&self) -> Result<()> {
        self.check_range(0.0, 1.0)
    }

    /// Checks the normalized-input contract: every value in `[-0.5, 0.5]`.
    pub fn check_normalized(&self) -> Result<()> {
        self.check_range(-0.5, 0.5)
    }

    fn check_range(&self, lo: f32, hi: f32) -> Result<()> {
        match self
            .data
            .iter()
            .position(|v| !(lo..=hi).contains(v))
        {
            Some(index) => Err(Error::OutOfRange {
                index,
                value: self.data[index],
                lo,
                hi,
            }),
            None => Ok(()),
        }
    }

    pub fn min_max(&self) -> Option<(f32, f32)> {
        self.data.iter().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

/// Tolerance for values slightly outside `[0, 1]` accepted by [`quantize`].
pub const QUANTIZE_TOLERANCE: f32 = 1e-6;

/// Maps a probability in `[0, 1]` to the 0–255 scale, rounding half away from zero.
#[inline]
pub fn quantize_value(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Quantizes a probability map to 8 bits: `round(v * 255)`.
pub fn quantize(img: &GrayImage) -> Result<ByteImage> {
    if let Some(index) = img
        .data()
        .iter()
        .position(|v| !(*v >= -QUANTIZE_TOLERANCE && *v <= 1.0 + QUANTIZE_TOLERANCE))
    {
        return Err(Error::OutOfRange {
            index,
            value: img.data()[index],
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(img.map(|&v| quantize_value(v)))
}

/// Inverse of [`quantize`]: `b / 255`.
pub fn dequantize(img: &ByteImage) -> GrayImage {
    img.map(|&b| b as f32 / 255.0)
}

impl ByteImage {
    pub fn to_gray(&self) -> GrayImage {
        self.map(|&b| b as f32)
    }
}

impl BinaryMask {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn complement(&self) -> BinaryMask {
        self.map(|&b| !b)
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_map(other, |&a, &b| a && b)
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_map(other, |&a, &b| a || b)
    }

    /// 1.0 for set pixels, 0.0 elsewhere.
    pub fn to_gray(&self) -> GrayImage {
        self.map(|&b| if b { 1.0 } else { 0.0 })
    }

    /// Pixels as `(x, y)` pairs in raster order.
    pub fn pixels(&self) -> Vec<(usize, usize)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i % self.width, i / self.width))
            .collect()
    }
}

impl LabelMap {
    /// Largest label present (the object count for canonical maps).
    pub fn max_label(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    /// Distinct positive labels in ascending order.
    pub fn labels(&self) -> Vec<u32> {
        let mut seen: Vec<u32> = self.data.iter().copied().filter(|&l| l > 0).collect();
        seen.sort_unstable();
        seen.dedup();
        seen
    }

    /// Number of distinct positive labels.
    pub fn object_count(&self) -> usize {
        self.labels().len()
    }

    pub fn to_mask(&self) -> BinaryMask {
        self.map(|&l| l > 0)
    }

    pub fn mask_of(&self, label: u32) -> BinaryMask {
        self.map(|&l| l == label)
    }

    /// Renumbers positive labels to `1..=N` in raster order of each label's first pixel.
    pub fn canonicalize(&self) -> LabelMap {
        let mut mapping = std::collections::HashMap::new();
        let mut next = 0u32;
        self.map(|&l| {
            if l == 0 {
                0
            } else {
                *mapping.entry(l).or_insert_with(|| {
                    next += 1;
                    next
                })
            }
        })
    }

    /// Pixel count per label, indexed by label value.
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.max_label() as usize + 1];
        for &l in &self.data {
            areas[l as usize] += 1;
        }
        areas
    }

    /// Inclusive bounding boxes `(x0, y0, x1, y1)` indexed by label value.
    pub fn bounding_boxes(&self) -> Vec<Option<(usize, usize, usize, usize)>> {
        let mut boxes: Vec<Option<(usize, usize, usize, usize)>> = vec![None; self.max_label() as usize + 1];
        for y in 0..self.height {
            for x in 0..self.width {
                let l = self.get(x, y) as usize;
                if l == 0 {
                    continue;
                }
                boxes[l] = Some(match boxes[l] {
                    None => (x, y, x, y),
                    Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                });
            }
        }
        boxes
    }
}
