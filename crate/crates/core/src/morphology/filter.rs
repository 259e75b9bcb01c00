use std::collections::VecDeque;

use super::DiskSE;
use crate::raster::{BinaryMask, GrayImage};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Rank {
    Min,
    Max,
}

impl Rank {
    #[inline]
    fn pick(self, a: f32, b: f32) -> f32 {
        match self {
            Rank::Min => a.min(b),
            Rank::Max => a.max(b),
        }
    }

    fn identity(self) -> f32 {
        match self {
            Rank::Min => f32::INFINITY,
            Rank::Max => f32::NEG_INFINITY,
        }
    }

    /// True when `a` should evict `b` from the back of a monotone deque.
    #[inline]
    fn dominates(self, a: f32, b: f32) -> bool {
        match self {
            Rank::Min => a <= b,
            Rank::Max => a >= b,
        }
    }
}

/// Min or max over `[x - r, x + r]` for every position of a row. Window parts
/// outside the row contribute `outside` when given and are ignored otherwise.
fn sliding_row(row: &[f32], r: usize, rank: Rank, outside: Option<f32>, out: &mut [f32]) {
    let n = row.len();
    let mut deque: VecDeque<usize> = VecDeque::with_capacity(2 * r + 1);
    let mut next = 0;
    for x in 0..n {
        let hi = (x + r).min(n - 1);
        while next <= hi {
            while let Some(&b) = deque.back() {
                if rank.dominates(row[next], row[b]) {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(next);
            next += 1;
        }
        let lo = x.saturating_sub(r);
        while let Some(&f) = deque.front() {
            if f < lo {
                deque.pop_front();
            } else {
                break;
            }
        }
        let mut v = row[*deque.front().expect("window is never empty")];
        if let Some(pad) = outside {
            if x < r || x + r >= n {
                v = rank.pick(v, pad);
            }
        }
        out[x] = v;
    }
}

/// Flat rank filter with a disk, decomposed into per-row 1D sliding windows.
fn disk_filter(img: &GrayImage, se: &DiskSE, rank: Rank, outside: Option<f32>) -> GrayImage {
    let (w, h) = img.dims();
    if img.is_empty() {
        return img.clone();
    }
    let rows = se.row_half_widths();
    let mut widths: Vec<usize> = rows.iter().map(|&(_, hw)| hw).collect();
    widths.sort_unstable();
    widths.dedup();

    let src = img.data();
    let mut out = vec![rank.identity(); w * h];
    let mut filtered = vec![0f32; w * h];
    for &hw in &widths {
        for y in 0..h {
            sliding_row(
                &src[y * w..(y + 1) * w],
                hw,
                rank,
                outside,
                &mut filtered[y * w..(y + 1) * w],
            );
        }
        for &(dy, _) in rows.iter().filter(|&&(_, rhw)| rhw == hw) {
            for y in 0..h {
                let sy = y as isize + dy;
                let dst = &mut out[y * w..(y + 1) * w];
                if sy >= 0 && (sy as usize) < h {
                    let srow = &filtered[sy as usize * w..(sy as usize + 1) * w];
                    for (o, &s) in dst.iter_mut().zip(srow) {
                        *o = rank.pick(*o, s);
                    }
                } else if let Some(pad) = outside {
                    for o in dst.iter_mut() {
                        *o = rank.pick(*o, pad);
                    }
                }
            }
        }
    }
    GrayImage::new(w, h, out).expect("dimensions preserved")
}

/// Grayscale erosion; pixels outside the domain are ignored (+∞).
pub fn gray_erode(img: &GrayImage, se: &DiskSE) -> GrayImage {
    disk_filter(img, se, Rank::Min, None)
}

/// Grayscale dilation; pixels outside the domain are ignored (−∞).
pub fn gray_dilate(img: &GrayImage, se: &DiskSE) -> GrayImage {
    disk_filter(img, se, Rank::Max, None)
}

pub fn gray_open(img: &GrayImage, se: &DiskSE) -> GrayImage {
    gray_dilate(&gray_erode(img, se), se)
}

pub fn gray_close(img: &GrayImage, se: &DiskSE) -> GrayImage {
    gray_erode(&gray_dilate(img, se), se)
}

/// White top-hat: `img - open(img)`, non-negative.
pub fn top_hat(img: &GrayImage, se: &DiskSE) -> GrayImage {
    let opened = gray_open(img, se);
    img.zip_map(&opened, |&a, &b| (a - b).max(0.0))
        .expect("dimensions preserved")
}

/// Binary erosion. The outside of the domain counts as background, so objects
/// touching the border shrink from that side too.
pub fn erode(mask: &BinaryMask, se: &DiskSE) -> BinaryMask {
    disk_filter(&mask.to_gray(), se, Rank::Min, Some(0.0)).map(|&v| v > 0.5)
}

pub fn dilate(mask: &BinaryMask, se: &DiskSE) -> BinaryMask {
    disk_filter(&mask.to_gray(), se, Rank::Max, None).map(|&v| v > 0.5)
}

pub fn open(mask: &BinaryMask, se: &DiskSE) -> BinaryMask {
    dilate(&erode(mask, se), se)
}
