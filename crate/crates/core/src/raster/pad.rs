use super::{mirror_index, GrayImage};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PadMode {
    Zero,
    Mirror,
}

/// Where the original image sits inside a padded one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Padding {
    pub left: usize,
    pub top: usize,
    pub width: usize,
    pub height: usize,
}

impl Padding {
    /// Crops the original content back out of a padded image.
    pub fn crop(&self, padded: &GrayImage) -> Result<GrayImage> {
        padded.crop(self.left, self.top, self.width, self.height)
    }
}

/// Grows `img` to the smallest dimensions divisible by `multiple`, splitting the
/// extra rows and columns evenly (the odd one goes right/bottom).
pub fn pad_to_multiple(img: &GrayImage, multiple: usize, mode: PadMode) -> Result<(GrayImage, Padding)> {
    if multiple == 0 {
        return Err(Error::param("multiple", "must be at least 1"));
    }
    let (w, h) = img.dims();
    let pw = w.div_ceil(multiple) * multiple;
    let ph = h.div_ceil(multiple) * multiple;
    let left = (pw - w) / 2;
    let top = (ph - h) / 2;
    let padded = GrayImage::from_fn(pw, ph, |x, y| {
        let sx = x as isize - left as isize;
        let sy = y as isize - top as isize;
        let inside = sx >= 0 && sy >= 0 && (sx as usize) < w && (sy as usize) < h;
        match (inside, mode) {
            (true, _) => img.get(sx as usize, sy as usize),
            (false, PadMode::Zero) => 0.0,
            (false, PadMode::Mirror) => img.get(mirror_index(sx, w), mirror_index(sy, h)),
        }
    });
    Ok((
        padded,
        Padding {
            left,
            top,
            width: w,
            height: h,
        },
    ))
}
