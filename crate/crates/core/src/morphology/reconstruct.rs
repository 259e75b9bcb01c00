use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::raster::{connected_components, for_each_neighbor, BinaryMask, ByteImage, Connectivity, GrayImage, LabelMap};

/// Morphological reconstruction by dilation of `marker` under `ceiling`.
///
/// Computes the fixed point of `r <- min(dilate(r), ceiling)` exactly using the
/// hybrid raster / anti-raster scan followed by FIFO propagation (Vincent, 1993).
pub fn geodesic_reconstruct(
    marker: &GrayImage,
    ceiling: &GrayImage,
    connectivity: Connectivity,
) -> Result<GrayImage> {
    marker.ensure_same_dims(ceiling)?;
    let (w, h) = marker.dims();
    let mask = ceiling.data();
    if let Some(index) = marker
        .data()
        .iter()
        .zip(mask)
        .position(|(m, c)| m > c)
    {
        return Err(Error::MarkerAboveCeiling {
            index,
            marker: marker.data()[index],
            ceiling: mask[index],
        });
    }
    let mut r = marker.data().to_vec();

    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            let mut v = r[p];
            for_each_neighbor(x, y, w, h, connectivity.causal_offsets(), |n| v = v.max(r[n]));
            r[p] = v.min(mask[p]);
        }
    }

    let mut queue = VecDeque::new();
    for y in (0..h).rev() {
        for x in (0..w).rev() {
            let p = y * w + x;
            let mut v = r[p];
            for_each_neighbor(x, y, w, h, connectivity.anticausal_offsets(), |n| v = v.max(r[n]));
            r[p] = v.min(mask[p]);
            let rp = r[p];
            let mut enqueue = false;
            for_each_neighbor(x, y, w, h, connectivity.anticausal_offsets(), |n| {
                if r[n] < rp && r[n] < mask[n] {
                    enqueue = true;
                }
            });
            if enqueue {
                queue.push_back(p);
            }
        }
    }

    while let Some(p) = queue.pop_front() {
        let rp = r[p];
        for_each_neighbor(p % w, p / w, w, h, connectivity.offsets(), |n| {
            if r[n] < rp && r[n] != mask[n] {
                r[n] = rp.min(mask[n]);
                queue.push_back(n);
            }
        });
    }

    GrayImage::new(w, h, r)
}

/// h-dome transform: `img - reconstruct(img - h, img)`. Values lie in `[0, h]`.
pub fn hdome(img: &GrayImage, h: f32, connectivity: Connectivity) -> Result<GrayImage> {
    if !(h > 0.0) {
        return Err(Error::param("h", format!("{h} must be positive")));
    }
    let lowered = img.map(|&v| v - h);
    let rec = geodesic_reconstruct(&lowered, img, connectivity)?;
    img.zip_map(&rec, |&a, &b| a - b)
}

/// Pixels where the h-dome of an 8-bit image reaches exactly `h`, i.e. the tops
/// of regional maxima whose dynamics is at least `h`.
pub fn dome_pixels(img: &ByteImage, h: u8, connectivity: Connectivity) -> Result<BinaryMask> {
    if h == 0 {
        return Err(Error::param("h", "must be at least 1"));
    }
    // integer values are exact in f32, so the equality test below is exact
    let dome = hdome(&img.to_gray(), h as f32, connectivity)?;
    Ok(dome.map(|&v| v == h as f32))
}

/// Labels the connected regions of [`dome_pixels`].
pub fn dome_components(img: &ByteImage, h: u8, connectivity: Connectivity) -> Result<LabelMap> {
    Ok(connected_components(&dome_pixels(img, h, connectivity)?, connectivity))
}
