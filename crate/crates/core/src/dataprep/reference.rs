use crate::error::{Error, Result};
use crate::morphology::{erode, interior_squared_distance, max_inscribed_diameter, DiskSE};
use crate::raster::{for_each_neighbor, largest_component, BinaryMask, Connectivity, LabelMap};

/// Pixel-accurate instance annotation: every positive label is one cell mask.
#[derive(Clone, Debug, PartialEq)]
pub struct FullAnnotation(pub LabelMap);

/// Marker annotation: every positive label is one compact marker inside a cell.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakAnnotation(pub LabelMap);

/// Binary training targets derived from an annotation.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceOutputs {
    /// Marker image: one non-touching blob per cell.
    pub markers: BinaryMask,
    /// Foreground image: every cell pixel.
    pub foreground: BinaryMask,
    /// The markers of `markers`, labeled with the id of their source cell.
    pub marker_labels: LabelMap,
}

/// One object cut out at its bounding box.
struct Cutout {
    left: usize,
    top: usize,
    mask: BinaryMask,
}

impl Cutout {
    fn of(labels: &LabelMap, label: u32, bbox: (usize, usize, usize, usize)) -> Cutout {
        let (x0, y0, x1, y1) = bbox;
        Cutout {
            left: x0,
            top: y0,
            mask: BinaryMask::from_fn(x1 - x0 + 1, y1 - y0 + 1, |x, y| labels.get(x0 + x, y0 + y) == label),
        }
    }

    fn with_mask(&self, mask: BinaryMask) -> Cutout {
        Cutout {
            left: self.left,
            top: self.top,
            mask,
        }
    }
}

/// First pixel in raster order with the largest interior distance among the
/// pixels accepted by `allowed`.
fn deepest_pixel(cell: &BinaryMask, allowed: impl Fn(usize) -> bool) -> Option<usize> {
    let depth = interior_squared_distance(cell);
    let mut best: Option<usize> = None;
    for (i, &d) in depth.iter().enumerate() {
        if cell.data()[i] && allowed(i) && best.is_none_or(|b| d > depth[b]) {
            best = Some(i);
        }
    }
    best
}

fn single_pixel(cell: &BinaryMask, index: usize) -> BinaryMask {
    let mut out = BinaryMask::filled(cell.width(), cell.height(), false);
    out.data_mut()[index] = true;
    out
}

/// Ultimate-erosion point: the deepest pixel of `cell`, first in raster order.
fn ultimate_point(cell: &BinaryMask) -> BinaryMask {
    let i = deepest_pixel(cell, |_| true).expect("cell is not empty");
    single_pixel(cell, i)
}

/// Writes the markers of `cutouts` into a full-size map, trimming later markers
/// away from earlier ones so no two markers are 8-adjacent.
///
/// A marker trimmed to nothing is replaced by the deepest pixel of its cell
/// that does not touch an earlier marker.
fn place_separated(
    dims: (usize, usize),
    items: Vec<(u32, Cutout, Cutout)>,
    connectivity: Connectivity,
) -> LabelMap {
    let (w, h) = dims;
    let mut out = LabelMap::filled(w, h, 0);
    for (label, cell, marker) in items {
        let touches_other = |out: &LabelMap, gx: usize, gy: usize| {
            let mut hit = false;
            for_each_neighbor(gx, gy, w, h, Connectivity::Eight.offsets(), |n| {
                let l = out.data()[n];
                if l != 0 && l != label {
                    hit = true;
                }
            });
            hit
        };
        let (mw, _) = marker.mask.dims();
        let trimmed = BinaryMask::from_fn(mw, marker.mask.height(), |x, y| {
            marker.mask.get(x, y) && !touches_other(&out, marker.left + x, marker.top + y)
        });
        let kept = if trimmed == marker.mask {
            trimmed
        } else {
            largest_component(&trimmed, connectivity)
        };
        let kept = if kept.is_blank() {
            let cw = cell.mask.width();
            let free = deepest_pixel(&cell.mask, |i| {
                !touches_other(&out, cell.left + i % cw, cell.top + i / cw)
            });
            let pick = match free {
                Some(i) => single_pixel(&cell.mask, i),
                None => ultimate_point(&cell.mask),
            };
            cell.with_mask(pick)
        } else {
            marker.with_mask(kept)
        };
        for (x, y) in kept.mask.pixels() {
            out.set(kept.left + x, kept.top + y, label);
        }
    }
    out
}

/// Builds the marker and foreground targets from a full annotation.
///
/// Each cell is eroded by a disk of diameter `(1 - k) * d_max`, where `d_max` is
/// the cell's own maximal inscribed diameter. `k = 1` keeps the mask, `k = 0`
/// reduces it to its ultimate-erosion point. Disconnected erosions keep their
/// largest component (earliest first pixel on ties). Markers of adjacent cells
/// are trimmed apart so the marker image has at least a one-pixel gap.
pub fn make_reference(full: &FullAnnotation, k: f64, connectivity: Connectivity) -> Result<ReferenceOutputs> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::param("k", format!("{k} is outside [0, 1]")));
    }
    let labels = &full.0;
    let boxes = labels.bounding_boxes();
    let mut items = Vec::new();
    for label in labels.labels() {
        let bbox = boxes[label as usize].expect("label present");
        let cell = Cutout::of(labels, label, bbox);
        let marker = if k == 0.0 {
            ultimate_point(&cell.mask)
        } else {
            let d_se = (1.0 - k) * max_inscribed_diameter(&cell.mask)?;
            let eroded = largest_component(&erode(&cell.mask, &DiskSE::new(d_se)?), connectivity);
            if eroded.is_blank() {
                ultimate_point(&cell.mask)
            } else {
                eroded
            }
        };
        let marker = cell.with_mask(marker);
        items.push((label, cell, marker));
    }
    let marker_labels = place_separated(labels.dims(), items, connectivity);
    Ok(ReferenceOutputs {
        markers: marker_labels.to_mask(),
        foreground: labels.to_mask(),
        marker_labels,
    })
}

fn touching_labels(labels: &LabelMap) -> Vec<u32> {
    let (w, h) = labels.dims();
    let mut touching = vec![false; labels.max_label() as usize + 1];
    for y in 0..h {
        for x in 0..w {
            let l = labels.get(x, y);
            if l == 0 {
                continue;
            }
            for_each_neighbor(x, y, w, h, Connectivity::Eight.offsets(), |n| {
                let o = labels.data()[n];
                if o != 0 && o != l {
                    touching[l as usize] = true;
                }
            });
        }
    }
    (1..touching.len() as u32).filter(|&l| touching[l as usize]).collect()
}

/// Markers from a weak annotation.
///
/// Non-touching markers pass through unchanged. Markers that touch another one
/// are eroded by a diameter-3 disk, repeatedly, until no two touch; a marker
/// that would vanish keeps its ultimate-erosion point.
pub fn markers_from_weak(weak: &WeakAnnotation, connectivity: Connectivity) -> Result<LabelMap> {
    const MAX_ROUNDS: usize = 64;
    let se = DiskSE::new(3.0)?;
    let mut labels = weak.0.clone();
    for _ in 0..MAX_ROUNDS {
        let touching = touching_labels(&labels);
        if touching.is_empty() {
            return Ok(labels);
        }
        let boxes = labels.bounding_boxes();
        let mut changed = false;
        for &label in &touching {
            let cut = Cutout::of(&labels, label, boxes[label as usize].expect("label present"));
            let eroded = largest_component(&erode(&cut.mask, &se), connectivity);
            let next = if eroded.is_blank() {
                ultimate_point(&cut.mask)
            } else {
                eroded
            };
            if next != cut.mask {
                changed = true;
            }
            for (x, y) in cut.mask.pixels() {
                if !next.get(x, y) {
                    labels.set(cut.left + x, cut.top + y, 0);
                }
            }
        }
        if !changed {
            break;
        }
    }
    // single-pixel markers can still touch; trim them apart in label order
    let boxes = labels.bounding_boxes();
    let items = labels
        .labels()
        .into_iter()
        .map(|l| {
            let cut = Cutout::of(&labels, l, boxes[l as usize].expect("label present"));
            let marker = cut.with_mask(cut.mask.clone());
            (l, cut, marker)
        })
        .collect();
    Ok(place_separated(labels.dims(), items, connectivity))
}
