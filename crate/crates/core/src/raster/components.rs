use std::collections::VecDeque;

use super::{for_each_neighbor, BinaryMask, Connectivity, LabelMap};

/// Labels the connected components of the set pixels of `mask`.
///
/// Labels are `1..=N` in raster-scan order of each component's first pixel.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> LabelMap {
    let (w, h) = mask.dims();
    let bits = mask.data();
    let mut labels = vec![0u32; w * h];
    let mut queue = VecDeque::new();
    let mut next = 0u32;
    for start in 0..w * h {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for_each_neighbor(p % w, p / w, w, h, connectivity.offsets(), |n| {
                if bits[n] && labels[n] == 0 {
                    labels[n] = next;
                    queue.push_back(n);
                }
            });
        }
    }
    LabelMap::new(w, h, labels).expect("dimensions preserved")
}

/// Keeps only the largest component of `mask`; ties go to the component whose
/// first pixel comes earliest in raster order. An empty mask is returned unchanged.
pub fn largest_component(mask: &BinaryMask, connectivity: Connectivity) -> BinaryMask {
    let labels = connected_components(mask, connectivity);
    let areas = labels.areas();
    if areas.len() <= 2 {
        return mask.clone();
    }
    // max_by_key keeps the last maximum, so scan in reverse to favor the lowest label
    let best = (1..areas.len())
        .rev()
        .max_by_key(|&l| areas[l])
        .unwrap_or(1) as u32;
    labels.mask_of(best)
}
