use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{MarkerFunction, SegmentationFunction};
use crate::error::Result;
use crate::raster::{for_each_neighbor, BinaryMask, Connectivity, LabelMap};

/// Restricts markers to `region`. Returns the clipped markers and how many
/// markers lost all their pixels.
pub fn clip_markers(markers: &MarkerFunction, region: &BinaryMask) -> Result<(MarkerFunction, usize)> {
    let before = markers.0.labels();
    let clipped = markers.0.zip_map(region, |&l, &r| if r { l } else { 0 })?;
    let after = clipped.labels();
    Ok((MarkerFunction(clipped), before.len() - after.len()))
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    priority: f32,
    seq: u64,
    index: u32,
    label: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Marker-controlled watershed by priority flooding, restricted to `region`.
///
/// Marker pixels (clipped to the region) enter the queue in raster order at
/// their own relief value. The lowest entry is popped first, FIFO among equal
/// priorities; a popped pixel takes the label it was queued with and queues its
/// unvisited region neighbors at `max(relief(neighbor), current priority)`.
/// Region pixels no marker can reach stay 0, as does everything outside.
pub fn watershed(
    markers: &MarkerFunction,
    relief: &SegmentationFunction,
    region: &BinaryMask,
    connectivity: Connectivity,
) -> Result<LabelMap> {
    let relief = &relief.0;
    markers.0.ensure_same_dims(relief)?;
    markers.0.ensure_same_dims(region)?;
    let (markers, _) = clip_markers(markers, region)?;
    let (w, h) = relief.dims();
    let values = relief.data();
    let inside = region.data();

    let mut labels = vec![0u32; w * h];
    let mut queued = vec![false; w * h];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for (i, &l) in markers.0.data().iter().enumerate() {
        if l > 0 {
            queued[i] = true;
            heap.push(Reverse(Entry {
                priority: values[i],
                seq,
                index: i as u32,
                label: l,
            }));
            seq += 1;
        }
    }

    while let Some(Reverse(entry)) = heap.pop() {
        let p = entry.index as usize;
        labels[p] = entry.label;
        for_each_neighbor(p % w, p / w, w, h, connectivity.offsets(), |n| {
            if inside[n] && !queued[n] {
                queued[n] = true;
                heap.push(Reverse(Entry {
                    priority: values[n].max(entry.priority),
                    seq,
                    index: n as u32,
                    label: entry.label,
                }));
                seq += 1;
            }
        });
    }
    LabelMap::new(w, h, labels)
}
