use super::{clip_markers, MarkerFunction};
use crate::error::Result;
use crate::morphology::squared_distance_transform;
use crate::raster::{BinaryMask, LabelMap};

/// Labels every region pixel with its Euclidean-nearest marker, ignoring the
/// image content. Equidistant pixels take the smaller label.
pub fn distance_baseline(markers: &MarkerFunction, region: &BinaryMask) -> Result<LabelMap> {
    markers.0.ensure_same_dims(region)?;
    let (clipped, _) = clip_markers(markers, region)?;
    let (w, h) = region.dims();
    let mut best = vec![f64::INFINITY; w * h];
    let mut labels = vec![0u32; w * h];
    for label in clipped.0.labels() {
        let dist = squared_distance_transform(&clipped.0.mask_of(label));
        for i in 0..w * h {
            // labels ascend, so strict comparison keeps the smaller one on ties
            if region.data()[i] && dist[i] < best[i] {
                best[i] = dist[i];
                labels[i] = label;
            }
        }
    }
    LabelMap::new(w, h, labels)
}
