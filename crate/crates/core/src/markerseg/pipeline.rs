use super::{cell_region_mask, clip_markers, extract_markers, segmentation_function, watershed, MarkerFunction, PipelineParams, SegmentationFunction};
use crate::error::Result;
use crate::raster::{GrayImage, LabelMap};

/// Removes every object owning a pixel in the outermost row or column, then
/// renumbers the rest canonically.
pub fn remove_border_cells(labels: &LabelMap) -> LabelMap {
    let (w, h) = labels.dims();
    let mut touching = vec![false; labels.max_label() as usize + 1];
    for y in 0..h {
        for x in 0..w {
            if labels.on_border(x, y) {
                touching[labels.get(x, y) as usize] = true;
            }
        }
    }
    labels
        .map(|&l| if touching[l as usize] { 0 } else { l })
        .canonicalize()
}

/// Intermediate products of one pipeline run.
#[derive(Clone, Debug)]
pub struct SegmentationReport {
    pub labels: LabelMap,
    pub markers: MarkerFunction,
    /// Markers lying entirely outside the cell region.
    pub dropped_markers: usize,
    /// Object count before border removal.
    pub segments: usize,
}

/// Full post-processing: markers, relief, cell region, watershed and optional
/// border-cell removal. Labels are renumbered canonically.
pub fn segment_image(marker_pred: &GrayImage, fg_pred: &GrayImage, params: &PipelineParams) -> Result<LabelMap> {
    Ok(segment_image_detailed(marker_pred, fg_pred, params)?.labels)
}

pub fn segment_image_detailed(
    marker_pred: &GrayImage,
    fg_pred: &GrayImage,
    params: &PipelineParams,
) -> Result<SegmentationReport> {
    segment_image_with_relief(marker_pred, fg_pred, params, Ok)
}

/// Like [`segment_image_detailed`] but passes the segmentation function through
/// `transform` before flooding, which lets callers substitute another relief.
pub fn segment_image_with_relief(
    marker_pred: &GrayImage,
    fg_pred: &GrayImage,
    params: &PipelineParams,
    transform: impl FnOnce(SegmentationFunction) -> Result<SegmentationFunction>,
) -> Result<SegmentationReport> {
    params.validate()?;
    marker_pred.ensure_same_dims(fg_pred)?;
    let conn = params.connectivity;
    let markers = extract_markers(marker_pred, params.marker_diameter(), params.t_m, params.h, conn)?;
    let relief = transform(segmentation_function(fg_pred)?)?;
    let region = cell_region_mask(fg_pred, params.t_c)?;
    let (_, dropped_markers) = clip_markers(&markers, &region)?;
    let flooded = watershed(&markers, &relief, &region, conn)?;
    let segments = flooded.object_count();
    let labels = if params.remove_border {
        remove_border_cells(&flooded)
    } else {
        flooded.canonicalize()
    };
    Ok(SegmentationReport {
        labels,
        markers,
        dropped_markers,
        segments,
    })
}
