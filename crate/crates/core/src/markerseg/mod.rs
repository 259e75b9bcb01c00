//! Marker extraction, segmentation function, cell-region mask and the
//! marker-controlled watershed that combines them into instance labels.

mod baseline;
mod markers;
mod params;
mod pipeline;
mod threshold;
mod watershed;

pub use baseline::distance_baseline;
pub use markers::{extract_markers, marker_filter_diameter, MarkerFunction};
pub use params::PipelineParams;
pub use pipeline::{remove_border_cells, segment_image, segment_image_detailed, segment_image_with_relief, SegmentationReport};
pub use threshold::{calibrate_tc, cell_region_mask, segmentation_function, Calibration, SegmentationFunction};
pub use watershed::{clip_markers, watershed};
