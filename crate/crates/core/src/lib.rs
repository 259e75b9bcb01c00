//! Cell instance segmentation from per-pixel probability maps.
//!
//! An external predictor supplies two maps per frame: the probability of
//! belonging to a cell marker and the probability of belonging to any cell.
//! This crate turns them into instance label maps by morphological marker
//! extraction (opening, thresholding, h-dome) followed by a marker-controlled
//! watershed restricted to the thresholded foreground. It also carries the
//! supporting toolchain: input normalization, reference outputs and pixel
//! weights for training, augmentation, threshold calibration and the Cell
//! Tracking Challenge SEG / DET measures.

pub mod cli;
pub mod dataprep;
pub mod error;
pub mod io;
pub mod markerseg;
pub mod metrics;
pub mod morphology;
pub mod raster;

pub use error::{Error, Result};
