//! Cell Segmentation Benchmark measures: SEG, DET and their mean OP_CSB.

mod matching;
mod report;

pub use matching::{jaccard, MatchTable, RegionMatch};
pub use report::{det_measure, evaluate_frames, op_csb, seg_measure, DetEvents, DetScore, EvalReport, SegScore};
