//! Data preparation upstream of the predictor: input normalization,
//! augmentation, reference outputs and pixel weights for training.

mod augment;
mod normalize;
mod reference;
mod weights;

pub use augment::{augment, augment_with, AugmentationSpec, ElasticParams, RigidDraw};
pub use normalize::{normalize, ClaheParams, Normalization};
pub use reference::{
    make_reference, markers_from_weak, FullAnnotation, ReferenceOutputs, WeakAnnotation,
};
pub use weights::{weight_map, weighted_cross_entropy, Balance, WeightParams, PROBABILITY_EPSILON};
