//! Flat morphology with disk structuring elements, geodesic reconstruction,
//! h-domes and exact Euclidean distances.

mod disk;
mod distance;
mod filter;
mod reconstruct;

pub use disk::DiskSE;
pub use distance::{distance_transform, interior_squared_distance, max_inscribed_diameter, squared_distance_transform};
pub use filter::{dilate, erode, gray_close, gray_dilate, gray_erode, gray_open, open, top_hat};
pub use reconstruct::{dome_components, dome_pixels, geodesic_reconstruct, hdome};
