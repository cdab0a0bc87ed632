//! Weight-function input transforms.
//!
//! The convolution weight function never sees raw neighbor positions; it sees
//! one of the transforms defined here: the raw coordinate offset, its cubic
//! polynomial feature expansion, or (in 3D) the viewpoint-invariant
//! descriptor built on a Gram-Schmidt basis.

pub mod poly;
mod raster;
mod vi;

pub use poly::{poly_features, PolyFeatures, POLY_LEN_2D, POLY_LEN_3D};
pub use raster::{infer_raster_dims, raster_to_pointcloud, Image};
pub use vi::{gram_schmidt_basis, vi_descriptor, OrthoBasis, VIDescriptor, VI_LEN};
