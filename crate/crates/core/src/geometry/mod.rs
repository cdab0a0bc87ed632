//! Point-cloud container and spatial operations.
//!
//! A [`PointCloud`] stores 2D or 3D positions (2D clouds keep `z = 0`) with
//! optional per-point feature rows and unit normals. All neighbor queries go
//! through a [`SpatialIndex`] whose results are defined to match brute-force
//! distance scans exactly, including tie-breaking by ascending point index.

mod cloud;
mod density;
mod index;
mod normals;
mod sampling;

pub use cloud::PointCloud;
pub use density::inverse_density;
pub use index::{build_index, epsilon_ball_query, knn_query, Neighborhood, NeighborhoodKind, SpatialIndex};
pub use normals::estimate_normals;
pub use sampling::{farthest_point_sampling, grid_subsample, pc2d_keep_indices, pc2d_subsample};
