//! Point-cloud convolution toolkit.
//!
//! Implements PointConv-style continuous convolution over 2D and 3D point
//! clouds with the robustness-oriented variants: ε-ball neighborhoods with a
//! capped random neighbor budget, cubic-polynomial weight functions under a
//! Sobolev smoothness penalty, and a viewpoint-invariant (VI) geometric
//! descriptor for 3D inputs. A desk-scale training harness reproduces the
//! MNIST scale/rotation robustness protocols end to end on the CPU.
//!
//! The crate is organized around five layers:
//!
//! - [`geometry`]: point-cloud container, exact spatial queries (kNN, ε-ball),
//!   farthest point sampling, grid/PC-2D subsampling, normal estimation, and
//!   inverse-density normalizers.
//! - [`descriptors`]: weight-function input transforms — cubic polynomial
//!   bases, the Gram-Schmidt local basis, the VI descriptor, and raster →
//!   point-cloud conversion.
//! - [`conv`]: weight functions (MLP and cubic polynomial), the factorized
//!   convolution layer with hand-derived analytic gradients, and the Sobolev
//!   penalty.
//! - [`network`]: the 4-conv MNIST classification architecture, softmax
//!   cross-entropy, Adam, and the training loop.
//! - [`harness`]: IDX ingestion, scale/rotation augmentation, the robustness
//!   protocols, and CSV/JSON report emission.
//!
//! Everything is 64-bit, deterministic under an explicit seed, and free of
//! autodiff or GPU dependencies.

pub mod conv;
pub mod descriptors;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod network;
pub mod rng;

pub use error::{Error, Result};
pub use geometry::{Neighborhood, PointCloud, SpatialIndex};
