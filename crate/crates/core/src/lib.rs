//! Surface reconstruction from noisy point clouds with point-grid attention.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: a small reverse-mode differentiation tape with the handful
//!   of primitives the network needs.
//! * [`fields`]: analytic ground-truth shapes, samplers, and boundary-point
//!   extraction.
//! * [`model`]: the point-grid transformer U-Net encoder and the
//!   multi-resolution occupancy decoder.
//! * [`training`]: BCE / margin-BCE losses, Adam, and the two-stage loop.
//! * [`meshing`]: marching cubes and multiresolution isosurface extraction.
//! * [`metrics`]: IoU, Chamfer distances, normal consistency, F-score.
//!
//! Files are handled next to the types they store: datasets in [`fields`],
//! checkpoints in [`model`], loss traces in [`training`], OBJ meshes in
//! [`meshing`].

pub mod error;
pub mod fields;
pub mod meshing;
pub mod metrics;
pub mod model;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
