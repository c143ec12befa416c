//! Skeletal mesh extraction from 3D point clouds.
//!
//! Given a raw point cloud, this crate predicts a set of interior skeletal
//! spheres by directly optimizing unsupervised geometric losses, connects
//! them into a non-manifold skeletal mesh (curve segments plus triangle
//! sheets) with prior-based graph initialization and a graph-autoencoder
//! link predictor, and provides downstream consumers: sphere-interpolation
//! surface reconstruction, structural decomposition, and skeleton-quality
//! metrics.

pub mod error;
pub mod geometry;
pub mod optimizer;

pub use error::{Error, Result};
