//! Foundational 3D types: points, rotations, rigid transforms, cameras,
//! point clouds, and the normalization/resampling protocol shared by the
//! metric suite.

mod camera;
mod cloud;
mod kdtree;
mod normals;
pub mod ply;
mod rotation;
mod vec;

pub use camera::CameraModel;
pub use cloud::{normalize_cloud, resample_cloud, PointCloud};
pub use kdtree::KdTree;
pub use normals::{estimate_normals, symmetric_eigen3, Mat3Sym};
pub use rotation::{Mat3, RigidTransform, Rotation};
pub use vec::{Point3, UnitVec3, Vec3};

use thiserror::Error;

/// Errors raised by geometric constructions and cloud operations.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("degenerate cloud: all points coincide")]
    DegenerateCloud,
    #[error("point cloud must contain at least one point")]
    EmptyCloud,
    #[error("operation needs at least {needed} points, cloud has {actual}")]
    TooFewPoints { needed: usize, actual: usize },
    #[error("k must be at least {min}, got {k}")]
    InvalidK { k: usize, min: usize },
    #[error("cannot normalize a near-zero vector (norm {norm:.3e})")]
    ZeroVector { norm: f64 },
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    #[error("normals length {normals} does not match point count {points}")]
    NormalCountMismatch { normals: usize, points: usize },
    #[error("colors length {colors} does not match point count {points}")]
    ColorCountMismatch { colors: usize, points: usize },
    #[error("matrix is not a rotation (\u{2016}M\u{1d40}M - I\u{2016} = {deviation:.3e})")]
    NotARotation { deviation: f64 },
    #[error("invalid camera intrinsics: {reason}")]
    InvalidCamera { reason: String },
}
