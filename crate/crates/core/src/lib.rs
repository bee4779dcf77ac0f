//! Hybrid implicit/explicit 3D object representation and grasp planning.
//!
//! The crate couples three axis-aligned feature planes (an implicit feature
//! field queried per point) with an explicit set of 3D Gaussian splats, and
//! builds the tooling around that representation:
//!
//! - [`geometry`]: points, rotations, rigid transforms, point clouds,
//!   normal estimation, normalization, resampling, PLY I/O.
//! - [`triplane`]: the three-plane feature field with bilinear per-plane
//!   queries.
//! - [`gaussians`]: Gaussian splat attributes, the MLP attribute decoder
//!   with analytic jacobians, and spherical-harmonic color.
//! - [`renderer`]: a forward tile-based splatting rasterizer plus a naive
//!   reference compositor.
//! - [`losses`]: Chamfer / Earth Mover's / F-Score point metrics, MSE and
//!   SSIM image metrics, and the weighted composite loss.
//! - [`grasping`]: contact-anchored 6-DoF parallel-jaw grasp synthesis with
//!   friction-cone scoring, contact filtering, and collision checks.
//! - [`pipeline`]: end-to-end orchestration over synthetic scenes and the
//!   desk-scale evaluation harness.
//!
//! With the default `parallel` feature the data-parallel inner loops run on
//! rayon; disabling it yields a purely sequential build. Both produce
//! bit-identical results: parallelism is only ever applied to independent
//! per-element maps collected in input order.

pub mod exec;
pub mod gaussians;
pub mod geometry;
pub mod grasping;
pub mod losses;
pub mod pipeline;
pub mod renderer;
pub mod triplane;
