//! EWA-style projection of a 3D Gaussian onto the image plane.

use crate::gaussians::{evaluate_sh, GaussianSplat};
use crate::geometry::{CameraModel, Mat3, UnitVec3};

/// Splats closer than this camera-space depth are culled.
pub const NEAR_PLANE: f64 = 0.01;
/// Anti-aliasing floor added to the projected covariance diagonal (px^2).
pub const COV2D_FLOOR: f64 = 0.3;
/// Support radius in standard deviations; beyond it a splat contributes
/// nothing (both in binning and in per-pixel evaluation).
pub const CULL_SIGMA: f64 = 3.0;

/// A splat after projection: pixel-space mean and covariance, camera depth,
/// decoded view-dependent color, and opacity.
#[derive(Clone, Debug)]
pub struct ProjectedGaussian {
    pub mean2d: [f64; 2],
    /// Symmetric 2x2 covariance in px^2, `[[a, b], [b, c]]`.
    pub cov2d: [[f64; 2]; 2],
    pub depth: f64,
    pub color: [f64; 3],
    pub opacity: f64,
}

impl ProjectedGaussian {
    /// Half-widths of the 3-sigma bounding box (the ellipse's exact AABB).
    pub fn support_radii(&self) -> (f64, f64) {
        (
            CULL_SIGMA * self.cov2d[0][0].max(0.0).sqrt(),
            CULL_SIGMA * self.cov2d[1][1].max(0.0).sqrt(),
        )
    }
}

/// Projects one splat. Returns `None` when the splat is culled: behind the
/// near plane or with its 3-sigma box outside every pixel center.
///
/// `cov2d = J W Sigma W^T J^T + floor*I` with `Sigma = R diag(s^2) R^T`, `W`
/// the world-to-camera rotation and `J` the perspective jacobian at the
/// mean. Color is the SH evaluation along the camera-to-splat direction.
pub fn project_gaussian(
    splat: &GaussianSplat,
    sh_degree: usize,
    cam: &CameraModel,
) -> Option<ProjectedGaussian> {
    let p_cam = cam.to_camera(splat.position);
    let depth = p_cam.z;
    if depth <= NEAR_PLANE {
        return None;
    }
    let (u, v) = cam.project_camera_point(p_cam);

    // Sigma = R diag(s^2) R^T in world space.
    let r = splat.rotation.to_matrix();
    let s2 = splat.scale.map(|s| s * s);
    let mut sigma = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            sigma[i][j] = (0..3).map(|k| r.0[i][k] * s2[k] * r.0[j][k]).sum();
        }
    }
    let sigma = Mat3(sigma);

    let w = cam.extrinsic.rotation.to_matrix();
    let m = w.mul_mat(&sigma).mul_mat(&w.transpose());

    // Perspective jacobian at the camera-space mean.
    let z_inv = 1.0 / depth;
    let j = [
        [cam.fx * z_inv, 0.0, -cam.fx * p_cam.x * z_inv * z_inv],
        [0.0, cam.fy * z_inv, -cam.fy * p_cam.y * z_inv * z_inv],
    ];
    let mut cov = [[0.0f64; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = 0.0;
            for i in 0..3 {
                for k in 0..3 {
                    acc += j[a][i] * m.0[i][k] * j[b][k];
                }
            }
            cov[a][b] = acc;
        }
    }
    cov[0][0] += COV2D_FLOOR;
    cov[1][1] += COV2D_FLOOR;

    let (rx, ry) = (
        CULL_SIGMA * cov[0][0].max(0.0).sqrt(),
        CULL_SIGMA * cov[1][1].max(0.0).sqrt(),
    );
    // Pixel centers live in [0.5, width - 0.5] x [0.5, height - 0.5].
    if u + rx < 0.5
        || u - rx > cam.width as f64 - 0.5
        || v + ry < 0.5
        || v - ry > cam.height as f64 - 0.5
    {
        return None;
    }

    let dir = UnitVec3::new(splat.position - cam.center())
        .unwrap_or_else(|_| UnitVec3::axis(2));
    let color = evaluate_sh(&splat.sh, sh_degree, dir)
        .expect("splat sh length matches the set degree");

    Some(ProjectedGaussian {
        mean2d: [u, v],
        cov2d: cov,
        depth,
        color,
        opacity: splat.opacity,
    })
}
