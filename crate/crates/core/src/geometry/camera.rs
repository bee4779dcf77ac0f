use serde::{Deserialize, Serialize};

use super::{GeometryError, Point3, RigidTransform};

/// Pinhole camera: intrinsics in pixels plus a world-to-camera extrinsic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub extrinsic: RigidTransform,
}

impl CameraModel {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
        extrinsic: RigidTransform,
    ) -> Result<Self, GeometryError> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(GeometryError::InvalidCamera {
                reason: format!("focal lengths must be positive, got fx={fx}, fy={fy}"),
            });
        }
        if width == 0 || height == 0 {
            return Err(GeometryError::InvalidCamera {
                reason: "image dimensions must be positive".into(),
            });
        }
        if !(0.0..(width as f64)).contains(&cx) || !(0.0..(height as f64)).contains(&cy) {
            return Err(GeometryError::InvalidCamera {
                reason: format!("principal point ({cx}, {cy}) outside {width}x{height} image"),
            });
        }
        Ok(Self { fx, fy, cx, cy, width, height, extrinsic })
    }

    /// Validates an instance that was deserialized field-by-field.
    pub fn validate(self) -> Result<Self, GeometryError> {
        Self::new(self.fx, self.fy, self.cx, self.cy, self.width, self.height, self.extrinsic)
    }

    /// World-space camera center.
    pub fn center(&self) -> Point3 {
        self.extrinsic.inverse().translation.to_point()
    }

    /// World point into camera space.
    pub fn to_camera(&self, p: Point3) -> Point3 {
        self.extrinsic.apply(p)
    }

    /// Perspective-projects a camera-space point; caller must ensure z > 0.
    pub fn project_camera_point(&self, p: Point3) -> (f64, f64) {
        (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy)
    }

    /// Camera for a view orbiting `target` at `distance`, looking at it.
    /// `azimuth`/`elevation` in radians; up is +z.
    pub fn look_at_orbit(
        fx: f64,
        width: u32,
        height: u32,
        target: Point3,
        distance: f64,
        azimuth: f64,
        elevation: f64,
    ) -> Result<Self, GeometryError> {
        use super::{Mat3, Rotation, Vec3};
        let dir = Vec3::new(
            elevation.cos() * azimuth.cos(),
            elevation.cos() * azimuth.sin(),
            elevation.sin(),
        );
        let eye = target + dir * distance;
        let forward = (target - eye).normalized().map_err(|_| GeometryError::InvalidCamera {
            reason: "orbit distance must be positive".into(),
        })?;
        let world_up = Vec3::new(0.0, 0.0, 1.0);
        let mut right = forward.as_vec().cross(world_up);
        if right.norm() < 1e-9 {
            right = forward.as_vec().cross(Vec3::new(0.0, 1.0, 0.0));
        }
        let right = right.normalized().expect("non-degenerate basis");
        let down = forward.as_vec().cross(right.as_vec());
        // Camera axes: x right, y down, z forward.
        let cam_to_world = Mat3::from_columns(right.as_vec(), down, forward.as_vec());
        let rotation = Rotation::from_matrix(&cam_to_world.transpose())?;
        let translation = -rotation.rotate(eye.to_vec());
        let extrinsic = RigidTransform::new(rotation, translation);
        Self::new(
            fx,
            fx,
            width as f64 / 2.0,
            height as f64 / 2.0,
            width,
            height,
            extrinsic,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_intrinsics() {
        assert!(CameraModel::new(0.0, 1.0, 0.0, 0.0, 4, 4, RigidTransform::IDENTITY).is_err());
        assert!(CameraModel::new(1.0, 1.0, 9.0, 0.0, 4, 4, RigidTransform::IDENTITY).is_err());
    }

    #[test]
    fn orbit_camera_looks_at_target() {
        let target = Point3::new(0.1, -0.2, 0.3);
        let cam =
            CameraModel::look_at_orbit(100.0, 64, 64, target, 2.0, 0.7, 0.4).unwrap();
        let in_cam = cam.to_camera(target);
        assert!(in_cam.x.abs() <= 1e-9 && in_cam.y.abs() <= 1e-9);
        assert!((in_cam.z - 2.0).abs() <= 1e-9);
        let (u, v) = cam.project_camera_point(in_cam);
        assert!((u - 32.0).abs() <= 1e-9 && (v - 32.0).abs() <= 1e-9);
    }
}
