use serde::{Deserialize, Serialize};

use super::{GeometryError, Point3, UnitVec3, Vec3};

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Self = Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Self([
            [c0.x, c1.x, c2.x],
            [c0.y, c1.y, c2.y],
            [c0.z, c1.z, c2.z],
        ])
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, other: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Mat3(out)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Max absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }
}

/// Rotation stored as a unit quaternion `(w, x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rotation {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Rotation {
    pub const IDENTITY: Self = Self { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Normalizes the quaternion; errors when its norm is too small.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(GeometryError::ZeroVector { norm });
        }
        Ok(Self { w: w / norm, x: x / norm, y: y / norm, z: z / norm })
    }

    /// Like [`Rotation::from_quaternion`] but maps a near-zero quaternion to
    /// the identity instead of failing. Used by attribute decoders where a
    /// degenerate raw head must not abort a batch.
    pub fn from_quaternion_or_identity(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self::from_quaternion(w, x, y, z).unwrap_or(Self::IDENTITY)
    }

    pub fn from_axis_angle(axis: UnitVec3, angle: f64) -> Self {
        let (s, c) = (angle * 0.5).sin_cos();
        let a = axis.as_vec();
        Self { w: c, x: a.x * s, y: a.y * s, z: a.z * s }
    }

    /// Extracts the quaternion from an orthonormal matrix (Shepperd's
    /// method); errors when `m` is not a proper rotation to 1e-6.
    pub fn from_matrix(m: &Mat3) -> Result<Self, GeometryError> {
        let dev = m.transpose().mul_mat(m).max_abs_diff(&Mat3::IDENTITY);
        if dev > 1e-6 || (m.determinant() - 1.0).abs() > 1e-6 {
            return Err(GeometryError::NotARotation { deviation: dev });
        }
        let a = &m.0;
        let trace = a[0][0] + a[1][1] + a[2][2];
        let (w, x, y, z);
        if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            w = 0.25 * s;
            x = (a[2][1] - a[1][2]) / s;
            y = (a[0][2] - a[2][0]) / s;
            z = (a[1][0] - a[0][1]) / s;
        } else if a[0][0] > a[1][1] && a[0][0] > a[2][2] {
            let s = (1.0 + a[0][0] - a[1][1] - a[2][2]).sqrt() * 2.0;
            w = (a[2][1] - a[1][2]) / s;
            x = 0.25 * s;
            y = (a[0][1] + a[1][0]) / s;
            z = (a[0][2] + a[2][0]) / s;
        } else if a[1][1] > a[2][2] {
            let s = (1.0 + a[1][1] - a[0][0] - a[2][2]).sqrt() * 2.0;
            w = (a[0][2] - a[2][0]) / s;
            x = (a[0][1] + a[1][0]) / s;
            y = 0.25 * s;
            z = (a[1][2] + a[2][1]) / s;
        } else {
            let s = (1.0 + a[2][2] - a[0][0] - a[1][1]).sqrt() * 2.0;
            w = (a[1][0] - a[0][1]) / s;
            x = (a[0][2] + a[2][0]) / s;
            y = (a[1][2] + a[2][1]) / s;
            z = 0.25 * s;
        }
        Self::from_quaternion(w, x, y, z)
    }

    pub fn quaternion(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn to_matrix(&self) -> Mat3 {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let (xx, yy, zz) = (x * x, y * y, z * z);
        let (xy, xz, yz) = (x * y, x * z, y * z);
        let (wx, wy, wz) = (w * x, w * y, w * z);
        Mat3([
            [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
        ])
    }

    pub fn rotate(&self, v: Vec3) -> Vec3 {
        // q v q* expanded via the cross-product form.
        let u = Vec3::new(self.x, self.y, self.z);
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    pub fn rotate_point(&self, p: Point3) -> Point3 {
        self.rotate(p.to_vec()).to_point()
    }

    /// Composition: `self.compose(rhs)` rotates by `rhs` first, `self`
    /// second.
    pub fn compose(&self, rhs: &Rotation) -> Rotation {
        let (w1, x1, y1, z1) = (self.w, self.x, self.y, self.z);
        let (w2, x2, y2, z2) = (rhs.w, rhs.x, rhs.y, rhs.z);
        Rotation::from_quaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )
        .expect("product of unit quaternions is a unit quaternion")
    }

    pub fn inverse(&self) -> Rotation {
        Rotation { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }
}

impl TryFrom<[f64; 4]> for Rotation {
    type Error = GeometryError;

    fn try_from(q: [f64; 4]) -> Result<Self, Self::Error> {
        Rotation::from_quaternion(q[0], q[1], q[2], q[3])
    }
}

impl From<Rotation> for [f64; 4] {
    fn from(r: Rotation) -> Self {
        r.quaternion()
    }
}

/// Rigid body transform: rotation followed by translation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Rotation,
    pub translation: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: Self = Self { rotation: Rotation::IDENTITY, translation: Vec3::ZERO };

    pub fn new(rotation: Rotation, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        (self.rotation.rotate(p.to_vec()) + self.translation).to_point()
    }

    pub fn apply_vec(&self, v: Vec3) -> Vec3 {
        self.rotation.rotate(v)
    }

    /// `self.compose(rhs)` applies `rhs` first, `self` second.
    pub fn compose(&self, rhs: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation.compose(&rhs.rotation),
            translation: self.rotation.rotate(rhs.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let inv_rot = self.rotation.inverse();
        RigidTransform {
            rotation: inv_rot,
            translation: -inv_rot.rotate(self.translation),
        }
    }

    /// Row-major 4x4 homogeneous matrix.
    pub fn to_matrix4(&self) -> [f64; 16] {
        let m = self.rotation.to_matrix().0;
        let t = self.translation;
        [
            m[0][0], m[0][1], m[0][2], t.x,
            m[1][0], m[1][1], m[1][2], t.y,
            m[2][0], m[2][1], m[2][2], t.z,
            0.0, 0.0, 0.0, 1.0,
        ]
    }

    /// Parses a row-major 4x4 homogeneous matrix; the upper-left block must
    /// be a rotation and the last row `(0, 0, 0, 1)`.
    pub fn from_matrix4(m: &[f64; 16]) -> Result<Self, GeometryError> {
        let rot = Mat3([
            [m[0], m[1], m[2]],
            [m[4], m[5], m[6]],
            [m[8], m[9], m[10]],
        ]);
        let bottom_ok = m[12] == 0.0 && m[13] == 0.0 && m[14] == 0.0 && (m[15] - 1.0).abs() <= 1e-9;
        if !bottom_ok {
            return Err(GeometryError::NotARotation { deviation: f64::INFINITY });
        }
        Ok(Self {
            rotation: Rotation::from_matrix(&rot)?,
            translation: Vec3::new(m[3], m[7], m[11]),
        })
    }
}
