use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// 3D position. Components are expected to stay finite; file and JSON
/// loaders reject non-finite input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// 3D displacement / direction with no unit-length guarantee.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Unit-length direction; `|norm - 1| <= 1e-9` by construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVec3(Vec3);

impl Point3 {
    pub const ORIGIN: Self = Self { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_vec(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn coords(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn distance_squared(self, other: Point3) -> f64 {
        (self - other).norm_squared()
    }
}

impl Vec3 {
    pub const ZERO: Self = Self { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_point(self) -> Point3 {
        Point3::new(self.x, self.y, self.z)
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalized(self) -> Result<UnitVec3, GeometryError> {
        UnitVec3::new(self)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl UnitVec3 {
    const NORM_EPS: f64 = 1e-12;

    /// Normalizes `v`; errors when the norm is too small to define a
    /// direction.
    pub fn new(v: Vec3) -> Result<Self, GeometryError> {
        let norm = v.norm();
        if !norm.is_finite() || norm < Self::NORM_EPS {
            return Err(GeometryError::ZeroVector { norm });
        }
        Ok(Self(v / norm))
    }

    /// Axis-aligned unit vectors; `axis` is 0, 1 or 2.
    pub fn axis(axis: usize) -> Self {
        match axis {
            0 => Self(Vec3::new(1.0, 0.0, 0.0)),
            1 => Self(Vec3::new(0.0, 1.0, 0.0)),
            _ => Self(Vec3::new(0.0, 0.0, 1.0)),
        }
    }

    pub fn as_vec(&self) -> Vec3 {
        self.0
    }

    pub fn dot(&self, other: Vec3) -> f64 {
        self.0.dot(other)
    }

    pub fn flipped(&self) -> Self {
        Self(-self.0)
    }

    /// Angle in radians between this direction and `v` (0..=pi).
    pub fn angle_to(&self, v: Vec3) -> f64 {
        let cross = self.0.cross(v).norm();
        let dot = self.0.dot(v);
        cross.atan2(dot)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl TryFrom<[f64; 3]> for UnitVec3 {
    type Error = GeometryError;

    fn try_from(a: [f64; 3]) -> Result<Self, Self::Error> {
        UnitVec3::new(Vec3::from(a))
    }
}

impl From<UnitVec3> for [f64; 3] {
    fn from(u: UnitVec3) -> Self {
        u.0.into()
    }
}

impl Add<Vec3> for Point3 {
    type Output = Point3;
    fn add(self, v: Vec3) -> Point3 {
        Point3::new(self.x + v.x, self.y + v.y, self.z + v.z)
    }
}

impl Sub<Vec3> for Point3 {
    type Output = Point3;
    fn sub(self, v: Vec3) -> Point3 {
        Point3::new(self.x - v.x, self.y - v.y, self.z - v.z)
    }
}

impl Sub for Point3 {
    type Output = Vec3;
    fn sub(self, other: Point3) -> Vec3 {
        Vec3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, other: Vec3) {
        self.x += other.x;
        self.y += other.y;
        self.z += other.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_vector_normalizes() {
        let u = UnitVec3::new(Vec3::new(3.0, 0.0, 4.0)).unwrap();
        assert!((u.as_vec().norm() - 1.0).abs() <= 1e-12);
        assert!((u.as_vec().x - 0.6).abs() <= 1e-12);
    }

    #[test]
    fn unit_vector_rejects_zero() {
        assert!(UnitVec3::new(Vec3::ZERO).is_err());
    }

    #[test]
    fn angle_to_is_stable_near_zero() {
        let u = UnitVec3::axis(2);
        assert!(u.angle_to(Vec3::new(0.0, 0.0, 2.0)).abs() <= 1e-15);
        let a = u.angle_to(Vec3::new(1.0, 0.0, 1.0));
        assert!((a - std::f64::consts::FRAC_PI_4).abs() <= 1e-12);
    }

    #[test]
    fn point_serde_round_trips_as_array() {
        let p = Point3::new(1.0, -2.5, 0.125);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "[1.0,-2.5,0.125]");
        let back: Point3 = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
