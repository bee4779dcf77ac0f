use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GeometryError, Point3, UnitVec3, Vec3};

/// Point cloud with optional per-point unit normals and RGB colors in
/// `[0, 1]`. Nonempty by construction; optional channels always match the
/// point count.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    normals: Option<Vec<UnitVec3>>,
    colors: Option<Vec<[f64; 3]>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite { context: "point cloud positions" });
        }
        Ok(Self { points, normals: None, colors: None })
    }

    pub fn with_normals(mut self, normals: Vec<UnitVec3>) -> Result<Self, GeometryError> {
        if normals.len() != self.points.len() {
            return Err(GeometryError::NormalCountMismatch {
                normals: normals.len(),
                points: self.points.len(),
            });
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_colors(mut self, colors: Vec<[f64; 3]>) -> Result<Self, GeometryError> {
        if colors.len() != self.points.len() {
            return Err(GeometryError::ColorCountMismatch {
                colors: colors.len(),
                points: self.points.len(),
            });
        }
        self.colors = Some(colors);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point3 {
        self.points[i]
    }

    pub fn normals(&self) -> Option<&[UnitVec3]> {
        self.normals.as_deref()
    }

    pub fn colors(&self) -> Option<&[[f64; 3]]> {
        self.colors.as_deref()
    }

    pub fn centroid(&self) -> Point3 {
        let mut acc = Vec3::ZERO;
        for p in &self.points {
            acc += p.to_vec();
        }
        (acc / self.points.len() as f64).to_point()
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn aabb(&self) -> (Point3, Point3) {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            let c = p.coords();
            for a in 0..3 {
                min[a] = min[a].min(c[a]);
                max[a] = max[a].max(c[a]);
            }
        }
        (Point3::from(min), Point3::from(max))
    }

    /// Largest per-axis extent; a conservative lower bound on the diameter.
    pub fn max_extent(&self) -> f64 {
        let (min, max) = self.aabb();
        (max.x - min.x).max(max.y - min.y).max(max.z - min.z)
    }

    /// Applies a similarity transform `p -> rot(p) * scale + t` to points
    /// (and rotates normals).
    pub fn transformed(&self, rotation: &super::Rotation, scale: f64, translation: Vec3) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| (rotation.rotate(p.to_vec()) * scale + translation).to_point())
            .collect();
        let normals = self.normals.as_ref().map(|ns| {
            ns.iter()
                .map(|n| {
                    UnitVec3::new(rotation.rotate(n.as_vec())).expect("rotation preserves norm")
                })
                .collect()
        });
        Self { points, normals, colors: self.colors.clone() }
    }

    fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| indices.iter().map(|&i| ns[i]).collect()),
            colors: self
                .colors
                .as_ref()
                .map(|cs| indices.iter().map(|&i| cs[i]).collect()),
        }
    }
}

/// Centers a cloud at its centroid and scales it so the farthest point lies
/// at distance 1. Returns the normalized cloud together with the applied
/// `scale` and the original `center`, i.e. `out = (p - center) * scale`.
pub fn normalize_cloud(cloud: &PointCloud) -> Result<(PointCloud, f64, Point3), GeometryError> {
    if cloud.len() < 2 {
        return Err(GeometryError::TooFewPoints { needed: 2, actual: cloud.len() });
    }
    let center = cloud.centroid();
    let max_radius = cloud
        .points()
        .iter()
        .map(|p| p.distance(center))
        .fold(0.0f64, f64::max);
    if max_radius < 1e-12 {
        return Err(GeometryError::DegenerateCloud);
    }
    let scale = 1.0 / max_radius;
    let points = cloud
        .points()
        .iter()
        .map(|p| ((*p - center) * scale).to_point())
        .collect();
    let out = PointCloud { points, normals: cloud.normals.clone(), colors: cloud.colors.clone() };
    Ok((out, scale, center))
}

/// Resamples a cloud to exactly `target` points.
///
/// Downsampling uses farthest-point sampling seeded at the point nearest the
/// centroid (deterministic, no randomness); upsampling keeps all originals
/// and appends replicas jittered by at most `1e-4 *` the largest axis extent
/// using the given seed.
pub fn resample_cloud(
    cloud: &PointCloud,
    target: usize,
    seed: u64,
) -> Result<PointCloud, GeometryError> {
    if target == 0 {
        return Err(GeometryError::EmptyCloud);
    }
    let n = cloud.len();
    if n == target {
        return Ok(cloud.clone());
    }
    if n > target {
        return Ok(cloud.select(&farthest_point_indices(cloud.points(), target)));
    }

    // Upsample: originals first, then jittered replicas round-robin.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_jitter = 1e-4 * cloud.max_extent();
    // Per-coordinate bound keeping the displacement norm within max_jitter.
    let coord_bound = max_jitter / 3.0f64.sqrt();
    let mut points = cloud.points().to_vec();
    let mut normals = cloud.normals.clone();
    let mut colors = cloud.colors.clone();
    for extra in 0..(target - n) {
        let parent = extra % n;
        let jitter = Vec3::new(
            rng.gen_range(-coord_bound..=coord_bound),
            rng.gen_range(-coord_bound..=coord_bound),
            rng.gen_range(-coord_bound..=coord_bound),
        );
        points.push(cloud.points()[parent] + jitter);
        if let Some(ns) = normals.as_mut() {
            ns.push(cloud.normals().unwrap()[parent]);
        }
        if let Some(cs) = colors.as_mut() {
            cs.push(cloud.colors().unwrap()[parent]);
        }
    }
    Ok(PointCloud { points, normals, colors })
}

/// Greedy farthest-point sampling. The first pick is the point nearest the
/// centroid; every subsequent pick maximizes the squared distance to the
/// selected set (ties break toward the smaller index).
pub fn farthest_point_indices(points: &[Point3], target: usize) -> Vec<usize> {
    assert!(target >= 1 && target <= points.len());
    let mut centroid = Vec3::ZERO;
    for p in points {
        centroid += p.to_vec();
    }
    let centroid = (centroid / points.len() as f64).to_point();
    let first = points
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.distance_squared(centroid)
                .partial_cmp(&b.distance_squared(centroid))
                .unwrap()
                .then(i.cmp(j))
        })
        .map(|(i, _)| i)
        .unwrap();

    let mut selected = Vec::with_capacity(target);
    selected.push(first);
    let mut dist_sq: Vec<f64> = crate::exec::map_slice(points, |p| p.distance_squared(points[first]));
    while selected.len() < target {
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, &d) in dist_sq.iter().enumerate() {
            if d > best.0 {
                best = (d, i);
            }
        }
        let next = best.1;
        selected.push(next);
        let anchor = points[next];
        for (i, d) in dist_sq.iter_mut().enumerate() {
            let cand = points[i].distance_squared(anchor);
            if cand < *d {
                *d = cand;
            }
        }
    }
    selected
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_corners(center: Point3, half: f64) -> PointCloud {
        let mut pts = Vec::new();
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    pts.push(center + Vec3::new(sx, sy, sz) * half);
                }
            }
        }
        PointCloud::new(pts).unwrap()
    }

    #[test]
    fn normalize_cube_corners() {
        // Edge 2 centered at (5,5,5): max radius sqrt(3), so scale 1/sqrt(3).
        let cloud = cube_corners(Point3::new(5.0, 5.0, 5.0), 1.0);
        let (out, scale, center) = normalize_cloud(&cloud).unwrap();
        assert!((scale - 1.0 / 3.0f64.sqrt()).abs() <= 1e-12);
        assert!(center.distance(Point3::new(5.0, 5.0, 5.0)) <= 1e-12);
        let max_r = out
            .points()
            .iter()
            .map(|p| p.to_vec().norm())
            .fold(0.0f64, f64::max);
        assert!((max_r - 1.0).abs() <= 1e-12);
        assert!(out.centroid().to_vec().norm() <= 1e-12);
    }

    #[test]
    fn normalize_two_points() {
        let cloud =
            PointCloud::new(vec![Point3::ORIGIN, Point3::new(0.0, 0.0, 4.0)]).unwrap();
        let (out, scale, center) = normalize_cloud(&cloud).unwrap();
        assert!((scale - 0.5).abs() <= 1e-15);
        assert!(center.distance(Point3::new(0.0, 0.0, 2.0)) <= 1e-15);
        assert!(out.point(0).distance(Point3::new(0.0, 0.0, -1.0)) <= 1e-15);
        assert!(out.point(1).distance(Point3::new(0.0, 0.0, 1.0)) <= 1e-15);
    }

    #[test]
    fn normalize_is_idempotent() {
        let cloud = cube_corners(Point3::new(-2.0, 7.0, 0.4), 0.35);
        let (once, _, _) = normalize_cloud(&cloud).unwrap();
        let (twice, scale, center) = normalize_cloud(&once).unwrap();
        assert!((scale - 1.0).abs() <= 1e-12);
        assert!(center.to_vec().norm() <= 1e-12);
        for (a, b) in once.points().iter().zip(twice.points()) {
            assert!(a.distance(*b) <= 1e-12);
        }
    }

    #[test]
    fn normalize_rejects_degenerate() {
        let cloud = PointCloud::new(vec![Point3::new(1.0, 1.0, 1.0); 5]).unwrap();
        assert!(matches!(normalize_cloud(&cloud), Err(GeometryError::DegenerateCloud)));
    }

    #[test]
    fn resample_identity_when_count_matches() {
        let cloud = cube_corners(Point3::ORIGIN, 1.0);
        let out = resample_cloud(&cloud, 8, 42).unwrap();
        assert_eq!(out, cloud);
    }

    #[test]
    fn fps_is_stepwise_greedy() {
        // Independent re-simulation of greedy FPS with plain loops.
        let cloud = cube_corners(Point3::ORIGIN, 1.0);
        let pts = cloud.points();
        let got = farthest_point_indices(pts, 4);

        let centroid = cloud.centroid();
        let mut expect_first = 0;
        for (i, p) in pts.iter().enumerate() {
            if p.distance_squared(centroid) < pts[expect_first].distance_squared(centroid) {
                expect_first = i;
            }
        }
        assert_eq!(got[0], expect_first);
        for step in 1..got.len() {
            let chosen = got[step];
            let min_d = |i: usize| {
                got[..step]
                    .iter()
                    .map(|&s| pts[i].distance_squared(pts[s]))
                    .fold(f64::INFINITY, f64::min)
            };
            let chosen_d = min_d(chosen);
            for i in 0..pts.len() {
                let d = min_d(i);
                assert!(
                    d < chosen_d || (d == chosen_d && i >= chosen) || got[..step].contains(&i),
                    "step {step}: index {i} (min-dist {d}) beats chosen {chosen} ({chosen_d})"
                );
            }
        }
        // Greedy FPS on a cube necessarily keeps a body-diagonal pair, so the
        // min pairwise distance of the result is the cube edge.
        let mut min_pair = f64::INFINITY;
        for i in 0..got.len() {
            for j in (i + 1)..got.len() {
                min_pair = min_pair.min(pts[got[i]].distance(pts[got[j]]));
            }
        }
        assert!((min_pair - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn upsample_is_deterministic_and_bounded() {
        let base = cube_corners(Point3::ORIGIN, 0.5);
        let a = resample_cloud(&base, 100, 7).unwrap();
        let b = resample_cloud(&base, 100, 7).unwrap();
        assert_eq!(a, b);
        let c = resample_cloud(&base, 100, 8).unwrap();
        assert_ne!(a, c);
        // Originals preserved, replicas jittered by <= 1e-4 * extent.
        let bound = 1e-4 * base.max_extent() + 1e-15;
        for (i, p) in a.points().iter().enumerate() {
            if i < 8 {
                assert_eq!(*p, base.point(i));
            } else {
                let parent = base.point((i - 8) % 8);
                assert!(p.distance(parent) <= bound);
            }
        }
    }

    #[test]
    fn downsample_is_deterministic() {
        let pts: Vec<Point3> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.37;
                Point3::new(t.sin(), (t * 1.7).cos(), (t * 0.9).sin() * 0.5)
            })
            .collect();
        let cloud = PointCloud::new(pts).unwrap();
        let a = resample_cloud(&cloud, 50, 1).unwrap();
        let b = resample_cloud(&cloud, 50, 999).unwrap();
        assert_eq!(a, b); // FPS path ignores the seed entirely
    }
}
