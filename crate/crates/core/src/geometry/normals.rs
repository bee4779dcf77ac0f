use super::{GeometryError, KdTree, PointCloud, UnitVec3, Vec3};
use crate::exec;

/// Symmetric 3x3 matrix stored as `[xx, yy, zz, xy, xz, yz]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Mat3Sym(pub [f64; 6]);

impl Mat3Sym {
    pub fn from_covariance(points: &[Vec3]) -> Self {
        let n = points.len() as f64;
        let mut mean = Vec3::ZERO;
        for p in points {
            mean += *p;
        }
        let mean = mean / n;
        let mut m = [0.0f64; 6];
        for p in points {
            let d = *p - mean;
            m[0] += d.x * d.x;
            m[1] += d.y * d.y;
            m[2] += d.z * d.z;
            m[3] += d.x * d.y;
            m[4] += d.x * d.z;
            m[5] += d.y * d.z;
        }
        for v in &mut m {
            *v /= n;
        }
        Self(m)
    }
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi sweeps.
/// Returns `(eigenvalues, eigenvectors)` sorted ascending by eigenvalue;
/// `eigenvectors[i]` pairs with `eigenvalues[i]`.
pub fn symmetric_eigen3(m: &Mat3Sym) -> ([f64; 3], [Vec3; 3]) {
    let mut a = [
        [m.0[0], m.0[3], m.0[4]],
        [m.0[3], m.0[1], m.0[5]],
        [m.0[4], m.0[5], m.0[2]],
    ];
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    for _sweep in 0..32 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= f64::EPSILON * f64::EPSILON * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // Rotate rows/columns p and q.
            let app = a[p][p];
            let aqq = a[q][q];
            a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
            a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            for r in 0..3 {
                if r != p && r != q {
                    let arp = a[r][p];
                    let arq = a[r][q];
                    a[r][p] = c * arp - s * arq;
                    a[p][r] = a[r][p];
                    a[r][q] = s * arp + c * arq;
                    a[q][r] = a[r][q];
                }
            }
            for row in &mut v {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }

    let mut pairs: [(f64, Vec3); 3] = [
        (a[0][0], Vec3::new(v[0][0], v[1][0], v[2][0])),
        (a[1][1], Vec3::new(v[0][1], v[1][1], v[2][1])),
        (a[2][2], Vec3::new(v[0][2], v[1][2], v[2][2])),
    ];
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    (
        [pairs[0].0, pairs[1].0, pairs[2].0],
        [pairs[0].1, pairs[1].1, pairs[2].1],
    )
}

/// Estimates per-point unit normals from the covariance of each point's
/// `k` nearest neighbors (the point itself included). Normals are oriented
/// away from the cloud centroid, which assumes roughly star-shaped objects;
/// concave shapes can receive inward flips near cavities.
///
/// Degenerate neighborhoods (collinear or coincident) fall back to the
/// centroid-outward direction; the second return value counts them.
pub fn estimate_normals(
    cloud: &PointCloud,
    k: usize,
) -> Result<(PointCloud, usize), GeometryError> {
    if k < 3 {
        return Err(GeometryError::InvalidK { k, min: 3 });
    }
    if cloud.len() < k {
        return Err(GeometryError::TooFewPoints { needed: k, actual: cloud.len() });
    }
    let tree = KdTree::build(cloud.points());
    let centroid = cloud.centroid();

    let results: Vec<(UnitVec3, bool)> = exec::map_indexed(cloud.len(), |i| {
        let p = cloud.point(i);
        let neighbors = tree.knn(p, k);
        let vecs: Vec<Vec3> = neighbors
            .iter()
            .map(|&(j, _)| cloud.point(j).to_vec())
            .collect();
        let cov = Mat3Sym::from_covariance(&vecs);
        let (evals, evecs) = symmetric_eigen3(&cov);
        let outward = p - centroid;

        // Rank-deficient covariance: surface normal is undefined.
        let degenerate = evals[2] <= 1e-24 || evals[1] <= 1e-9 * evals[2];
        if degenerate {
            let fallback = UnitVec3::new(outward)
                .unwrap_or_else(|_| UnitVec3::axis(2));
            return (fallback, true);
        }
        let mut normal = evecs[0];
        if normal.dot(outward) < 0.0 {
            normal = -normal;
        }
        (UnitVec3::new(normal).expect("eigenvector is unit length"), false)
    });

    let degenerate_count = results.iter().filter(|(_, d)| *d).count();
    let normals = results.into_iter().map(|(n, _)| n).collect();
    let out = cloud.clone().with_normals(normals)?;
    Ok((out, degenerate_count))
}

#[cfg(test)]
mod tests {
    use super::super::Point3;
    use super::*;

    #[test]
    fn eigen_recovers_diagonal() {
        let m = Mat3Sym([3.0, 1.0, 2.0, 0.0, 0.0, 0.0]);
        let (vals, vecs) = symmetric_eigen3(&m);
        assert!((vals[0] - 1.0).abs() <= 1e-12);
        assert!((vals[1] - 2.0).abs() <= 1e-12);
        assert!((vals[2] - 3.0).abs() <= 1e-12);
        assert!(vecs[0].y.abs() >= 1.0 - 1e-12);
    }

    #[test]
    fn eigen_matches_reconstruction() {
        // A V = V diag(lambda) for a generic symmetric matrix.
        let m = Mat3Sym([2.0, 1.5, 0.7, 0.4, -0.3, 0.9]);
        let (vals, vecs) = symmetric_eigen3(&m);
        let a = [
            [m.0[0], m.0[3], m.0[4]],
            [m.0[3], m.0[1], m.0[5]],
            [m.0[4], m.0[5], m.0[2]],
        ];
        for e in 0..3 {
            let v = vecs[e];
            let av = Vec3::new(
                a[0][0] * v.x + a[0][1] * v.y + a[0][2] * v.z,
                a[1][0] * v.x + a[1][1] * v.y + a[1][2] * v.z,
                a[2][0] * v.x + a[2][1] * v.y + a[2][2] * v.z,
            );
            assert!((av - v * vals[e]).norm() <= 1e-10);
        }
    }

    fn cube_face_cloud(samples_per_edge: usize, half: f64) -> PointCloud {
        let mut pts = Vec::new();
        let step = 2.0 * half / (samples_per_edge - 1) as f64;
        for i in 0..samples_per_edge {
            for j in 0..samples_per_edge {
                let u = -half + i as f64 * step;
                let v = -half + j as f64 * step;
                for (axis, sign) in [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0), (2, 1.0), (2, -1.0)]
                {
                    let mut c = [u, v, sign * half];
                    c.rotate_right(axis);
                    pts.push(Point3::new(c[0], c[1], c[2]));
                }
            }
        }
        PointCloud::new(pts).unwrap()
    }

    #[test]
    fn cube_faces_get_axis_normals() {
        let cloud = cube_face_cloud(12, 0.5);
        let (with_normals, degenerate) = estimate_normals(&cloud, 8).unwrap();
        assert_eq!(degenerate, 0);
        let normals = with_normals.normals().unwrap();
        let mut interior_checked = 0;
        for (p, n) in with_normals.points().iter().zip(normals) {
            let c = p.coords();
            // Face-interior points: exactly one coordinate at +-half, others
            // well inside. Their neighborhoods are planar patches of one face.
            let on_face: Vec<usize> =
                (0..3).filter(|&a| (c[a].abs() - 0.5).abs() < 1e-12).collect();
            if on_face.len() != 1 {
                continue;
            }
            let axis = on_face[0];
            if c.iter().enumerate().any(|(a, &v)| a != axis && v.abs() > 0.3) {
                continue;
            }
            interior_checked += 1;
            let expected = {
                let mut e = [0.0; 3];
                e[axis] = c[axis].signum();
                Vec3::from(e)
            };
            let dot = n.dot(expected);
            assert!(dot >= 1.0 - 1e-6, "face normal off: dot {dot} at {c:?}");
        }
        assert!(interior_checked > 50);
    }

    #[test]
    fn sphere_normals_are_radial() {
        // Fibonacci sphere: deterministic, near-uniform.
        let n = 2048;
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        let pts: Vec<Point3> = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let t = golden * i as f64;
                Point3::new(r * t.cos(), r * t.sin(), z)
            })
            .collect();
        let cloud = PointCloud::new(pts).unwrap();
        let (with_normals, degenerate) = estimate_normals(&cloud, 16).unwrap();
        assert_eq!(degenerate, 0);
        let mut total_err = 0.0;
        for (p, est) in with_normals.points().iter().zip(with_normals.normals().unwrap()) {
            let exact = p.to_vec().normalized().unwrap();
            total_err += est.angle_to(exact.as_vec());
        }
        let mean_deg = (total_err / n as f64).to_degrees();
        assert!(mean_deg <= 5.0, "mean angular error {mean_deg} deg");
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let cloud = PointCloud::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ])
        .unwrap();
        let (with_normals, degenerate) = estimate_normals(&cloud, 3).unwrap();
        assert_eq!(degenerate, 3);
        // Outward fallback for the endpoints points along +-x.
        let n0 = with_normals.normals().unwrap()[0];
        assert!(n0.as_vec().x <= -1.0 + 1e-12);
    }
}
