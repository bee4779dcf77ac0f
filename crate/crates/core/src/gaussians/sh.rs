//! Real spherical-harmonic basis and view-dependent color evaluation.
//!
//! Coefficient layout is channel-major: all `(L+1)^2` coefficients for R,
//! then G, then B. Colors decode as `clamp(dot(basis, coeffs) + 0.5)`, the
//! usual splatting convention where the DC band stores `(rgb - 0.5) / Y00`.

use super::GaussianError;
use crate::geometry::UnitVec3;

pub const MAX_SH_DEGREE: usize = 3;

/// `(L+1)^2` basis values per channel for degree `L`.
pub fn sh_coeff_count(degree: usize) -> usize {
    (degree + 1) * (degree + 1)
}

const C0: f64 = 0.282_094_791_773_878_14;
const C1: f64 = 0.488_602_511_902_919_92;
const C2: [f64; 5] = [
    1.092_548_430_592_079_2,
    -1.092_548_430_592_079_2,
    0.315_391_565_252_520_05,
    -1.092_548_430_592_079_2,
    0.546_274_215_296_039_6,
];
const C3: [f64; 7] = [
    -0.590_043_589_926_643_5,
    2.890_611_442_640_554,
    -0.457_045_799_464_465_74,
    0.373_176_332_590_115_4,
    -0.457_045_799_464_465_74,
    1.445_305_721_320_277,
    -0.590_043_589_926_643_5,
];

/// Evaluates the real SH basis at a unit direction, bands 0..=degree in the
/// conventional splatting order.
pub fn sh_basis(degree: usize, dir: UnitVec3) -> Result<Vec<f64>, GaussianError> {
    if degree > MAX_SH_DEGREE {
        return Err(GaussianError::UnsupportedShDegree { degree, max: MAX_SH_DEGREE });
    }
    let v = dir.as_vec();
    let (x, y, z) = (v.x, v.y, v.z);
    let mut basis = Vec::with_capacity(sh_coeff_count(degree));
    basis.push(C0);
    if degree >= 1 {
        basis.push(-C1 * y);
        basis.push(C1 * z);
        basis.push(-C1 * x);
    }
    if degree >= 2 {
        let (xx, yy, zz) = (x * x, y * y, z * z);
        basis.push(C2[0] * x * y);
        basis.push(C2[1] * y * z);
        basis.push(C2[2] * (2.0 * zz - xx - yy));
        basis.push(C2[3] * x * z);
        basis.push(C2[4] * (xx - yy));
    }
    if degree >= 3 {
        let (xx, yy, zz) = (x * x, y * y, z * z);
        basis.push(C3[0] * y * (3.0 * xx - yy));
        basis.push(C3[1] * x * y * z);
        basis.push(C3[2] * y * (4.0 * zz - xx - yy));
        basis.push(C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy));
        basis.push(C3[4] * x * (4.0 * zz - xx - yy));
        basis.push(C3[5] * z * (xx - yy));
        basis.push(C3[6] * x * (xx - 3.0 * yy));
    }
    Ok(basis)
}

/// Decodes view-dependent RGB from channel-major SH coefficients. The result
/// is offset by +0.5 and clamped to `[0, 1]`.
pub fn evaluate_sh(sh: &[f64], degree: usize, dir: UnitVec3) -> Result<[f64; 3], GaussianError> {
    let per_channel = sh_coeff_count(degree);
    if sh.len() != 3 * per_channel {
        return Err(GaussianError::ShLengthMismatch {
            actual: sh.len(),
            expected: 3 * per_channel,
        });
    }
    let basis = sh_basis(degree, dir)?;
    let mut rgb = [0.0f64; 3];
    for (ch, out) in rgb.iter_mut().enumerate() {
        let coeffs = &sh[ch * per_channel..(ch + 1) * per_channel];
        let dot: f64 = basis.iter().zip(coeffs).map(|(b, c)| b * c).sum();
        *out = (dot + 0.5).clamp(0.0, 1.0);
    }
    Ok(rgb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn dirs() -> Vec<UnitVec3> {
        (0..50)
            .map(|i| {
                let t = i as f64 * 0.713;
                UnitVec3::new(Vec3::new(t.sin(), (t * 1.7).cos(), (t * 0.43).sin() + 0.1))
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn degree_zero_closed_form() {
        let sh = [0.7, -0.3, 1.9];
        for dir in dirs() {
            let rgb = evaluate_sh(&sh, 0, dir).unwrap();
            assert!((rgb[0] - (0.7 * C0 + 0.5)).abs() <= 1e-12);
            assert!((rgb[1] - (-0.3 * C0 + 0.5)).abs() <= 1e-12);
            assert_eq!(rgb[2], 1.0); // clamped
        }
    }

    #[test]
    fn degree_zero_is_direction_independent() {
        let sh = [0.2, 0.1, -0.4];
        let first = evaluate_sh(&sh, 0, UnitVec3::axis(0)).unwrap();
        for dir in dirs() {
            assert_eq!(evaluate_sh(&sh, 0, dir).unwrap(), first);
        }
    }

    #[test]
    fn z_band_is_odd_in_z() {
        // Only the z-linear band (index 2) set, small enough not to clamp.
        let per = sh_coeff_count(1);
        let mut sh = vec![0.0; 3 * per];
        sh[2] = 0.3; // red channel, Y_1^0
        let up = evaluate_sh(&sh, 1, UnitVec3::axis(2)).unwrap();
        let down = evaluate_sh(&sh, 1, UnitVec3::axis(2).flipped()).unwrap();
        let contribution = C1 * 0.3;
        assert!((up[0] - down[0] - 2.0 * contribution).abs() <= 1e-12);
        assert!((up[1] - down[1]).abs() <= 1e-15);
    }

    #[test]
    fn matches_independent_basis_table_at_degree_two() {
        // Brute-force table from the explicit polynomial definitions.
        let table = |d: UnitVec3| -> [f64; 9] {
            let v = d.as_vec();
            let (x, y, z) = (v.x, v.y, v.z);
            [
                0.28209479177387814,
                -0.4886025119029199 * y,
                0.4886025119029199 * z,
                -0.4886025119029199 * x,
                1.0925484305920792 * x * y,
                -1.0925484305920792 * y * z,
                0.31539156525252005 * (2.0 * z * z - x * x - y * y),
                -1.0925484305920792 * x * z,
                0.5462742152960396 * (x * x - y * y),
            ]
        };
        let per = sh_coeff_count(2);
        let coeffs: Vec<f64> = (0..3 * per).map(|i| ((i as f64) * 0.37).sin() * 0.2).collect();
        for dir in dirs() {
            let want_basis = table(dir);
            let rgb = evaluate_sh(&coeffs, 2, dir).unwrap();
            for ch in 0..3 {
                let dot: f64 = want_basis
                    .iter()
                    .zip(&coeffs[ch * per..(ch + 1) * per])
                    .map(|(b, c)| b * c)
                    .sum();
                let want = (dot + 0.5).clamp(0.0, 1.0);
                assert!((rgb[ch] - want).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(evaluate_sh(&[0.0; 5], 0, UnitVec3::axis(0)).is_err());
        assert!(evaluate_sh(&[0.0; 3], 1, UnitVec3::axis(0)).is_err());
    }
}
