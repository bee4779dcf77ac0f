//! Splat PLY I/O following the de-facto splatting convention so third-party
//! viewers can open the output: binary little-endian vertices with
//! `x y z, opacity (logit), scale_0..2 (log), rot_0..3 (w x y z, raw),
//! f_dc_0..2, f_rest_*` where `f_rest` is channel-major.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{sh_coeff_count, GaussianError, GaussianSet, GaussianSplat};
use crate::geometry::{Point3, Rotation};

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-6, 1.0 - 1e-6);
    (p / (1.0 - p)).ln()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn write_gaussian_ply(set: &GaussianSet, path: &Path) -> Result<(), GaussianError> {
    let per_channel = sh_coeff_count(set.sh_degree);
    let rest = per_channel - 1;
    let mut w = BufWriter::new(File::create(path)?);

    write!(w, "ply\nformat binary_little_endian 1.0\nelement vertex {}\n", set.len())?;
    for name in ["x", "y", "z", "opacity", "scale_0", "scale_1", "scale_2"] {
        writeln!(w, "property float {name}")?;
    }
    for i in 0..4 {
        writeln!(w, "property float rot_{i}")?;
    }
    for i in 0..3 {
        writeln!(w, "property float f_dc_{i}")?;
    }
    for i in 0..3 * rest {
        writeln!(w, "property float f_rest_{i}")?;
    }
    writeln!(w, "end_header")?;

    for s in &set.splats {
        for v in s.position.coords() {
            w.write_f32::<LittleEndian>(v as f32)?;
        }
        w.write_f32::<LittleEndian>(logit(s.opacity) as f32)?;
        for v in s.scale {
            w.write_f32::<LittleEndian>(v.ln() as f32)?;
        }
        for v in s.rotation.quaternion() {
            w.write_f32::<LittleEndian>(v as f32)?;
        }
        // DC per channel, then the remaining coefficients channel-major.
        for ch in 0..3 {
            w.write_f32::<LittleEndian>(s.sh[ch * per_channel] as f32)?;
        }
        for ch in 0..3 {
            for j in 1..per_channel {
                w.write_f32::<LittleEndian>(s.sh[ch * per_channel + j] as f32)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_gaussian_ply(path: &Path) -> Result<GaussianSet, GaussianError> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);

    let mut line = String::new();
    r.read_line(&mut line)?;
    if line.trim() != "ply" {
        return Err(GaussianError::Manifest("missing `ply` magic".into()));
    }
    let mut count = 0usize;
    let mut props: Vec<String> = Vec::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(GaussianError::Manifest("missing end_header".into()));
        }
        let trimmed = line.trim();
        if trimmed == "end_header" {
            break;
        }
        let mut tok = trimmed.split_whitespace();
        match tok.next() {
            Some("format") => {
                if tok.next() != Some("binary_little_endian") {
                    return Err(GaussianError::Manifest(
                        "splat ply must be binary_little_endian".into(),
                    ));
                }
            }
            Some("element") => {
                let name = tok.next().unwrap_or_default();
                if name != "vertex" {
                    return Err(GaussianError::Manifest(format!(
                        "unexpected element `{name}` before vertex data"
                    )));
                }
                count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| GaussianError::Manifest("bad element line".into()))?;
            }
            Some("property") => {
                let ty = tok.next().unwrap_or_default();
                if ty != "float" {
                    return Err(GaussianError::Manifest(format!(
                        "splat ply properties must be float, got `{ty}`"
                    )));
                }
                props.push(tok.next().unwrap_or_default().to_string());
            }
            Some("comment") | None => {}
            Some(other) => {
                return Err(GaussianError::Manifest(format!("unexpected token `{other}`")))
            }
        }
    }

    let find = |name: &str| -> Result<usize, GaussianError> {
        props
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| GaussianError::Manifest(format!("missing property `{name}`")))
    };
    let ix = [find("x")?, find("y")?, find("z")?];
    let iop = find("opacity")?;
    let isc = [find("scale_0")?, find("scale_1")?, find("scale_2")?];
    let irot = [find("rot_0")?, find("rot_1")?, find("rot_2")?, find("rot_3")?];
    let idc = [find("f_dc_0")?, find("f_dc_1")?, find("f_dc_2")?];
    let rest = props.iter().filter(|p| p.starts_with("f_rest_")).count();
    if rest % 3 != 0 {
        return Err(GaussianError::Manifest(format!("f_rest count {rest} not divisible by 3")));
    }
    let per_channel = rest / 3 + 1;
    let degree = match per_channel {
        1 => 0,
        4 => 1,
        9 => 2,
        16 => 3,
        other => {
            return Err(GaussianError::Manifest(format!(
                "{other} sh coefficients per channel maps to no supported degree"
            )))
        }
    };
    let irest: Vec<usize> = (0..rest)
        .map(|i| find(&format!("f_rest_{i}")))
        .collect::<Result<_, _>>()?;

    let mut splats = Vec::with_capacity(count);
    let mut row = vec![0f32; props.len()];
    for _ in 0..count {
        r.read_f32_into::<LittleEndian>(&mut row)?;
        let mut sh = vec![0.0f64; 3 * per_channel];
        for ch in 0..3 {
            sh[ch * per_channel] = row[idc[ch]] as f64;
            for j in 1..per_channel {
                sh[ch * per_channel + j] = row[irest[ch * (per_channel - 1) + (j - 1)]] as f64;
            }
        }
        splats.push(GaussianSplat {
            position: Point3::new(row[ix[0]] as f64, row[ix[1]] as f64, row[ix[2]] as f64),
            opacity: sigmoid(row[iop] as f64),
            scale: [
                (row[isc[0]] as f64).exp(),
                (row[isc[1]] as f64).exp(),
                (row[isc[2]] as f64).exp(),
            ],
            rotation: Rotation::from_quaternion_or_identity(
                row[irot[0]] as f64,
                row[irot[1]] as f64,
                row[irot[2]] as f64,
                row[irot[3]] as f64,
            ),
            sh,
        });
    }
    GaussianSet::new(splats, degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> GaussianSet {
        let per = sh_coeff_count(1);
        let splats = (0..5)
            .map(|i| {
                let t = i as f64;
                GaussianSplat {
                    position: Point3::new(t * 0.1, -t * 0.2, 0.5),
                    opacity: 0.1 + 0.15 * t,
                    scale: [0.01 + 0.001 * t, 0.02, 0.03],
                    rotation: Rotation::from_axis_angle(
                        crate::geometry::UnitVec3::axis(i % 3),
                        0.3 * t,
                    ),
                    sh: (0..3 * per).map(|j| ((j as f64 + t) * 0.31).sin() * 0.2).collect(),
                }
            })
            .collect();
        GaussianSet::new(splats, 1).unwrap()
    }

    #[test]
    fn splat_ply_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("splats.ply");
        let set = sample_set();
        write_gaussian_ply(&set, &path).unwrap();
        let back = read_gaussian_ply(&path).unwrap();
        assert_eq!(back.len(), set.len());
        assert_eq!(back.sh_degree, 1);
        for (a, b) in set.splats.iter().zip(&back.splats) {
            assert!(a.position.distance(b.position) <= 1e-6);
            assert!((a.opacity - b.opacity).abs() <= 1e-6);
            for (sa, sb) in a.scale.iter().zip(&b.scale) {
                assert!((sa - sb).abs() <= 1e-6 * (1.0 + sa.abs()));
            }
            for (qa, qb) in a.rotation.quaternion().iter().zip(b.rotation.quaternion()) {
                assert!((qa - qb).abs() <= 1e-6);
            }
            for (ca, cb) in a.sh.iter().zip(&b.sh) {
                assert!((ca - cb).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn round_trip_is_stable_after_first_quantization() {
        // write -> read -> write must produce identical bytes.
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.ply");
        let p2 = dir.path().join("b.ply");
        let set = sample_set();
        write_gaussian_ply(&set, &p1).unwrap();
        let once = read_gaussian_ply(&p1).unwrap();
        write_gaussian_ply(&once, &p2).unwrap();
        let twice = read_gaussian_ply(&p2).unwrap();
        for (a, b) in once.splats.iter().zip(&twice.splats) {
            assert!(a.position.distance(b.position) <= 1e-9);
            assert!((a.opacity - b.opacity).abs() <= 1e-9);
        }
    }
}
