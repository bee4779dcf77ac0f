//! PLY point-cloud I/O (ASCII and binary little-endian).
//!
//! Vertices carry `x y z` (float or double), optional `nx ny nz` normals and
//! optional `red green blue` uchar colors. Unknown scalar vertex properties
//! are skipped; elements after `vertex` are ignored.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use super::{Point3, PointCloud, UnitVec3, Vec3};

#[derive(Debug, Error)]
pub enum PlyError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("ply parse error: {0}")]
    Parse(String),
    #[error("unsupported ply feature: {0}")]
    Unsupported(String),
    #[error("ply data error: {0}")]
    Data(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum ScalarType {
    F32,
    F64,
    U8,
    I8,
    U16,
    I16,
    U32,
    I32,
}

impl ScalarType {
    fn parse(s: &str) -> Result<Self, PlyError> {
        Ok(match s {
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            "uchar" | "uint8" => Self::U8,
            "char" | "int8" => Self::I8,
            "ushort" | "uint16" => Self::U16,
            "short" | "int16" => Self::I16,
            "uint" | "uint32" => Self::U32,
            "int" | "int32" => Self::I32,
            other => return Err(PlyError::Unsupported(format!("property type `{other}`"))),
        })
    }

    fn read_binary<R: Read>(self, r: &mut R) -> Result<f64, PlyError> {
        Ok(match self {
            Self::F32 => r.read_f32::<LittleEndian>()? as f64,
            Self::F64 => r.read_f64::<LittleEndian>()?,
            Self::U8 => r.read_u8()? as f64,
            Self::I8 => r.read_i8()? as f64,
            Self::U16 => r.read_u16::<LittleEndian>()? as f64,
            Self::I16 => r.read_i16::<LittleEndian>()? as f64,
            Self::U32 => r.read_u32::<LittleEndian>()? as f64,
            Self::I32 => r.read_i32::<LittleEndian>()? as f64,
        })
    }

    fn is_color_byte(self) -> bool {
        matches!(self, Self::U8)
    }
}

struct VertexLayout {
    count: usize,
    // (name, type) in file order.
    properties: Vec<(String, ScalarType)>,
}

/// Writes a cloud to `path`. Positions (and normals) are stored as 32-bit
/// floats, colors as uchar, so values round-trip within f32/byte
/// quantization.
pub fn write_ply(path: &Path, cloud: &PointCloud, format: PlyFormat) -> Result<(), PlyError> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);

    let fmt_line = match format {
        PlyFormat::Ascii => "format ascii 1.0",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0",
    };
    write!(w, "ply\n{fmt_line}\nelement vertex {}\n", cloud.len())?;
    write!(w, "property float x\nproperty float y\nproperty float z\n")?;
    if cloud.normals().is_some() {
        write!(w, "property float nx\nproperty float ny\nproperty float nz\n")?;
    }
    if cloud.colors().is_some() {
        write!(w, "property uchar red\nproperty uchar green\nproperty uchar blue\n")?;
    }
    write!(w, "end_header\n")?;

    for i in 0..cloud.len() {
        let p = cloud.point(i);
        let n = cloud.normals().map(|ns| ns[i].as_vec());
        let c = cloud.colors().map(|cs| cs[i]);
        match format {
            PlyFormat::Ascii => {
                write!(w, "{} {} {}", p.x as f32, p.y as f32, p.z as f32)?;
                if let Some(n) = n {
                    write!(w, " {} {} {}", n.x as f32, n.y as f32, n.z as f32)?;
                }
                if let Some(c) = c {
                    write!(w, " {} {} {}", to_byte(c[0]), to_byte(c[1]), to_byte(c[2]))?;
                }
                writeln!(w)?;
            }
            PlyFormat::BinaryLittleEndian => {
                for v in [p.x, p.y, p.z] {
                    w.write_f32::<LittleEndian>(v as f32)?;
                }
                if let Some(n) = n {
                    for v in [n.x, n.y, n.z] {
                        w.write_f32::<LittleEndian>(v as f32)?;
                    }
                }
                if let Some(c) = c {
                    for v in c {
                        w.write_u8(to_byte(v))?;
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Reads a point cloud from `path`. Requires a `vertex` element as the first
/// element with at least `x y z`.
pub fn read_ply(path: &Path) -> Result<PointCloud, PlyError> {
    let file = File::open(path)?;
    let mut reader = BufReader::new(file);
    let (format, layout) = parse_header(&mut reader)?;

    let idx = |name: &str| layout.properties.iter().position(|(n, _)| n == name);
    let (ix, iy, iz) = match (idx("x"), idx("y"), idx("z")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(PlyError::Parse("vertex element lacks x/y/z".into())),
    };
    let normal_idx = match (idx("nx"), idx("ny"), idx("nz")) {
        (Some(a), Some(b), Some(c)) => Some((a, b, c)),
        _ => None,
    };
    let color_idx = match (idx("red"), idx("green"), idx("blue")) {
        (Some(a), Some(b), Some(c)) => Some((a, b, c)),
        _ => None,
    };

    let mut points = Vec::with_capacity(layout.count);
    let mut normals = normal_idx.map(|_| Vec::with_capacity(layout.count));
    let mut colors = color_idx.map(|_| Vec::with_capacity(layout.count));
    let mut row = vec![0.0f64; layout.properties.len()];

    for vi in 0..layout.count {
        match format {
            PlyFormat::Ascii => {
                let mut line = String::new();
                loop {
                    line.clear();
                    if reader.read_line(&mut line)? == 0 {
                        return Err(PlyError::Parse(format!(
                            "unexpected end of file at vertex {vi}"
                        )));
                    }
                    if !line.trim().is_empty() {
                        break;
                    }
                }
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() < layout.properties.len() {
                    return Err(PlyError::Parse(format!(
                        "vertex {vi}: expected {} fields, got {}",
                        layout.properties.len(),
                        fields.len()
                    )));
                }
                for (slot, field) in row.iter_mut().zip(&fields) {
                    *slot = field
                        .parse::<f64>()
                        .map_err(|e| PlyError::Parse(format!("vertex {vi}: {e}")))?;
                }
            }
            PlyFormat::BinaryLittleEndian => {
                for (slot, (_, ty)) in row.iter_mut().zip(&layout.properties) {
                    *slot = ty.read_binary(&mut reader)?;
                }
            }
        }

        let p = Point3::new(row[ix], row[iy], row[iz]);
        if !p.is_finite() {
            return Err(PlyError::Data(format!("non-finite position at vertex {vi}")));
        }
        points.push(p);
        if let (Some((a, b, c)), Some(ns)) = (normal_idx, normals.as_mut()) {
            let n = UnitVec3::new(Vec3::new(row[a], row[b], row[c]))
                .map_err(|e| PlyError::Data(format!("vertex {vi} normal: {e}")))?;
            ns.push(n);
        }
        if let (Some((a, b, c)), Some(cs)) = (color_idx, colors.as_mut()) {
            let scale = |j: usize, v: f64| {
                if layout.properties[j].1.is_color_byte() {
                    v / 255.0
                } else {
                    v
                }
            };
            cs.push([scale(a, row[a]), scale(b, row[b]), scale(c, row[c])]);
        }
    }

    let mut cloud =
        PointCloud::new(points).map_err(|e| PlyError::Data(e.to_string()))?;
    if let Some(ns) = normals {
        cloud = cloud.with_normals(ns).map_err(|e| PlyError::Data(e.to_string()))?;
    }
    if let Some(cs) = colors {
        cloud = cloud.with_colors(cs).map_err(|e| PlyError::Data(e.to_string()))?;
    }
    Ok(cloud)
}

fn parse_header<R: BufRead>(reader: &mut R) -> Result<(PlyFormat, VertexLayout), PlyError> {
    let mut line = String::new();
    reader.read_line(&mut line)?;
    if line.trim() != "ply" {
        return Err(PlyError::Parse("missing `ply` magic".into()));
    }

    let mut format = None;
    let mut layout: Option<VertexLayout> = None;
    let mut in_vertex = false;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(PlyError::Parse("missing end_header".into()));
        }
        let trimmed = line.trim();
        let mut tokens = trimmed.split_whitespace();
        match tokens.next() {
            Some("comment") | Some("obj_info") | None => {}
            Some("format") => {
                format = Some(match tokens.next() {
                    Some("ascii") => PlyFormat::Ascii,
                    Some("binary_little_endian") => PlyFormat::BinaryLittleEndian,
                    Some(other) => {
                        return Err(PlyError::Unsupported(format!("format `{other}`")))
                    }
                    None => return Err(PlyError::Parse("bad format line".into())),
                });
            }
            Some("element") => {
                let name = tokens.next().unwrap_or_default();
                let count: usize = tokens
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| PlyError::Parse("bad element line".into()))?;
                if name == "vertex" {
                    if layout.is_some() {
                        return Err(PlyError::Parse("duplicate vertex element".into()));
                    }
                    layout = Some(VertexLayout { count, properties: Vec::new() });
                    in_vertex = true;
                } else {
                    if layout.is_none() {
                        return Err(PlyError::Unsupported(
                            "vertex must be the first element".into(),
                        ));
                    }
                    in_vertex = false;
                }
            }
            Some("property") => {
                if in_vertex {
                    let ty_token = tokens
                        .next()
                        .ok_or_else(|| PlyError::Parse("bad property line".into()))?;
                    if ty_token == "list" {
                        return Err(PlyError::Unsupported(
                            "list properties on vertex element".into(),
                        ));
                    }
                    let ty = ScalarType::parse(ty_token)?;
                    let name = tokens
                        .next()
                        .ok_or_else(|| PlyError::Parse("property missing name".into()))?;
                    layout
                        .as_mut()
                        .expect("in_vertex implies layout")
                        .properties
                        .push((name.to_string(), ty));
                }
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(PlyError::Parse(format!("unexpected header token `{other}`")))
            }
        }
    }

    let format = format.ok_or_else(|| PlyError::Parse("missing format line".into()))?;
    let layout = layout.ok_or_else(|| PlyError::Parse("missing vertex element".into()))?;
    Ok((format, layout))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_cloud() -> PointCloud {
        let points = vec![
            Point3::new(0.5, -1.25, 3.0),
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(-2.0, 0.125, 9.5),
        ];
        let normals = vec![UnitVec3::axis(0), UnitVec3::axis(1), UnitVec3::axis(2)];
        let colors = vec![[1.0, 0.0, 0.5], [0.0, 0.0, 0.0], [0.25, 0.5, 1.0]];
        PointCloud::new(points)
            .unwrap()
            .with_normals(normals)
            .unwrap()
            .with_colors(colors)
            .unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.ply");
        let cloud = sample_cloud();
        write_ply(&path, &cloud, PlyFormat::BinaryLittleEndian).unwrap();
        let back = read_ply(&path).unwrap();
        assert_eq!(back.len(), cloud.len());
        for (a, b) in cloud.points().iter().zip(back.points()) {
            // f32 quantization of the storage format
            assert!(a.distance(*b) <= 1e-6 * (1.0 + a.to_vec().norm()));
        }
        assert!(back.normals().is_some());
        assert!(back.colors().is_some());
        assert!((back.colors().unwrap()[2][2] - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn ascii_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud_ascii.ply");
        let cloud = sample_cloud();
        write_ply(&path, &cloud, PlyFormat::Ascii).unwrap();
        let back = read_ply(&path).unwrap();
        assert_eq!(back.len(), cloud.len());
        for (a, b) in cloud.points().iter().zip(back.points()) {
            assert!(a.distance(*b) <= 1e-6 * (1.0 + a.to_vec().norm()));
        }
    }

    #[test]
    fn binary_write_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.ply");
        let p2 = dir.path().join("b.ply");
        let cloud = sample_cloud();
        write_ply(&p1, &cloud, PlyFormat::BinaryLittleEndian).unwrap();
        write_ply(&p2, &cloud, PlyFormat::BinaryLittleEndian).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ply");
        std::fs::write(&path, "not a ply file\n").unwrap();
        assert!(read_ply(&path).is_err());
    }

    #[test]
    fn reads_double_positions_and_extra_properties() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("extra.ply");
        let text = "ply\nformat ascii 1.0\ncomment test\nelement vertex 2\n\
                    property double x\nproperty double y\nproperty double z\n\
                    property float confidence\nend_header\n\
                    0.5 1.5 -2.5 0.9\n1 2 3 0.1\n";
        std::fs::write(&path, text).unwrap();
        let cloud = read_ply(&path).unwrap();
        assert_eq!(cloud.len(), 2);
        assert!(cloud.point(0).distance(Point3::new(0.5, 1.5, -2.5)) <= 1e-12);
        assert!(cloud.normals().is_none());
    }
}
