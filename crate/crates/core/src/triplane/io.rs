//! Triplane file format: a JSON header next to a raw little-endian f32
//! payload of length `3*C*H*W` in plane-major, channel-major, row-major
//! order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use super::{Extent, Triplane, TriplaneError, PLANE_NAMES};

#[derive(Debug, Serialize, Deserialize)]
pub struct TriplaneHeader {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub extent: Extent,
    pub plane_order: Vec<String>,
    pub value_encoding: String,
    /// Payload filename, relative to the header's directory.
    pub payload: String,
}

/// Writes `<json_path>` plus a sibling `.bin` payload.
pub fn write_triplane(tri: &Triplane, json_path: &Path) -> Result<(), TriplaneError> {
    let bin_path = json_path.with_extension("bin");
    let payload_name = bin_path
        .file_name()
        .ok_or_else(|| TriplaneError::Header("invalid output path".into()))?
        .to_string_lossy()
        .into_owned();

    let header = TriplaneHeader {
        channels: tri.channels(),
        height: tri.height(),
        width: tri.width(),
        extent: tri.extent(),
        plane_order: PLANE_NAMES.iter().map(|s| s.to_string()).collect(),
        value_encoding: "f32-le".into(),
        payload: payload_name,
    };
    let json = serde_json::to_string_pretty(&header)
        .map_err(|e| TriplaneError::Header(e.to_string()))?;
    std::fs::write(json_path, json)?;

    let mut w = BufWriter::new(File::create(&bin_path)?);
    for &v in tri.data() {
        w.write_f32::<LittleEndian>(v)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a triplane from its JSON header; the payload path in the header is
/// resolved relative to the header's directory.
pub fn read_triplane(json_path: &Path) -> Result<Triplane, TriplaneError> {
    let text = std::fs::read_to_string(json_path)?;
    let header: TriplaneHeader =
        serde_json::from_str(&text).map_err(|e| TriplaneError::Header(e.to_string()))?;
    if header.value_encoding != "f32-le" {
        return Err(TriplaneError::Header(format!(
            "unsupported value encoding `{}`",
            header.value_encoding
        )));
    }
    if header.plane_order != PLANE_NAMES {
        return Err(TriplaneError::Header(format!(
            "unsupported plane order {:?}",
            header.plane_order
        )));
    }
    let bin_path = json_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&header.payload);

    let expected = 3 * header.channels * header.height * header.width;
    let mut data = vec![0f32; expected];
    let mut r = BufReader::new(File::open(&bin_path)?);
    r.read_f32_into::<LittleEndian>(&mut data)?;
    // Reject trailing bytes so truncated/oversized payloads cannot slip by.
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(TriplaneError::PayloadSize { actual: expected + 1, expected });
    }
    let extent = Extent::new(header.extent.min, header.extent.max)?;
    Triplane::new(header.channels, header.height, header.width, extent, data)
}
