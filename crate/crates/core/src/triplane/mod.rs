//! Three axis-aligned feature planes with per-point queries.
//!
//! A 3D point projects onto the XY, XZ and YZ planes; each projection is
//! interpolated bilinearly over that plane's `C`-channel grid and the three
//! results are concatenated in the fixed order `XY ++ XZ ++ YZ`. The lookup
//! is bilinear per plane (the 2D restriction of a trilinear volume lookup).
//!
//! Grid alignment follows the cell-center convention: node `(row, col)` of a
//! `H x W` plane sits at normalized coordinate `((col + 0.5) / W * 2 - 1,
//! (row + 0.5) / H * 2 - 1)`. Queries outside `[-1, 1]` clamp to the border.

mod io;

pub use io::{read_triplane, write_triplane, TriplaneHeader};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::geometry::Point3;

#[derive(Debug, Error)]
pub enum TriplaneError {
    #[error("plane payload has {actual} values, expected 3*C*H*W = {expected}")]
    PayloadSize { actual: usize, expected: usize },
    #[error("triplane dimensions must be positive (C={c}, H={h}, W={w})")]
    BadDimensions { c: usize, h: usize, w: usize },
    #[error("extent must have positive volume")]
    BadExtent,
    #[error("non-finite value in plane data")]
    NonFinite,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("header error: {0}")]
    Header(String),
}

/// Axis-aligned world-space box mapped onto the `[-1, 1]^2` domain of each
/// plane.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Extent {
    pub min: Point3,
    pub max: Point3,
}

impl Extent {
    pub fn new(min: Point3, max: Point3) -> Result<Self, TriplaneError> {
        if !(max.x > min.x && max.y > min.y && max.z > min.z) {
            return Err(TriplaneError::BadExtent);
        }
        Ok(Self { min, max })
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    /// Normalizes a world coordinate on `axis` into `[-1, 1]` (unclamped).
    fn normalize(&self, axis: usize, v: f64) -> f64 {
        let (lo, hi) = match axis {
            0 => (self.min.x, self.max.x),
            1 => (self.min.y, self.max.y),
            _ => (self.min.z, self.max.z),
        };
        2.0 * (v - lo) / (hi - lo) - 1.0
    }
}

/// World axes feeding each plane's `(u, v)`, in concatenation order:
/// XY, XZ, YZ.
pub const PLANE_AXES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
pub const PLANE_NAMES: [&str; 3] = ["xy", "xz", "yz"];

/// Three `C x H x W` feature grids plus their world extent. Values are
/// stored as f32 (the file payload type); queries interpolate in f64.
///
/// Storage layout is plane-major, channel-major, row-major:
/// `data[((plane * C + c) * H + row) * W + col]`.
#[derive(Clone, Debug)]
pub struct Triplane {
    channels: usize,
    height: usize,
    width: usize,
    extent: Extent,
    data: Vec<f32>,
}

/// Concatenated per-plane features of one query point; length `3 * C`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriplaneFeature(pub Vec<f64>);

impl TriplaneFeature {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Triplane {
    pub fn new(
        channels: usize,
        height: usize,
        width: usize,
        extent: Extent,
        data: Vec<f32>,
    ) -> Result<Self, TriplaneError> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(TriplaneError::BadDimensions { c: channels, h: height, w: width });
        }
        let expected = 3 * channels * height * width;
        if data.len() != expected {
            return Err(TriplaneError::PayloadSize { actual: data.len(), expected });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(TriplaneError::NonFinite);
        }
        Ok(Self { channels, height, width, extent, data })
    }

    pub fn zeros(
        channels: usize,
        height: usize,
        width: usize,
        extent: Extent,
    ) -> Result<Self, TriplaneError> {
        let data = vec![0.0; 3 * channels * height * width];
        Self::new(channels, height, width, extent, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn feature_len(&self) -> usize {
        3 * self.channels
    }

    #[inline]
    fn index(&self, plane: usize, channel: usize, row: usize, col: usize) -> usize {
        ((plane * self.channels + channel) * self.height + row) * self.width + col
    }

    pub fn value(&self, plane: usize, channel: usize, row: usize, col: usize) -> f32 {
        self.data[self.index(plane, channel, row, col)]
    }

    pub fn value_mut(&mut self, plane: usize, channel: usize, row: usize, col: usize) -> &mut f32 {
        let i = self.index(plane, channel, row, col);
        &mut self.data[i]
    }

    /// Bilinear sample support for one plane: `(col0, col1, row0, row1,
    /// frac_col, frac_row)` under the cell-center convention, border-clamped.
    #[inline]
    fn sample_coords(&self, u: f64, v: f64) -> (usize, usize, usize, usize, f64, f64) {
        let gx = ((u.clamp(-1.0, 1.0) + 1.0) * 0.5 * self.width as f64 - 0.5)
            .clamp(0.0, (self.width - 1) as f64);
        let gy = ((v.clamp(-1.0, 1.0) + 1.0) * 0.5 * self.height as f64 - 0.5)
            .clamp(0.0, (self.height - 1) as f64);
        let col0 = gx.floor() as usize;
        let row0 = gy.floor() as usize;
        let col1 = (col0 + 1).min(self.width - 1);
        let row1 = (row0 + 1).min(self.height - 1);
        (col0, col1, row0, row1, gx - col0 as f64, gy - row0 as f64)
    }

    /// Queries the feature field at a world point: per-plane bilinear
    /// interpolation, concatenated as `XY ++ XZ ++ YZ`.
    pub fn query(&self, x: Point3) -> TriplaneFeature {
        let coords = x.coords();
        let mut out = Vec::with_capacity(self.feature_len());
        for (plane, &(ua, va)) in PLANE_AXES.iter().enumerate() {
            let u = self.extent.normalize(ua, coords[ua]);
            let v = self.extent.normalize(va, coords[va]);
            let (c0, c1, r0, r1, fx, fy) = self.sample_coords(u, v);
            for ch in 0..self.channels {
                let v00 = self.value(plane, ch, r0, c0) as f64;
                let v01 = self.value(plane, ch, r0, c1) as f64;
                let v10 = self.value(plane, ch, r1, c0) as f64;
                let v11 = self.value(plane, ch, r1, c1) as f64;
                let top = v00 + (v01 - v00) * fx;
                let bottom = v10 + (v11 - v10) * fx;
                out.push(top + (bottom - top) * fy);
            }
        }
        TriplaneFeature(out)
    }

    /// Batch query; elementwise bit-identical to [`Triplane::query`].
    pub fn query_batch(&self, xs: &[Point3]) -> Vec<TriplaneFeature> {
        exec::map_slice(xs, |x| self.query(*x))
    }
}
