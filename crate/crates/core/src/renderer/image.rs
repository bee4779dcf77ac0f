use std::path::Path;

use super::RenderError;

/// Row-major RGB image with values in `[0, 1]` and an optional alpha
/// channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    alpha: Option<Vec<f64>>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, RenderError> {
        if width == 0 || height == 0 {
            return Err(RenderError::BadImage("dimensions must be positive".into()));
        }
        if pixels.len() != width * height * 3 {
            return Err(RenderError::BadImage(format!(
                "pixel buffer has {} values, expected {}",
                pixels.len(),
                width * height * 3
            )));
        }
        if pixels.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(RenderError::BadImage("pixel values outside [0, 1]".into()));
        }
        Ok(Self { width, height, pixels, alpha: None })
    }

    pub fn with_alpha(mut self, alpha: Vec<f64>) -> Result<Self, RenderError> {
        if alpha.len() != self.width * self.height {
            return Err(RenderError::BadImage("alpha buffer size mismatch".into()));
        }
        if alpha.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(RenderError::BadImage("alpha values outside [0, 1]".into()));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    pub fn constant(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self, RenderError> {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            pixels.extend_from_slice(&rgb);
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn alpha(&self) -> Option<&[f64]> {
        self.alpha.as_deref()
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Mean of the three channels at a pixel.
    pub fn luminance(&self, x: usize, y: usize) -> f64 {
        let [r, g, b] = self.pixel(x, y);
        (r + g + b) / 3.0
    }

    /// 2x box downsampling; requires even dimensions.
    pub fn downsample2x(&self) -> Result<Image, RenderError> {
        if self.width % 2 != 0 || self.height % 2 != 0 {
            return Err(RenderError::BadImage("downsample2x needs even dimensions".into()));
        }
        let (w, h) = (self.width / 2, self.height / 2);
        let mut pixels = Vec::with_capacity(w * h * 3);
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    let mut acc = 0.0;
                    for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        acc += self.pixel(2 * x + dx, 2 * y + dy)[c];
                    }
                    pixels.push(acc / 4.0);
                }
            }
        }
        Image::new(w, h, pixels)
    }

    /// Writes an 8-bit PNG (RGBA when an alpha channel is present).
    pub fn write_png(&self, path: &Path) -> Result<(), RenderError> {
        let quant = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        let (w, h) = (self.width as u32, self.height as u32);
        match &self.alpha {
            None => {
                let mut buf = Vec::with_capacity(self.pixels.len());
                buf.extend(self.pixels.iter().map(|&v| quant(v)));
                let img = image::RgbImage::from_raw(w, h, buf)
                    .ok_or_else(|| RenderError::Png("buffer size mismatch".into()))?;
                img.save(path).map_err(|e| RenderError::Png(e.to_string()))
            }
            Some(alpha) => {
                let mut buf = Vec::with_capacity(self.width * self.height * 4);
                for i in 0..self.width * self.height {
                    buf.push(quant(self.pixels[i * 3]));
                    buf.push(quant(self.pixels[i * 3 + 1]));
                    buf.push(quant(self.pixels[i * 3 + 2]));
                    buf.push(quant(alpha[i]));
                }
                let img = image::RgbaImage::from_raw(w, h, buf)
                    .ok_or_else(|| RenderError::Png("buffer size mismatch".into()))?;
                img.save(path).map_err(|e| RenderError::Png(e.to_string()))
            }
        }
    }

    /// Reads an 8-bit PNG into `[0, 1]` values; alpha is kept when present.
    pub fn read_png(path: &Path) -> Result<Image, RenderError> {
        let dynamic = image::open(path).map_err(|e| RenderError::Png(e.to_string()))?;
        let rgba = dynamic.to_rgba8();
        let (w, h) = (rgba.width() as usize, rgba.height() as usize);
        let mut pixels = Vec::with_capacity(w * h * 3);
        let mut alpha = Vec::with_capacity(w * h);
        let mut has_alpha = false;
        for p in rgba.pixels() {
            pixels.push(p.0[0] as f64 / 255.0);
            pixels.push(p.0[1] as f64 / 255.0);
            pixels.push(p.0[2] as f64 / 255.0);
            alpha.push(p.0[3] as f64 / 255.0);
            if p.0[3] != 255 {
                has_alpha = true;
            }
        }
        let img = Image::new(w, h, pixels)?;
        if has_alpha {
            img.with_alpha(alpha)
        } else {
            Ok(img)
        }
    }
}
