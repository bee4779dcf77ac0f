//! 3D Gaussian splats: attribute types, the MLP attribute decoder with
//! analytic jacobians, spherical-harmonic color, and splat PLY I/O.

mod decoder;
pub mod ply;
mod sh;

pub use decoder::{
    decode_gaussian, decode_gaussian_batch, decode_gradients, read_decoder, write_decoder,
    Activation, DecodeJacobian, DecoderWeights, HeadConfig,
};
pub use sh::{evaluate_sh, sh_basis, sh_coeff_count, MAX_SH_DEGREE};

use thiserror::Error;

use crate::geometry::{Point3, Rotation};

#[derive(Debug, Error)]
pub enum GaussianError {
    #[error("sh coefficient length {actual} does not match 3*(L+1)^2 = {expected}")]
    ShLengthMismatch { actual: usize, expected: usize },
    #[error("sh degree {degree} exceeds supported maximum {max}")]
    UnsupportedShDegree { degree: usize, max: usize },
    #[error("decoder input length {actual} does not match expected {expected}")]
    InputLengthMismatch { actual: usize, expected: usize },
    #[error("non-finite activation in layer {layer}")]
    NonFiniteActivation { layer: usize },
    #[error("invalid decoder definition: {reason}")]
    BadDecoder { reason: String },
    #[error("invalid splat: {reason}")]
    BadSplat { reason: String },
    #[error("splat {index} has sh length {actual}, set degree implies {expected}")]
    MixedShDegree { index: usize, actual: usize, expected: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("decoder manifest error: {0}")]
    Manifest(String),
}

/// One anisotropic Gaussian: position, opacity in `[0, 1]`, positive
/// per-axis scales (standard deviations), orientation, and channel-major SH
/// color coefficients.
#[derive(Clone, Debug)]
pub struct GaussianSplat {
    pub position: Point3,
    pub opacity: f64,
    pub scale: [f64; 3],
    pub rotation: Rotation,
    pub sh: Vec<f64>,
}

impl GaussianSplat {
    pub fn validate(&self) -> Result<(), GaussianError> {
        if !(0.0..=1.0).contains(&self.opacity) {
            return Err(GaussianError::BadSplat {
                reason: format!("opacity {} outside [0, 1]", self.opacity),
            });
        }
        if self.scale.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(GaussianError::BadSplat {
                reason: format!("non-positive scale {:?}", self.scale),
            });
        }
        if !self.position.is_finite() || self.sh.iter().any(|v| !v.is_finite()) {
            return Err(GaussianError::BadSplat { reason: "non-finite attribute".into() });
        }
        if self.sh.len() % 3 != 0 || !is_square(self.sh.len() / 3) {
            return Err(GaussianError::BadSplat {
                reason: format!("sh length {} is not 3*(L+1)^2", self.sh.len()),
            });
        }
        Ok(())
    }
}

fn is_square(n: usize) -> bool {
    let r = (n as f64).sqrt().round() as usize;
    r * r == n
}

/// A set of splats sharing one SH degree.
#[derive(Clone, Debug, Default)]
pub struct GaussianSet {
    pub splats: Vec<GaussianSplat>,
    pub sh_degree: usize,
}

impl GaussianSet {
    pub fn new(splats: Vec<GaussianSplat>, sh_degree: usize) -> Result<Self, GaussianError> {
        let expected = 3 * sh_coeff_count(sh_degree);
        for (index, s) in splats.iter().enumerate() {
            s.validate()?;
            if s.sh.len() != expected {
                return Err(GaussianError::MixedShDegree {
                    index,
                    actual: s.sh.len(),
                    expected,
                });
            }
        }
        Ok(Self { splats, sh_degree })
    }

    pub fn len(&self) -> usize {
        self.splats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splats.is_empty()
    }
}
