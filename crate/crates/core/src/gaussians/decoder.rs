//! MLP attribute decoder: maps `concat(x, triplane feature)` to raw splat
//! attributes, plus the activation mappings that make every decoded splat
//! valid by construction and an analytic jacobian for gradient checking.
//!
//! Raw output layout: `[offset(3), opacity(1), scale(3), quaternion(4),
//! sh(3*(L+1)^2)]`. Attribute mapping:
//! - position = x + tanh(raw_offset) * max_offset
//! - opacity  = sigmoid(raw)
//! - scale    = exp(raw) clamped to [1e-6, max_scale]
//! - rotation = normalize(raw quaternion), identity when the norm is ~0
//! - sh       = raw

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sh_coeff_count, GaussianError, GaussianSplat};
use crate::exec;
use crate::geometry::{Point3, Rotation};
use crate::triplane::TriplaneFeature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Self::Relu => z.max(0.0),
            Self::Tanh => z.tanh(),
            Self::Sigmoid => sigmoid(z),
            Self::Linear => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Self::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Self::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Self::Linear => 1.0,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Attribute-head configuration carried with the weights.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HeadConfig {
    pub max_offset: f64,
    pub max_scale: f64,
    pub sh_degree: usize,
}

impl Default for HeadConfig {
    fn default() -> Self {
        Self { max_offset: 0.05, max_scale: 1.0, sh_degree: 1 }
    }
}

impl HeadConfig {
    pub fn raw_output_len(&self) -> usize {
        11 + 3 * sh_coeff_count(self.sh_degree)
    }
}

/// Dense MLP weights. `dims` lists layer widths from input to output;
/// layer `l` maps `dims[l] -> dims[l+1]` with row-major `weights[l]`
/// (`dims[l+1] x dims[l]`) and `biases[l]`, followed by `activations[l]`.
#[derive(Clone, Debug)]
pub struct DecoderWeights {
    dims: Vec<usize>,
    activations: Vec<Activation>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    pub head: HeadConfig,
}

impl DecoderWeights {
    pub fn new(
        dims: Vec<usize>,
        activations: Vec<Activation>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        head: HeadConfig,
    ) -> Result<Self, GaussianError> {
        if dims.len() < 2 {
            return Err(GaussianError::BadDecoder { reason: "need at least one layer".into() });
        }
        let layers = dims.len() - 1;
        if activations.len() != layers || weights.len() != layers || biases.len() != layers {
            return Err(GaussianError::BadDecoder {
                reason: format!(
                    "{} dims imply {} layers; got {} activations, {} weight blocks, {} bias blocks",
                    dims.len(),
                    layers,
                    activations.len(),
                    weights.len(),
                    biases.len()
                ),
            });
        }
        for l in 0..layers {
            if weights[l].len() != dims[l + 1] * dims[l] {
                return Err(GaussianError::BadDecoder {
                    reason: format!("layer {l} weight block has wrong size"),
                });
            }
            if biases[l].len() != dims[l + 1] {
                return Err(GaussianError::BadDecoder {
                    reason: format!("layer {l} bias block has wrong size"),
                });
            }
            if weights[l].iter().chain(&biases[l]).any(|v| !v.is_finite()) {
                return Err(GaussianError::BadDecoder {
                    reason: format!("layer {l} contains non-finite values"),
                });
            }
        }
        if *dims.last().unwrap() != head.raw_output_len() {
            return Err(GaussianError::BadDecoder {
                reason: format!(
                    "output width {} does not match head layout {} (sh degree {})",
                    dims.last().unwrap(),
                    head.raw_output_len(),
                    head.sh_degree
                ),
            });
        }
        Ok(Self { dims, activations, weights, biases, head })
    }

    /// All-zero weights; useful as a fixture (decodes to opacity 0.5,
    /// unit pre-clamp scale, identity rotation).
    pub fn zeros(feature_len: usize, hidden: &[usize], head: HeadConfig) -> Self {
        let mut dims = vec![3 + feature_len];
        dims.extend_from_slice(hidden);
        dims.push(head.raw_output_len());
        let layers = dims.len() - 1;
        let mut activations = vec![Activation::Relu; layers];
        activations[layers - 1] = Activation::Linear;
        let weights = (0..layers).map(|l| vec![0.0; dims[l + 1] * dims[l]]).collect();
        let biases = (0..layers).map(|l| vec![0.0; dims[l + 1]]).collect();
        Self::new(dims, activations, weights, biases, head).expect("consistent by construction")
    }

    /// Seeded uniform init scaled by fan-in/out; hidden layers ReLU, output
    /// linear.
    pub fn seeded(
        feature_len: usize,
        hidden: &[usize],
        head: HeadConfig,
        seed: u64,
        gain: f64,
    ) -> Self {
        let mut dims = vec![3 + feature_len];
        dims.extend_from_slice(hidden);
        dims.push(head.raw_output_len());
        let layers = dims.len() - 1;
        let mut activations = vec![Activation::Relu; layers];
        activations[layers - 1] = Activation::Linear;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        for l in 0..layers {
            let bound = gain * (6.0 / (dims[l] + dims[l + 1]) as f64).sqrt();
            weights.push(
                (0..dims[l + 1] * dims[l])
                    .map(|_| rng.gen_range(-bound..=bound))
                    .collect(),
            );
            biases.push((0..dims[l + 1]).map(|_| rng.gen_range(-0.01..=0.01)).collect());
        }
        Self::new(dims, activations, weights, biases, head).expect("consistent by construction")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_len(&self) -> usize {
        self.dims[0]
    }

    pub fn output_len(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn layer_weights(&self, l: usize) -> &[f64] {
        &self.weights[l]
    }

    pub fn layer_weights_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.weights[l]
    }

    pub fn layer_biases(&self, l: usize) -> &[f64] {
        &self.biases[l]
    }

    pub fn layer_biases_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.biases[l]
    }

    /// Raw forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, GaussianError> {
        Ok(self.forward_trace(input)?.post.pop_last())
    }

    fn forward_trace(&self, input: &[f64]) -> Result<Trace, GaussianError> {
        if input.len() != self.dims[0] {
            return Err(GaussianError::InputLengthMismatch {
                actual: input.len(),
                expected: self.dims[0],
            });
        }
        let layers = self.dims.len() - 1;
        let mut pre = Vec::with_capacity(layers);
        let mut post = Vec::with_capacity(layers + 1);
        post.push(input.to_vec());
        for l in 0..layers {
            let n_in = self.dims[l];
            let h = post.last().unwrap();
            let mut z = self.biases[l].clone();
            for (j, zj) in z.iter_mut().enumerate() {
                let row = &self.weights[l][j * n_in..(j + 1) * n_in];
                let mut acc = 0.0;
                for k in 0..n_in {
                    acc += row[k] * h[k];
                }
                *zj += acc;
            }
            let act = self.activations[l];
            let a: Vec<f64> = z.iter().map(|&v| act.apply(v)).collect();
            if a.iter().any(|v| !v.is_finite()) {
                return Err(GaussianError::NonFiniteActivation { layer: l });
            }
            pre.push(z);
            post.push(a);
        }
        Ok(Trace { pre, post: Activations(post) })
    }
}

struct Activations(Vec<Vec<f64>>);

impl Activations {
    fn pop_last(mut self) -> Vec<f64> {
        self.0.pop().expect("forward pass produced an output")
    }
}

struct Trace {
    pre: Vec<Vec<f64>>,
    post: Activations,
}

/// Jacobians of the raw decoder outputs with respect to every weight, bias,
/// and the input vector. All blocks are row-major with one row per raw
/// output.
#[derive(Clone, Debug)]
pub struct DecodeJacobian {
    pub wrt_input: Vec<f64>,
    /// Per layer: `n_out x (dims[l+1] * dims[l])`.
    pub wrt_weights: Vec<Vec<f64>>,
    /// Per layer: `n_out x dims[l+1]`.
    pub wrt_biases: Vec<Vec<f64>>,
    pub n_outputs: usize,
}

/// Decodes one splat from a query point and its triplane feature.
pub fn decode_gaussian(
    weights: &DecoderWeights,
    x: Point3,
    feature: &TriplaneFeature,
) -> Result<GaussianSplat, GaussianError> {
    if feature.len() + 3 != weights.input_len() {
        return Err(GaussianError::InputLengthMismatch {
            actual: feature.len() + 3,
            expected: weights.input_len() - 3,
        });
    }
    let mut input = Vec::with_capacity(weights.input_len());
    input.extend_from_slice(&x.coords());
    input.extend_from_slice(feature.values());
    let raw = weights.forward(&input)?;
    let head = weights.head;

    let offset = crate::geometry::Vec3::new(
        raw[0].tanh() * head.max_offset,
        raw[1].tanh() * head.max_offset,
        raw[2].tanh() * head.max_offset,
    );
    let scale = [
        raw[4].exp().clamp(1e-6, head.max_scale),
        raw[5].exp().clamp(1e-6, head.max_scale),
        raw[6].exp().clamp(1e-6, head.max_scale),
    ];
    Ok(GaussianSplat {
        position: x + offset,
        opacity: sigmoid(raw[3]),
        scale,
        rotation: Rotation::from_quaternion_or_identity(raw[7], raw[8], raw[9], raw[10]),
        sh: raw[11..].to_vec(),
    })
}

/// Batch decode; order-independent and bit-identical to per-point calls.
pub fn decode_gaussian_batch(
    weights: &DecoderWeights,
    points: &[Point3],
    features: &[TriplaneFeature],
) -> Result<Vec<GaussianSplat>, GaussianError> {
    if points.len() != features.len() {
        return Err(GaussianError::InputLengthMismatch {
            actual: features.len(),
            expected: points.len(),
        });
    }
    let results = exec::map_indexed(points.len(), |i| {
        decode_gaussian(weights, points[i], &features[i])
    });
    results.into_iter().collect()
}

/// Analytic reverse-mode jacobian of the raw outputs (before the attribute
/// mappings) w.r.t. weights, biases, and the input.
pub fn decode_gradients(
    weights: &DecoderWeights,
    x: Point3,
    feature: &TriplaneFeature,
) -> Result<DecodeJacobian, GaussianError> {
    if feature.len() + 3 != weights.input_len() {
        return Err(GaussianError::InputLengthMismatch {
            actual: feature.len() + 3,
            expected: weights.input_len() - 3,
        });
    }
    let mut input = Vec::with_capacity(weights.input_len());
    input.extend_from_slice(&x.coords());
    input.extend_from_slice(feature.values());

    let trace = weights.forward_trace(&input)?;
    let layers = weights.dims.len() - 1;
    let n_out = weights.output_len();

    // g[l] = d raw / d z^l, built backwards from the output layer.
    // Shape n_out x dims[l+1], row-major.
    let mut g = vec![0.0; n_out * n_out];
    let last_act = weights.activations[layers - 1];
    for i in 0..n_out {
        g[i * n_out + i] = last_act.derivative(trace.pre[layers - 1][i]);
    }

    let mut wrt_weights = vec![Vec::new(); layers];
    let mut wrt_biases = vec![Vec::new(); layers];

    for l in (0..layers).rev() {
        let n_l = weights.dims[l + 1];
        let n_prev = weights.dims[l];
        let h_prev = &trace.post.0[l];

        // d raw / d b^l = g; d raw / d W^l_{jk} = g[:, j] * h_prev[k].
        wrt_biases[l] = g.clone();
        let mut jw = vec![0.0; n_out * n_l * n_prev];
        for i in 0..n_out {
            for j in 0..n_l {
                let gij = g[i * n_l + j];
                if gij == 0.0 {
                    continue;
                }
                let base = i * n_l * n_prev + j * n_prev;
                for k in 0..n_prev {
                    jw[base + k] = gij * h_prev[k];
                }
            }
        }
        wrt_weights[l] = jw;

        // Propagate: g_prev = (g * W^l) hadamard act'(z^{l-1}).
        if l > 0 {
            let mut g_prev = vec![0.0; n_out * n_prev];
            for i in 0..n_out {
                for j in 0..n_l {
                    let gij = g[i * n_l + j];
                    if gij == 0.0 {
                        continue;
                    }
                    let row = &weights.weights[l][j * n_prev..(j + 1) * n_prev];
                    for k in 0..n_prev {
                        g_prev[i * n_prev + k] += gij * row[k];
                    }
                }
            }
            let act = weights.activations[l - 1];
            for i in 0..n_out {
                for k in 0..n_prev {
                    g_prev[i * n_prev + k] *= act.derivative(trace.pre[l - 1][k]);
                }
            }
            g = g_prev;
        } else {
            // d raw / d input = g * W^0.
            let mut wrt_input = vec![0.0; n_out * n_prev];
            for i in 0..n_out {
                for j in 0..n_l {
                    let gij = g[i * n_l + j];
                    if gij == 0.0 {
                        continue;
                    }
                    let row = &weights.weights[0][j * n_prev..(j + 1) * n_prev];
                    for k in 0..n_prev {
                        wrt_input[i * n_prev + k] += gij * row[k];
                    }
                }
            }
            return Ok(DecodeJacobian { wrt_input, wrt_weights, wrt_biases, n_outputs: n_out });
        }
    }
    unreachable!("loop always returns at l == 0")
}

#[derive(Serialize, Deserialize)]
struct DecoderManifest {
    dims: Vec<usize>,
    activations: Vec<Activation>,
    head: HeadConfig,
    payload: String,
}

/// Writes `<json_path>` plus a sibling `.bin` payload holding, per layer,
/// the row-major weights then the biases as little-endian f32.
pub fn write_decoder(weights: &DecoderWeights, json_path: &Path) -> Result<(), GaussianError> {
    let bin_path = json_path.with_extension("bin");
    let manifest = DecoderManifest {
        dims: weights.dims.clone(),
        activations: weights.activations.clone(),
        head: weights.head,
        payload: bin_path
            .file_name()
            .ok_or_else(|| GaussianError::Manifest("invalid output path".into()))?
            .to_string_lossy()
            .into_owned(),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| GaussianError::Manifest(e.to_string()))?;
    std::fs::write(json_path, json)?;

    let mut w = BufWriter::new(File::create(&bin_path)?);
    for l in 0..weights.dims.len() - 1 {
        for &v in &weights.weights[l] {
            w.write_f32::<LittleEndian>(v as f32)?;
        }
        for &v in &weights.biases[l] {
            w.write_f32::<LittleEndian>(v as f32)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_decoder(json_path: &Path) -> Result<DecoderWeights, GaussianError> {
    let text = std::fs::read_to_string(json_path)?;
    let manifest: DecoderManifest =
        serde_json::from_str(&text).map_err(|e| GaussianError::Manifest(e.to_string()))?;
    let bin_path = json_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&manifest.payload);
    let mut r = BufReader::new(File::open(&bin_path)?);

    let layers = manifest.dims.len().saturating_sub(1);
    let mut weights = Vec::with_capacity(layers);
    let mut biases = Vec::with_capacity(layers);
    for l in 0..layers {
        let (n_in, n_out) = (manifest.dims[l], manifest.dims[l + 1]);
        let mut wbuf = vec![0f32; n_in * n_out];
        r.read_f32_into::<LittleEndian>(&mut wbuf)?;
        let mut bbuf = vec![0f32; n_out];
        r.read_f32_into::<LittleEndian>(&mut bbuf)?;
        weights.push(wbuf.into_iter().map(|v| v as f64).collect());
        biases.push(bbuf.into_iter().map(|v| v as f64).collect());
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(GaussianError::Manifest("payload longer than manifest implies".into()));
    }
    DecoderWeights::new(manifest.dims, manifest.activations, weights, biases, manifest.head)
}
