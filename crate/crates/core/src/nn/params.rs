use rand::Rng;
use serde::{Deserialize, Serialize};

use super::positional::positional_encoding_2d;
use crate::error::{Error, Result};
use crate::mdp::{binomial, feature_width};
use crate::tensor::Matrix;

/// Negative-side slope of the head activations.
pub const LEAKY_SLOPE: f64 = 0.01;
/// Variance floor inside layer normalisation.
pub const LN_EPS: f64 = 1e-9;

/// Width choices that do not depend on the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_blocks: usize,
    pub d_ff: usize,
    pub head_hidden: usize,
    pub positional_encoding: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            d_model: 32,
            n_heads: 2,
            n_blocks: 2,
            d_ff: 64,
            head_hidden: 32,
            positional_encoding: true,
        }
    }
}

/// Every dimension of a network; two networks with equal shapes have
/// interchangeable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkShape {
    pub n_user: usize,
    pub n_subband: usize,
    pub max_users: usize,
    pub n_actions: usize,
    pub n_features: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub n_blocks: usize,
    pub d_ff: usize,
    pub head_hidden: usize,
    pub positional: bool,
}

/// Tensors per encoder block.
pub(crate) const BLOCK_TENSORS: usize = 16;
/// Tensors per output head.
pub(crate) const HEAD_TENSORS: usize = 6;

/// Offsets of the tensors of one encoder block.
pub(crate) mod blk {
    pub const WQ: usize = 0;
    pub const BQ: usize = 1;
    pub const WK: usize = 2;
    pub const BK: usize = 3;
    pub const WV: usize = 4;
    pub const BV: usize = 5;
    pub const WO: usize = 6;
    pub const BO: usize = 7;
    pub const LN1_G: usize = 8;
    pub const LN1_B: usize = 9;
    pub const FF1_W: usize = 10;
    pub const FF1_B: usize = 11;
    pub const FF2_W: usize = 12;
    pub const FF2_B: usize = 13;
    pub const LN2_G: usize = 14;
    pub const LN2_B: usize = 15;
}

impl NetworkShape {
    pub fn new(n_user: usize, n_subband: usize, max_users: usize, cfg: &NetworkConfig) -> Result<Self> {
        if n_user == 0 || n_subband == 0 {
            return Err(Error::config("network: empty token grid"));
        }
        if max_users == 0 || max_users > n_user + 1 {
            return Err(Error::config("network: users per subband out of range"));
        }
        if cfg.d_model == 0 || cfg.d_model % 4 != 0 {
            return Err(Error::config("network: d_model must be a positive multiple of 4"));
        }
        if cfg.n_heads == 0 || cfg.d_model % cfg.n_heads != 0 {
            return Err(Error::config("network: d_model must be divisible by n_heads"));
        }
        if cfg.n_blocks == 0 || cfg.d_ff == 0 || cfg.head_hidden == 0 {
            return Err(Error::config("network: widths must be positive"));
        }
        Ok(Self {
            n_user,
            n_subband,
            max_users,
            n_actions: binomial(n_user as u64 + 1, max_users as u64) as usize,
            n_features: feature_width(n_user),
            d_model: cfg.d_model,
            n_heads: cfg.n_heads,
            n_blocks: cfg.n_blocks,
            d_ff: cfg.d_ff,
            head_hidden: cfg.head_hidden,
            positional: cfg.positional_encoding,
        })
    }

    pub fn n_tokens(&self) -> usize {
        self.n_user * self.n_subband
    }

    pub fn d_head(&self) -> usize {
        self.d_model / self.n_heads
    }

    pub(crate) fn block(&self, b: usize) -> usize {
        2 + BLOCK_TENSORS * b
    }

    pub(crate) fn policy_head(&self) -> usize {
        2 + BLOCK_TENSORS * self.n_blocks
    }

    pub(crate) fn value_head(&self) -> usize {
        self.policy_head() + HEAD_TENSORS
    }

    /// Names and dimensions of every parameter tensor, in storage order:
    /// input projection, then each encoder block (query, key, value, output
    /// projections, first normalisation, feed-forward in and out, second
    /// normalisation), then the policy head and the value head (three dense
    /// layers each). Weights are `in × out`, biases and gains `1 × out`.
    pub fn tensor_specs(&self) -> Vec<(String, usize, usize)> {
        let (d, ff, hh) = (self.d_model, self.d_ff, self.head_hidden);
        let mut specs = vec![
            ("input.weight".to_string(), self.n_features, d),
            ("input.bias".to_string(), 1, d),
        ];
        for b in 0..self.n_blocks {
            let p = format!("block{b}");
            for (n, r, c) in [
                ("query.weight", d, d),
                ("query.bias", 1, d),
                ("key.weight", d, d),
                ("key.bias", 1, d),
                ("value.weight", d, d),
                ("value.bias", 1, d),
                ("output.weight", d, d),
                ("output.bias", 1, d),
                ("norm1.gain", 1, d),
                ("norm1.bias", 1, d),
                ("ff1.weight", d, ff),
                ("ff1.bias", 1, ff),
                ("ff2.weight", ff, d),
                ("ff2.bias", 1, d),
                ("norm2.gain", 1, d),
                ("norm2.bias", 1, d),
            ] {
                specs.push((format!("{p}.{n}"), r, c));
            }
        }
        for (head, out) in [("policy", self.n_actions), ("value", 1)] {
            for (n, r, c) in [
                ("dense1.weight", d, hh),
                ("dense1.bias", 1, hh),
                ("dense2.weight", hh, hh),
                ("dense2.bias", 1, hh),
                ("dense3.weight", hh, out),
                ("dense3.bias", 1, out),
            ] {
                specs.push((format!("{head}.{n}"), r, c));
            }
        }
        specs
    }

    pub fn n_parameters(&self) -> usize {
        self.tensor_specs().iter().map(|(_, r, c)| r * c).sum()
    }
}

/// Trainable tensors plus the fixed positional table.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParameters {
    pub shape: NetworkShape,
    pub tensors: Vec<Matrix>,
    /// `n_tokens × d_model`; all zeros when positional encoding is disabled.
    pub positional: Matrix,
}

/// Same layout as [`NetworkParameters::tensors`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Matrix>,
}

impl Gradients {
    pub fn zeros(shape: &NetworkShape) -> Self {
        Self {
            tensors: shape
                .tensor_specs()
                .into_iter()
                .map(|(_, r, c)| Matrix::zeros(r, c))
                .collect(),
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.tensors.iter_mut().for_each(|t| t.fill(v));
    }

    pub fn scale(&mut self, s: f64) {
        self.tensors.iter_mut().for_each(|t| t.scale(s));
    }

    pub fn flat(&self) -> Vec<f64> {
        self.tensors.iter().flat_map(|t| t.data.iter().copied()).collect()
    }
}

impl NetworkParameters {
    /// Dense weights `U(−1/√fan_in, 1/√fan_in)`, biases zero, normalisation
    /// gains one.
    pub fn init<R: Rng + ?Sized>(shape: NetworkShape, rng: &mut R) -> Self {
        let tensors = shape
            .tensor_specs()
            .into_iter()
            .map(|(name, r, c)| {
                let mut t = Matrix::zeros(r, c);
                if name.ends_with(".weight") {
                    let bound = 1.0 / (r as f64).sqrt();
                    t.data.iter_mut().for_each(|x| *x = rng.random_range(-bound..bound));
                } else if name.ends_with(".gain") {
                    t.fill(1.0);
                }
                t
            })
            .collect();
        Self::from_tensors(shape, tensors).expect("tensor layout from its own shape")
    }

    /// Wraps tensors in storage order, checking every dimension.
    pub fn from_tensors(shape: NetworkShape, tensors: Vec<Matrix>) -> Result<Self> {
        let specs = shape.tensor_specs();
        if specs.len() != tensors.len() {
            return Err(Error::Shape(format!(
                "expected {} tensors, got {}",
                specs.len(),
                tensors.len()
            )));
        }
        for ((name, r, c), t) in specs.iter().zip(&tensors) {
            if (t.rows, t.cols) != (*r, *c) {
                return Err(Error::Shape(format!(
                    "{name}: expected {r}x{c}, got {}x{}",
                    t.rows, t.cols
                )));
            }
        }
        let positional = if shape.positional {
            positional_encoding_2d(shape.n_user, shape.n_subband, shape.d_model)?
        } else {
            Matrix::zeros(shape.n_tokens(), shape.d_model)
        };
        Ok(Self {
            shape,
            tensors,
            positional,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(Matrix::is_finite)
    }

    pub fn flat(&self) -> Vec<f64> {
        self.tensors.iter().flat_map(|t| t.data.iter().copied()).collect()
    }

    pub(crate) fn t(&self, i: usize) -> &Matrix {
        &self.tensors[i]
    }
}
