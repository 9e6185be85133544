//! A small transformer encoder with seeded, untrained weights.
//!
//! Each layer computes
//!
//! ```text
//! a = LN(h + MHAtt(h))
//! h' = LN(a + FFN(a))        FFN(x) = GELU(x W1 + b1) W2 + b2
//! ```
//!
//! Layer normalization has no affine parameters (epsilon 1e-5), GELU uses
//! the tanh approximation `0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))`
//! and attention is unmasked, scaled by `1/sqrt(hidden_dim / num_heads)`.
//!
//! All weights are drawn once from `Xoshiro256PlusPlus::seed_from_u64(seed)`
//! as `-0.1 + 0.2 * ((next_u64 >> 11) * 2^-53)`, in this order: token
//! embeddings (vocab x d, row-major), position embeddings (max_positions x
//! d), then for each layer `Wq, bq, Wk, bk, Wv, bv, Wo, bo, W1, b1, W2, b2`
//! with matrices stored input-major (`x W`).

use std::collections::{BTreeSet, HashMap};

use ndarray::{s, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::perturb::RepresentationProvider;

mod config;
pub use self::config::{EncoderConfig, CLS, CONFIG_VERSION, MASK, PAD, SEP, SPECIALS, UNK};

pub const LAYER_NORM_EPS: f64 = 1e-5;

/// Uniform weight in `[-0.1, 0.1)` from one 64-bit draw.
pub fn weight_from_bits(bits: u64) -> f64 {
    let unit = (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    -0.1 + 0.2 * unit
}

/// Representations `h^0..h^L` of one sentence, each `T x d`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerStack(pub Vec<Array2<f64>>);

impl LayerStack {
    pub fn layer(&self, l: usize) -> &Array2<f64> {
        &self.0[l]
    }

    pub fn num_layers(&self) -> usize {
        self.0.len() - 1
    }

    pub fn last(&self) -> &Array2<f64> {
        self.0.last().expect("stack holds h^0")
    }
}

struct LayerWeights {
    wq: Array2<f64>,
    bq: Array1<f64>,
    wk: Array2<f64>,
    bk: Array1<f64>,
    wv: Array2<f64>,
    bv: Array1<f64>,
    wo: Array2<f64>,
    bo: Array1<f64>,
    w1: Array2<f64>,
    b1: Array1<f64>,
    w2: Array2<f64>,
    b2: Array1<f64>,
}

/// Encoder with materialized weights. Immutable and `Sync`.
pub struct Encoder {
    cfg: EncoderConfig,
    index: HashMap<String, usize>,
    unk: usize,
    token_embeddings: Array2<f64>,
    position_embeddings: Array2<f64>,
    layers: Vec<LayerWeights>,
}

struct WeightStream(Xoshiro256PlusPlus);

impl WeightStream {
    fn matrix(&mut self, rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_simple_fn((rows, cols), || weight_from_bits(self.0.next_u64()))
    }

    fn vector(&mut self, len: usize) -> Array1<f64> {
        Array1::from_shape_simple_fn(len, || weight_from_bits(self.0.next_u64()))
    }
}

impl Encoder {
    pub fn new(cfg: EncoderConfig) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.hidden_dim;
        let mut draws = WeightStream(Xoshiro256PlusPlus::seed_from_u64(cfg.seed));
        let token_embeddings = draws.matrix(cfg.vocab.len(), d);
        let position_embeddings = draws.matrix(cfg.max_positions, d);
        let layers = (0..cfg.num_layers)
            .map(|_| LayerWeights {
                wq: draws.matrix(d, d),
                bq: draws.vector(d),
                wk: draws.matrix(d, d),
                bk: draws.vector(d),
                wv: draws.matrix(d, d),
                bv: draws.vector(d),
                wo: draws.matrix(d, d),
                bo: draws.vector(d),
                w1: draws.matrix(d, cfg.ffn_dim),
                b1: draws.vector(cfg.ffn_dim),
                w2: draws.matrix(cfg.ffn_dim, d),
                b2: draws.vector(d),
            })
            .collect();

        let index: HashMap<String, usize> = cfg
            .vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let unk = index[UNK];
        Ok(Encoder {
            cfg,
            index,
            unk,
            token_embeddings,
            position_embeddings,
            layers,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.cfg
    }

    /// Vocabulary id of `word`, UNK for unknown words.
    pub fn token_id(&self, word: &str) -> usize {
        self.index.get(word).copied().unwrap_or(self.unk)
    }

    pub fn token_embedding(&self, word: &str) -> ndarray::ArrayView1<'_, f64> {
        self.token_embeddings.row(self.token_id(word))
    }

    pub fn position_embedding(&self, position: usize) -> ndarray::ArrayView1<'_, f64> {
        self.position_embeddings.row(position)
    }

    /// `h^0[i] = token_embedding(tokens[i]) + position_embedding(i)`.
    pub fn embed<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Array2<f64>> {
        if tokens.len() > self.cfg.max_positions {
            return Err(Error::Capacity {
                len: tokens.len(),
                max: self.cfg.max_positions,
            });
        }
        let mut h = Array2::zeros((tokens.len(), self.cfg.hidden_dim));
        for (i, (mut row, tok)) in h.outer_iter_mut().zip(tokens).enumerate() {
            row.assign(&self.token_embedding(tok.as_ref()));
            row += &self.position_embedding(i);
        }
        Ok(h)
    }

    /// Full stack of representations `h^0..h^L`.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Result<LayerStack> {
        let mut stack = vec![self.embed(tokens)?];
        for layer in &self.layers {
            let next = self.layer_forward(layer, stack.last().unwrap());
            stack.push(next);
        }
        Ok(LayerStack(stack))
    }

    /// Representation `h^layer` only, skipping the layers above it.
    pub fn encode_to<S: AsRef<str>>(&self, tokens: &[S], layer: usize) -> Result<Array2<f64>> {
        if layer > self.cfg.num_layers {
            return Err(Error::LayerOutOfRange {
                layer,
                depth: self.cfg.num_layers,
            });
        }
        let mut h = self.embed(tokens)?;
        for weights in &self.layers[..layer] {
            h = self.layer_forward(weights, &h);
        }
        Ok(h)
    }

    fn layer_forward(&self, w: &LayerWeights, h: &Array2<f64>) -> Array2<f64> {
        layer_norm(&self.pre_norm_output(w, h))
    }

    /// `a + FFN(a)` with `a = LN(h + MHAtt(h))`: the input of the layer's
    /// final normalization.
    fn pre_norm_output(&self, w: &LayerWeights, h: &Array2<f64>) -> Array2<f64> {
        let attended = self.attention(w, h);
        let a = layer_norm(&(h + &attended));
        let mut inner = a.dot(&w.w1) + &w.b1;
        inner.mapv_inplace(gelu);
        let ffn = inner.dot(&w.w2) + &w.b2;
        a + ffn
    }

    fn attention(&self, w: &LayerWeights, h: &Array2<f64>) -> Array2<f64> {
        let q = h.dot(&w.wq) + &w.bq;
        let k = h.dot(&w.wk) + &w.bk;
        let v = h.dot(&w.wv) + &w.bv;
        let head_dim = self.cfg.head_dim();
        let scale = 1.0 / (head_dim as f64).sqrt();
        let mut context = Array2::zeros(h.raw_dim());
        for head in 0..self.cfg.num_heads {
            let cols = s![.., head * head_dim..(head + 1) * head_dim];
            let mut scores = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            for mut row in scores.outer_iter_mut() {
                softmax_inplace(row.as_slice_mut().expect("standard layout"));
            }
            context.slice_mut(cols).assign(&scores.dot(&v.slice(cols)));
        }
        context.dot(&w.wo) + &w.bo
    }
}

impl RepresentationProvider for Encoder {
    fn depth(&self) -> usize {
        self.cfg.num_layers
    }

    fn provide(&self, tokens: &[String], masked: &[usize], layer: usize) -> Result<Array2<f64>> {
        let input = mask(tokens, masked)?;
        self.encode_to(&input, layer)
    }
}

/// Replace every listed position by the MASK token. Positions are a set:
/// repeats have no further effect.
pub fn mask<S: AsRef<str>>(tokens: &[S], positions: &[usize]) -> Result<Vec<String>> {
    let positions: BTreeSet<usize> = positions.iter().copied().collect();
    if let Some(&bad) = positions.iter().find(|&&p| p >= tokens.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: tokens.len(),
        });
    }
    Ok(tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if positions.contains(&i) {
                MASK.to_owned()
            } else {
                t.as_ref().to_owned()
            }
        })
        .collect())
}

/// Row-wise standardization with population variance.
pub fn layer_norm(x: &Array2<f64>) -> Array2<f64> {
    let mut out = x.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let n = row.len() as f64;
        let mean = row.sum() / n;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let denom = (var + LAYER_NORM_EPS).sqrt();
        row.mapv_inplace(|v| (v - mean) / denom);
    }
    out
}

pub fn gelu(x: f64) -> f64 {
    const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
    0.5 * x * (1.0 + (SQRT_2_OVER_PI * (x + 0.044715 * x * x * x)).tanh())
}

fn softmax_inplace(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}
