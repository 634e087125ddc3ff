//! Minimal encoder-only transformer with an inspectable residual stream.
//!
//! One attention head per block (an output projection folds multi-head back
//! into a single matrix product anyway), pre-norm residual placement, and a
//! selectable attention mask mode. `forward` records the residual stream
//! after every block so callers can compare runs snapshot by snapshot.

mod forward;
mod io;

pub use forward::{attention_block, decode_top, forward, forward_embedded, mlp_block};
pub use io::{load_weights, save_weights, SavedModel};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::linalg::{LinalgError, Matrix};
use crate::rng;

/// Layer-norm variance epsilon. The architecture's invariants do not depend
/// on it; this is the usual default.
pub const LN_EPS: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("token id {id} out of range for vocab size {vocab_size}")]
    TokenOutOfRange { id: usize, vocab_size: usize },
    #[error("sequence length {len} exceeds max_len {max_len}")]
    SequenceTooLong { len: usize, max_len: usize },
    #[error("sinusoidal positions need an even d_model, got {0}")]
    OddDModel(usize),
    #[error("input has {got} columns, model expects d_model {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("weight file: {0}")]
    Format(String),
}

/// Where (and whether) the causal mask is applied in the attention block.
///
/// The strictly-upper triangle of the score matrix is the future; the three
/// masked variants differ in how they erase it:
/// * `NegInfPreSoftmax` writes the `-inf` sentinel before softmax, so future
///   positions get weight exactly 0 and contribute nothing to the row sums.
/// * `ZeroPreSoftmax` writes 0 before softmax; `exp(0) = 1` still lands in
///   every denominator, so later tokens keep a faint, content-free effect on
///   earlier rows.
/// * `PostSoftmaxZero` runs softmax over the full row first and then zeroes
///   the future weights without renormalizing. The retained weights keep the
///   full-row denominator, so the *scores* of future tokens still scale
///   earlier rows: prefix rows deviate at O(1) between the prefix-only run
///   and the full run, unlike `NegInfPreSoftmax`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskMode {
    Unmasked,
    NegInfPreSoftmax,
    ZeroPreSoftmax,
    PostSoftmaxZero,
}

impl MaskMode {
    pub fn is_masked(self) -> bool {
        self != MaskMode::Unmasked
    }

    /// True for the one variant whose prefix rows are numerically
    /// independent of later tokens. The two other masked modes keep a
    /// residue of the input length (and, for `PostSoftmaxZero`, of the
    /// future scores) in every softmax denominator.
    pub fn is_exact_masked(self) -> bool {
        matches!(self, MaskMode::NegInfPreSoftmax)
    }
}

impl fmt::Display for MaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MaskMode::Unmasked => "unmasked",
            MaskMode::NegInfPreSoftmax => "neginf",
            MaskMode::ZeroPreSoftmax => "zeropre",
            MaskMode::PostSoftmaxZero => "postzero",
        };
        f.write_str(s)
    }
}

impl FromStr for MaskMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "unmasked" => Ok(MaskMode::Unmasked),
            "neginf" => Ok(MaskMode::NegInfPreSoftmax),
            "zeropre" => Ok(MaskMode::ZeroPreSoftmax),
            "postzero" => Ok(MaskMode::PostSoftmaxZero),
            other => Err(format!(
                "unknown mask mode '{other}' (expected unmasked, neginf, zeropre, or postzero)"
            )),
        }
    }
}

/// All fixed hyperparameters of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub d_model: usize,
    pub n_layers: usize,
    pub d_mlp: usize,
    pub max_len: usize,
    pub mask_mode: MaskMode,
    pub seed: u64,
    /// Score scale; `None` means the conventional `1/sqrt(d_model)`.
    pub attn_scale: Option<f64>,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("vocab_size", self.vocab_size),
            ("d_model", self.d_model),
            ("d_mlp", self.d_mlp),
            ("max_len", self.max_len),
        ] {
            if v == 0 {
                return Err(ModelError::BadConfig(format!("{name} must be >= 1")));
            }
        }
        if self.d_model % 2 != 0 {
            return Err(ModelError::OddDModel(self.d_model));
        }
        if let Some(s) = self.attn_scale {
            if !(s > 0.0) || !s.is_finite() {
                return Err(ModelError::BadConfig(format!("attn_scale must be a positive finite number, got {s}")));
            }
        }
        Ok(())
    }

    pub fn effective_attn_scale(&self) -> f64 {
        self.attn_scale.unwrap_or(1.0 / (self.d_model as f64).sqrt())
    }
}

/// Per-block weights: single-head attention plus a two-matrix MLP, with a
/// layer norm in front of each branch.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub wo: Matrix,
    pub w1: Matrix,
    pub w2: Matrix,
    pub ln1_gain: Vec<f64>,
    pub ln1_bias: Vec<f64>,
    pub ln2_gain: Vec<f64>,
    pub ln2_bias: Vec<f64>,
}

/// Full parameter set: token embedding `E`, position table `P`, the blocks,
/// a final layer norm, and the unembedding `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub embedding: Matrix,
    pub positions: Matrix,
    pub layers: Vec<LayerWeights>,
    pub final_ln_gain: Vec<f64>,
    pub final_ln_bias: Vec<f64>,
    pub unembedding: Matrix,
}

/// Residual-stream record of one forward pass. `snapshots[0]` is the embedded
/// input, `snapshots[m]` the stream after block `m`; one logit row per token.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTrace {
    pub snapshots: Vec<Matrix>,
    pub logits: Matrix,
}

impl ResidualTrace {
    pub fn n_blocks(&self) -> usize {
        self.snapshots.len() - 1
    }
}

/// The sinusoidal position table: entry `(pos, 2i)` is
/// `sin(pos / 10000^(2i/d))` and `(pos, 2i+1)` the matching cosine.
pub fn sinusoidal_positions(max_len: usize, d_model: usize) -> Result<Matrix, ModelError> {
    if d_model % 2 != 0 {
        return Err(ModelError::OddDModel(d_model));
    }
    Ok(Matrix::from_fn(max_len, d_model, |pos, col| {
        let pair = (col / 2) as f64;
        let angle = pos as f64 / 10000f64.powf(2.0 * pair / d_model as f64);
        if col % 2 == 0 {
            angle.sin()
        } else {
            angle.cos()
        }
    }))
}

const INIT_SCALE: f64 = 0.1;

/// Fresh weights for a config: every learnable entry i.i.d. uniform in
/// `[-0.1, 0.1)` from ChaCha8 seeded with `config.seed`, gains 1, biases 0,
/// positions sinusoidal. Same config, same bits.
pub fn init_weights(config: &ModelConfig) -> Result<ModelWeights, ModelError> {
    config.validate()?;
    let d = config.d_model;
    let mut rng = rng::seeded(config.seed);
    let embedding = rng::uniform_matrix(&mut rng, config.vocab_size, d, INIT_SCALE);
    let mut layers = Vec::with_capacity(config.n_layers);
    for _ in 0..config.n_layers {
        layers.push(LayerWeights {
            wq: rng::uniform_matrix(&mut rng, d, d, INIT_SCALE),
            wk: rng::uniform_matrix(&mut rng, d, d, INIT_SCALE),
            wv: rng::uniform_matrix(&mut rng, d, d, INIT_SCALE),
            wo: rng::uniform_matrix(&mut rng, d, d, INIT_SCALE),
            w1: rng::uniform_matrix(&mut rng, d, config.d_mlp, INIT_SCALE),
            w2: rng::uniform_matrix(&mut rng, config.d_mlp, d, INIT_SCALE),
            ln1_gain: vec![1.0; d],
            ln1_bias: vec![0.0; d],
            ln2_gain: vec![1.0; d],
            ln2_bias: vec![0.0; d],
        });
    }
    let unembedding = rng::uniform_matrix(&mut rng, d, config.vocab_size, INIT_SCALE);
    Ok(ModelWeights {
        embedding,
        positions: sinusoidal_positions(config.max_len, d)?,
        layers,
        final_ln_gain: vec![1.0; d],
        final_ln_bias: vec![0.0; d],
        unembedding,
    })
}

/// Embedded input: row `i` is `E[tokens[i]] + P[i]`.
pub fn embed(tokens: &[usize], w: &ModelWeights) -> Result<Matrix, ModelError> {
    let vocab_size = w.embedding.rows();
    let max_len = w.positions.rows();
    if tokens.len() > max_len {
        return Err(ModelError::SequenceTooLong { len: tokens.len(), max_len });
    }
    let d = w.embedding.cols();
    let mut out = Matrix::zeros(tokens.len(), d);
    for (i, &t) in tokens.iter().enumerate() {
        if t >= vocab_size {
            return Err(ModelError::TokenOutOfRange { id: t, vocab_size });
        }
        for j in 0..d {
            out.set(i, j, w.embedding.get(t, j) + w.positions.get(i, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn small_config() -> ModelConfig {
        ModelConfig {
            vocab_size: 11,
            d_model: 16,
            n_layers: 2,
            d_mlp: 32,
            max_len: 24,
            mask_mode: MaskMode::Unmasked,
            seed: 42,
            attn_scale: None,
        }
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let cfg = small_config();
        let a = init_weights(&cfg).unwrap();
        let b = init_weights(&cfg).unwrap();
        assert_eq!(a, b);

        let mut cfg2 = cfg.clone();
        cfg2.seed = 43;
        let c = init_weights(&cfg2).unwrap();
        assert_ne!(a.embedding, c.embedding);
    }

    #[test]
    fn init_shapes_follow_config() {
        let w = init_weights(&small_config()).unwrap();
        assert_eq!(w.embedding.rows(), 11);
        assert_eq!(w.embedding.cols(), 16);
        assert_eq!(w.positions.rows(), 24);
        assert_eq!(w.layers.len(), 2);
        assert_eq!(w.layers[0].w1.cols(), 32);
        assert_eq!(w.unembedding.cols(), 11);
        assert!(w.layers.iter().all(|l| l.ln1_gain.iter().all(|&g| g == 1.0)));
    }

    #[test]
    fn sinusoidal_row_zero_alternates_zero_one() {
        let p = sinusoidal_positions(4, 6).unwrap();
        assert_eq!(p.row(0), &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn sinusoidal_rejects_odd_width() {
        assert!(matches!(sinusoidal_positions(4, 5), Err(ModelError::OddDModel(5))));
    }

    #[test]
    fn sinusoidal_dot_products_are_translation_invariant() {
        let p = sinusoidal_positions(64, 32).unwrap();
        for (a, b, k) in [(0, 5, 10), (3, 7, 40), (11, 2, 20), (30, 31, 16)] {
            let d1 = crate::linalg::dot(p.row(a), p.row(b));
            let d2 = crate::linalg::dot(p.row(a + k), p.row(b + k));
            assert!((d1 - d2).abs() < 1e-6, "offsets ({a},{b}) vs +{k}: {d1} vs {d2}");
        }
    }

    #[test]
    fn sinusoidal_self_similarity_peaks_at_zero_offset() {
        let p = sinusoidal_positions(48, 32).unwrap();
        for a in [0usize, 7, 23, 40] {
            let self_dot = crate::linalg::dot(p.row(a), p.row(a));
            for b in 0..48 {
                if b != a {
                    assert!(self_dot >= crate::linalg::dot(p.row(a), p.row(b)));
                }
            }
        }
    }

    #[test]
    fn embed_empty_and_single() {
        let w = init_weights(&small_config()).unwrap();
        let e = embed(&[], &w).unwrap();
        assert_eq!((e.rows(), e.cols()), (0, 16));

        let one = embed(&[5], &w).unwrap();
        for j in 0..16 {
            assert_eq!(one.get(0, j), w.embedding.get(5, j) + w.positions.get(0, j));
        }
    }

    #[test]
    fn embed_order_matters_through_positions() {
        let w = init_weights(&small_config()).unwrap();
        let ab = embed(&[1, 2], &w).unwrap();
        let ba = embed(&[2, 1], &w).unwrap();
        assert_ne!(ab, ba);
        // the E-parts alone are the same multiset
        for j in 0..16 {
            let e_ab0 = ab.get(0, j) - w.positions.get(0, j);
            let e_ba1 = ba.get(1, j) - w.positions.get(1, j);
            assert!((e_ab0 - e_ba1).abs() < 1e-15);
        }
    }

    #[test]
    fn embed_rejects_bad_input() {
        let w = init_weights(&small_config()).unwrap();
        assert!(matches!(embed(&[11], &w), Err(ModelError::TokenOutOfRange { .. })));
        let long = vec![0usize; 25];
        assert!(matches!(embed(&long, &w), Err(ModelError::SequenceTooLong { .. })));
    }
}
