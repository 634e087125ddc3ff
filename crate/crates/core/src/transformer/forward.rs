//! The forward pass: attention and MLP blocks, residual wiring, decoding.

use crate::linalg::{gelu, layer_norm, matmul, row_softmax, Matrix};

use super::{embed, MaskMode, ModelConfig, ModelError, ModelWeights, ResidualTrace, LN_EPS};

/// Single-head self-attention with the mask applied per `mask_mode`.
///
/// Scores are `(x Wq)(x Wk)^T` scaled by `attn_scale`; the weighted values
/// are projected by `Wo` and returned for the caller to add back to the
/// residual stream. The `-inf` sentinel exists only between the masking step
/// and `row_softmax`, never in the output.
pub fn attention_block(
    x: &Matrix,
    layer: &super::LayerWeights,
    mask_mode: MaskMode,
    attn_scale: f64,
) -> Result<Matrix, ModelError> {
    if x.cols() != layer.wq.rows() {
        return Err(ModelError::WidthMismatch { expected: layer.wq.rows(), got: x.cols() });
    }
    let q = matmul(x, &layer.wq)?;
    let k = matmul(x, &layer.wk)?;
    let mut scores = matmul(&q, &k.transpose())?.scale(attn_scale);

    let n = scores.rows();
    match mask_mode {
        MaskMode::Unmasked => {}
        MaskMode::NegInfPreSoftmax => {
            for i in 0..n {
                for j in i + 1..n {
                    scores.set(i, j, f64::NEG_INFINITY);
                }
            }
        }
        MaskMode::ZeroPreSoftmax => {
            for i in 0..n {
                for j in i + 1..n {
                    scores.set(i, j, 0.0);
                }
            }
        }
        MaskMode::PostSoftmaxZero => {}
    }

    let mut weights = row_softmax(&scores)?;
    if mask_mode == MaskMode::PostSoftmaxZero {
        // Cut the future out of the mixture without renormalizing.
        for i in 0..n {
            for j in i + 1..n {
                weights.set(i, j, 0.0);
            }
        }
    }

    let values = matmul(x, &layer.wv)?;
    let mixed = matmul(&weights, &values)?;
    Ok(matmul(&mixed, &layer.wo)?)
}

/// Position-wise feedforward: `gelu(x W1) W2`, returned for residual addition.
pub fn mlp_block(x: &Matrix, layer: &super::LayerWeights) -> Result<Matrix, ModelError> {
    if x.cols() != layer.w1.rows() {
        return Err(ModelError::WidthMismatch { expected: layer.w1.rows(), got: x.cols() });
    }
    Ok(matmul(&gelu(&matmul(x, &layer.w1)?), &layer.w2)?)
}

/// Forward pass from an already-embedded input matrix.
///
/// Pre-norm residual blocks: `x += attn(ln(x)); x += mlp(ln(x))`, one
/// snapshot after each full block, then `logits = ln(x) U`.
pub fn forward_embedded(
    x0: Matrix,
    w: &ModelWeights,
    cfg: &ModelConfig,
) -> Result<ResidualTrace, ModelError> {
    if x0.cols() != cfg.d_model {
        return Err(ModelError::WidthMismatch { expected: cfg.d_model, got: x0.cols() });
    }
    let scale = cfg.effective_attn_scale();
    let mut snapshots = Vec::with_capacity(w.layers.len() + 1);
    let mut x = x0;
    snapshots.push(x.clone());
    for layer in &w.layers {
        let normed = layer_norm(&x, &layer.ln1_gain, &layer.ln1_bias, LN_EPS)?;
        x = x.add(&attention_block(&normed, layer, cfg.mask_mode, scale)?)?;
        let normed = layer_norm(&x, &layer.ln2_gain, &layer.ln2_bias, LN_EPS)?;
        x = x.add(&mlp_block(&normed, layer)?)?;
        snapshots.push(x.clone());
    }
    let final_norm = layer_norm(&x, &w.final_ln_gain, &w.final_ln_bias, LN_EPS)?;
    let logits = matmul(&final_norm, &w.unembedding)?;
    Ok(ResidualTrace { snapshots, logits })
}

/// Embed `tokens` and run [`forward_embedded`].
pub fn forward(tokens: &[usize], w: &ModelWeights, cfg: &ModelConfig) -> Result<ResidualTrace, ModelError> {
    forward_embedded(embed(tokens, w)?, w, cfg)
}

/// Per-row argmax over the logits; ties go to the lowest token id.
pub fn decode_top(trace: &ResidualTrace) -> Vec<usize> {
    let logits = &trace.logits;
    (0..logits.rows())
        .map(|i| {
            let row = logits.row(i);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}
