//! Plain-text weight container.
//!
//! Layout: a version line, a `config` line, an optional `vocab` line, then
//! one `matrix NAME ROWS COLS` header per tensor followed by its rows.
//! Floats are written with Rust's shortest round-trip formatting, so
//! save/load is lossless bit for bit. Layer-norm vectors are stored as
//! 1-row matrices.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::linalg::Matrix;

use super::{LayerWeights, MaskMode, ModelConfig, ModelError, ModelWeights};

const MAGIC: &str = "traceline-weights v1";

/// A config + weights bundle, with an optional token-label table (used by
/// hand-constructed models whose vocabulary has meaningful names).
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub config: ModelConfig,
    pub weights: ModelWeights,
    pub vocab: Option<Vec<String>>,
}

fn write_matrix(out: &mut String, name: &str, m: &Matrix) {
    let _ = writeln!(out, "matrix {name} {} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row = m
            .row(i)
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "{row}");
    }
}

fn vec_as_matrix(v: &[f64]) -> Matrix {
    Matrix::from_vec(1, v.len(), v.to_vec()).expect("1xN shape")
}

/// Serializes a model to the textual container format.
pub fn save_weights(model: &SavedModel) -> String {
    let cfg = &model.config;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let scale = match cfg.attn_scale {
        Some(s) => format!("{s}"),
        None => "default".to_string(),
    };
    let _ = writeln!(
        out,
        "config vocab_size={} d_model={} n_layers={} d_mlp={} max_len={} mask_mode={} seed={} attn_scale={}",
        cfg.vocab_size, cfg.d_model, cfg.n_layers, cfg.d_mlp, cfg.max_len, cfg.mask_mode, cfg.seed, scale
    );
    if let Some(vocab) = &model.vocab {
        let _ = writeln!(out, "vocab {}", vocab.join(" "));
    }
    let w = &model.weights;
    write_matrix(&mut out, "E", &w.embedding);
    write_matrix(&mut out, "P", &w.positions);
    for (i, layer) in w.layers.iter().enumerate() {
        write_matrix(&mut out, &format!("layer{i}.wq"), &layer.wq);
        write_matrix(&mut out, &format!("layer{i}.wk"), &layer.wk);
        write_matrix(&mut out, &format!("layer{i}.wv"), &layer.wv);
        write_matrix(&mut out, &format!("layer{i}.wo"), &layer.wo);
        write_matrix(&mut out, &format!("layer{i}.w1"), &layer.w1);
        write_matrix(&mut out, &format!("layer{i}.w2"), &layer.w2);
        write_matrix(&mut out, &format!("layer{i}.ln1.gain"), &vec_as_matrix(&layer.ln1_gain));
        write_matrix(&mut out, &format!("layer{i}.ln1.bias"), &vec_as_matrix(&layer.ln1_bias));
        write_matrix(&mut out, &format!("layer{i}.ln2.gain"), &vec_as_matrix(&layer.ln2_gain));
        write_matrix(&mut out, &format!("layer{i}.ln2.bias"), &vec_as_matrix(&layer.ln2_bias));
    }
    write_matrix(&mut out, "final_ln.gain", &vec_as_matrix(&w.final_ln_gain));
    write_matrix(&mut out, "final_ln.bias", &vec_as_matrix(&w.final_ln_bias));
    write_matrix(&mut out, "U", &w.unembedding);
    out
}

fn bad(msg: impl Into<String>) -> ModelError {
    ModelError::Format(msg.into())
}

fn parse_kv<'a>(pairs: &'a HashMap<&str, &str>, key: &str) -> Result<&'a str, ModelError> {
    pairs.get(key).copied().ok_or_else(|| bad(format!("config line is missing {key}")))
}

/// Parses the textual container format back into a model.
pub fn load_weights(text: &str) -> Result<SavedModel, ModelError> {
    let mut lines = text.lines().enumerate();
    let (_, magic) = lines.next().ok_or_else(|| bad("empty weight file"))?;
    if magic.trim() != MAGIC {
        return Err(bad(format!("expected header '{MAGIC}', found '{}'", magic.trim())));
    }
    let (_, config_line) = lines.next().ok_or_else(|| bad("missing config line"))?;
    let config_line = config_line
        .strip_prefix("config ")
        .ok_or_else(|| bad("second line must start with 'config '"))?;
    let pairs: HashMap<&str, &str> = config_line
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect();
    let parse_usize = |key: &str| -> Result<usize, ModelError> {
        parse_kv(&pairs, key)?.parse().map_err(|_| bad(format!("{key} is not a number")))
    };
    let attn_scale = match parse_kv(&pairs, "attn_scale")? {
        "default" => None,
        s => Some(s.parse::<f64>().map_err(|_| bad("attn_scale is not a number"))?),
    };
    let config = ModelConfig {
        vocab_size: parse_usize("vocab_size")?,
        d_model: parse_usize("d_model")?,
        n_layers: parse_usize("n_layers")?,
        d_mlp: parse_usize("d_mlp")?,
        max_len: parse_usize("max_len")?,
        mask_mode: parse_kv(&pairs, "mask_mode")?
            .parse::<MaskMode>()
            .map_err(bad)?,
        seed: parse_kv(&pairs, "seed")?.parse().map_err(|_| bad("seed is not a number"))?,
        attn_scale,
    };

    let mut vocab = None;
    let mut tensors: HashMap<String, Matrix> = HashMap::new();
    let mut pending: Option<(String, usize, usize, Vec<f64>)> = None;
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some((name, rows, cols, data)) = pending.as_mut() {
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| bad(format!("line {}: '{tok}' is not a float", lineno + 1)))?;
                data.push(v);
            }
            if data.len() > *rows * *cols {
                return Err(bad(format!("tensor {name} has more than {rows}x{cols} entries")));
            }
            if data.len() == *rows * *cols {
                let (name, rows, cols, data) = pending.take().expect("pending tensor");
                tensors.insert(name, Matrix::from_vec(rows, cols, data)?);
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("vocab ") {
            vocab = Some(rest.split_whitespace().map(str::to_string).collect());
        } else if let Some(rest) = line.strip_prefix("matrix ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad(format!("line {}: malformed matrix header", lineno + 1)));
            }
            let rows: usize = parts[1].parse().map_err(|_| bad("matrix rows not a number"))?;
            let cols: usize = parts[2].parse().map_err(|_| bad("matrix cols not a number"))?;
            if rows * cols == 0 {
                tensors.insert(parts[0].to_string(), Matrix::zeros(rows, cols));
            } else {
                pending = Some((parts[0].to_string(), rows, cols, Vec::with_capacity(rows * cols)));
            }
        } else {
            return Err(bad(format!("line {}: unexpected content '{line}'", lineno + 1)));
        }
    }
    if let Some((name, ..)) = pending {
        return Err(bad(format!("tensor {name} is truncated")));
    }

    let mut take = |name: String| -> Result<Matrix, ModelError> {
        tensors.remove(&name).ok_or_else(|| bad(format!("missing tensor {name}")))
    };
    let take_vec = |m: Matrix| -> Vec<f64> { m.data().to_vec() };

    let embedding = take("E".into())?;
    let positions = take("P".into())?;
    let mut layers = Vec::with_capacity(config.n_layers);
    for i in 0..config.n_layers {
        layers.push(LayerWeights {
            wq: take(format!("layer{i}.wq"))?,
            wk: take(format!("layer{i}.wk"))?,
            wv: take(format!("layer{i}.wv"))?,
            wo: take(format!("layer{i}.wo"))?,
            w1: take(format!("layer{i}.w1"))?,
            w2: take(format!("layer{i}.w2"))?,
            ln1_gain: take_vec(take(format!("layer{i}.ln1.gain"))?),
            ln1_bias: take_vec(take(format!("layer{i}.ln1.bias"))?),
            ln2_gain: take_vec(take(format!("layer{i}.ln2.gain"))?),
            ln2_bias: take_vec(take(format!("layer{i}.ln2.bias"))?),
        });
    }
    let final_ln_gain = take_vec(take("final_ln.gain".into())?);
    let final_ln_bias = take_vec(take("final_ln.bias".into())?);
    let unembedding = take("U".into())?;
    if !tensors.is_empty() {
        let mut names: Vec<&String> = tensors.keys().collect();
        names.sort();
        return Err(bad(format!("unexpected tensors: {names:?}")));
    }

    let weights = ModelWeights { embedding, positions, layers, final_ln_gain, final_ln_bias, unembedding };
    check_shapes(&config, &weights)?;
    Ok(SavedModel { config, weights, vocab })
}

fn check_shapes(cfg: &ModelConfig, w: &ModelWeights) -> Result<(), ModelError> {
    let d = cfg.d_model;
    let expect = |name: &str, m: &Matrix, rows: usize, cols: usize| -> Result<(), ModelError> {
        if m.rows() != rows || m.cols() != cols {
            return Err(bad(format!(
                "tensor {name} has shape {}x{}, expected {rows}x{cols}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(())
    };
    expect("E", &w.embedding, cfg.vocab_size, d)?;
    expect("P", &w.positions, cfg.max_len, d)?;
    for (i, layer) in w.layers.iter().enumerate() {
        expect(&format!("layer{i}.wq"), &layer.wq, d, d)?;
        expect(&format!("layer{i}.wk"), &layer.wk, d, d)?;
        expect(&format!("layer{i}.wv"), &layer.wv, d, d)?;
        expect(&format!("layer{i}.wo"), &layer.wo, d, d)?;
        expect(&format!("layer{i}.w1"), &layer.w1, d, cfg.d_mlp)?;
        expect(&format!("layer{i}.w2"), &layer.w2, cfg.d_mlp, d)?;
        for (name, v) in [
            ("ln1.gain", &layer.ln1_gain),
            ("ln1.bias", &layer.ln1_bias),
            ("ln2.gain", &layer.ln2_gain),
            ("ln2.bias", &layer.ln2_bias),
        ] {
            if v.len() != d {
                return Err(bad(format!("layer{i}.{name} has length {}, expected {d}", v.len())));
            }
        }
    }
    expect("U", &w.unembedding, d, cfg.vocab_size)?;
    Ok(())
}
