//! Executable verifiers for the residual-stream invariants, plus the
//! positional probes. Each check runs the model the straightforward way on
//! both sides of a claimed equality and reports the worst absolute
//! deviation per block snapshot and at the logits.
//!
//! Every verifier is a pure function of (config, inputs); configs carry the
//! weight seed, so a report is reproducible from its scenario line.

use thiserror::Error;

use crate::linalg::{
    cosine_similarity, matmul, permutation_matrix, row_softmax, LinalgError, Matrix, Permutation,
};
use crate::rng;
use crate::transformer::{
    embed, forward, forward_embedded, init_weights, MaskMode, ModelConfig, ModelError,
    ModelWeights, ResidualTrace,
};

/// Whole-model comparisons: accumulated rounding over a few blocks.
pub const TOL_MODEL: f64 = 1e-9;
/// Single-operation lemmas: a couple of ulps of slack.
pub const TOL_LEMMA: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum InvarianceError {
    #[error("check requires mask mode {expected}, config has {got}")]
    WrongMaskMode { expected: &'static str, got: MaskMode },
    #[error("prefix permutation must fix the last row")]
    PermutationMovesLastRow,
    #[error("permutation acts on {perm} rows, input has {rows}")]
    PermutationLength { perm: usize, rows: usize },
    #[error("prefix-permutation check needs exactly one layer, config has {0}")]
    NeedOneLayer(usize),
    #[error("probe_count {probe_count} exceeds the {max_len} stored positions")]
    ProbeCountTooLarge { probe_count: usize, max_len: usize },
    #[error("{0}")]
    BadParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Deviation record of one scenario: the worst absolute difference at every
/// block snapshot and at the logits, against one tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub scenario: String,
    pub per_block: Vec<f64>,
    pub logit_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl DeviationReport {
    pub fn new(scenario: String, per_block: Vec<f64>, logit_deviation: f64, tolerance: f64) -> Self {
        let pass =
            per_block.iter().all(|&d| d <= tolerance) && logit_deviation <= tolerance;
        DeviationReport { scenario, per_block, logit_deviation, tolerance, pass }
    }

    pub fn max_deviation(&self) -> f64 {
        self.per_block.iter().copied().fold(self.logit_deviation, f64::max)
    }
}

fn trace_deviation(
    scenario: String,
    got: &ResidualTrace,
    expected_snapshots: &[Matrix],
    expected_logits: &Matrix,
    tolerance: f64,
) -> Result<DeviationReport, InvarianceError> {
    let per_block = got
        .snapshots
        .iter()
        .zip(expected_snapshots)
        .map(|(a, b)| a.max_abs_diff(b))
        .collect::<Result<Vec<f64>, _>>()?;
    let logit_deviation = got.logits.max_abs_diff(expected_logits)?;
    Ok(DeviationReport::new(scenario, per_block, logit_deviation, tolerance))
}

/// Permutation invariance of an unmasked model: permuting the rows of the
/// embedded input must permute every snapshot and the logits identically.
pub fn check_permutation_invariance(
    cfg: &ModelConfig,
    tokens: &[usize],
    perm: &Permutation,
) -> Result<DeviationReport, InvarianceError> {
    if cfg.mask_mode != MaskMode::Unmasked {
        return Err(InvarianceError::WrongMaskMode { expected: "unmasked", got: cfg.mask_mode });
    }
    if perm.len() != tokens.len() {
        return Err(InvarianceError::PermutationLength { perm: perm.len(), rows: tokens.len() });
    }
    let w = init_weights(cfg)?;
    let x = embed(tokens, &w)?;
    let plain = forward_embedded(x.clone(), &w, cfg)?;
    let permuted = forward_embedded(perm.apply_to_rows(&x)?, &w, cfg)?;

    let expected_snaps = plain
        .snapshots
        .iter()
        .map(|s| perm.apply_to_rows(s))
        .collect::<Result<Vec<_>, _>>()?;
    let expected_logits = perm.apply_to_rows(&plain.logits)?;
    trace_deviation(
        format!(
            "perm seed={} d={} layers={} len={}",
            cfg.seed,
            cfg.d_model,
            cfg.n_layers,
            tokens.len()
        ),
        &permuted,
        &expected_snaps,
        &expected_logits,
        TOL_MODEL,
    )
}

/// The softmax conjugation lemma: `softmax(P A P^T) = P softmax(A) P^T` for
/// a random matrix. Returns the max absolute deviation.
pub fn check_softmax_lemma(n: usize, seed: u64, perm: &Permutation) -> Result<f64, InvarianceError> {
    if n == 0 {
        return Err(InvarianceError::BadParams("softmax lemma needs n >= 1".into()));
    }
    if perm.len() != n {
        return Err(InvarianceError::PermutationLength { perm: perm.len(), rows: n });
    }
    let a = rng::uniform_matrix(&mut rng::seeded(seed), n, n, 1.0);
    let p = permutation_matrix(perm);
    let pt = p.transpose();

    let conjugated = matmul(&matmul(&p, &a)?, &pt)?;
    let lhs = row_softmax(&conjugated)?;
    let rhs = matmul(&matmul(&p, &row_softmax(&a)?)?, &pt)?;
    Ok(lhs.max_abs_diff(&rhs)?)
}

/// Substring invariance of a masked model: for each prefix length `n`, the
/// forward pass on the prefix alone against the first `n` rows of every
/// snapshot of the full pass. One report per prefix.
pub fn check_substring_invariance(
    cfg: &ModelConfig,
    tokens: &[usize],
) -> Result<Vec<DeviationReport>, InvarianceError> {
    if cfg.mask_mode == MaskMode::Unmasked {
        return Err(InvarianceError::WrongMaskMode { expected: "a masked mode", got: cfg.mask_mode });
    }
    let w = init_weights(cfg)?;
    let full = forward(tokens, &w, cfg)?;
    let mut reports = Vec::with_capacity(tokens.len());
    for n in 1..=tokens.len() {
        let prefix = forward(&tokens[..n], &w, cfg)?;
        let expected_snaps: Vec<Matrix> = full.snapshots.iter().map(|s| s.top_rows(n)).collect();
        let expected_logits = full.logits.top_rows(n);
        reports.push(trace_deviation(
            format!(
                "substring seed={} d={} layers={} mode={} n={}/{}",
                cfg.seed,
                cfg.d_model,
                cfg.n_layers,
                cfg.mask_mode,
                n,
                tokens.len()
            ),
            &prefix,
            &expected_snaps,
            &expected_logits,
            TOL_MODEL,
        )?);
    }
    Ok(reports)
}

/// One point of the marginal-deviation curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub length: usize,
    pub median_marginal_deviation: f64,
}

/// For each length `n`: how much the final snapshot's first `n` rows move
/// when one token is appended, medianed over seeds. Exact mask modes sit at
/// rounding level; the zero-pre-softmax mode shows the shrinking
/// length effect.
pub fn substring_deviation_curve(
    cfg: &ModelConfig,
    seeds: &[u64],
    lengths: &[usize],
) -> Result<Vec<CurvePoint>, InvarianceError> {
    if cfg.mask_mode == MaskMode::Unmasked {
        return Err(InvarianceError::WrongMaskMode { expected: "a masked mode", got: cfg.mask_mode });
    }
    let mut points = Vec::with_capacity(lengths.len());
    for &n in lengths {
        if n + 1 > cfg.max_len {
            return Err(InvarianceError::BadParams(format!(
                "length {n}+1 exceeds max_len {}",
                cfg.max_len
            )));
        }
        let mut deviations = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut run_cfg = cfg.clone();
            run_cfg.seed = seed;
            let w = init_weights(&run_cfg)?;
            let tokens = rng::tokens(&mut rng::seeded(seed ^ 0x746f6b656e73), n + 1, run_cfg.vocab_size);
            let short = forward(&tokens[..n], &w, &run_cfg)?;
            let long = forward(&tokens, &w, &run_cfg)?;
            let dev = short
                .snapshots
                .last()
                .expect("at least the embedding snapshot")
                .max_abs_diff(&long.snapshots.last().expect("snapshots").top_rows(n))?;
            deviations.push(dev);
        }
        points.push(CurvePoint { length: n, median_marginal_deviation: median(&mut deviations) });
    }
    Ok(points)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("deviations are finite"));
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Prefix-permutation check result: the final row must be invariant; the
/// earlier rows generically are not and their deviation is only reported.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixPermReport {
    pub final_row: DeviationReport,
    pub earlier_rows_deviation: f64,
}

/// Masked single-attention-layer model (MLP weights zeroed): permuting the
/// contents of the earlier rows among themselves must leave the final row of
/// the block output unchanged. The mask reads geometric row position only,
/// and the final row sees every position, so its mixture is just reordered.
pub fn check_prefix_permutation(
    cfg: &ModelConfig,
    tokens: &[usize],
    perm: &Permutation,
) -> Result<PrefixPermReport, InvarianceError> {
    if cfg.mask_mode == MaskMode::Unmasked {
        return Err(InvarianceError::WrongMaskMode { expected: "a masked mode", got: cfg.mask_mode });
    }
    if cfg.n_layers != 1 {
        return Err(InvarianceError::NeedOneLayer(cfg.n_layers));
    }
    let len = tokens.len();
    if perm.len() != len {
        return Err(InvarianceError::PermutationLength { perm: perm.len(), rows: len });
    }
    if len == 0 || perm.mapping()[len - 1] != len - 1 {
        return Err(InvarianceError::PermutationMovesLastRow);
    }

    let mut w = init_weights(cfg)?;
    for layer in &mut w.layers {
        layer.w1 = Matrix::zeros(cfg.d_model, cfg.d_mlp);
        layer.w2 = Matrix::zeros(cfg.d_mlp, cfg.d_model);
    }

    let x = embed(tokens, &w)?;
    let plain = forward_embedded(x.clone(), &w, cfg)?;
    let permuted = forward_embedded(perm.apply_to_rows(&x)?, &w, cfg)?;

    let mut final_per_block = Vec::with_capacity(plain.snapshots.len());
    let mut earlier = 0.0f64;
    for (got, base) in permuted.snapshots.iter().zip(&plain.snapshots) {
        let expected = perm.apply_to_rows(base)?;
        final_per_block.push(row_max_abs_diff(got, &expected, len - 1));
        for r in 0..len - 1 {
            earlier = earlier.max(row_max_abs_diff(got, &expected, r));
        }
    }
    let expected_logits = perm.apply_to_rows(&plain.logits)?;
    let final_logits = row_max_abs_diff(&permuted.logits, &expected_logits, len - 1);
    for r in 0..len - 1 {
        earlier = earlier.max(row_max_abs_diff(&permuted.logits, &expected_logits, r));
    }

    let report = DeviationReport::new(
        format!("prefix-perm seed={} d={} len={}", cfg.seed, cfg.d_model, len),
        final_per_block,
        final_logits,
        TOL_MODEL,
    );
    Ok(PrefixPermReport { final_row: report, earlier_rows_deviation: earlier })
}

fn row_max_abs_diff(a: &Matrix, b: &Matrix, row: usize) -> f64 {
    a.row(row)
        .iter()
        .zip(b.row(row))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Positional probe: for every snapshot and every residual row, the position
/// row (among the first `probe_count`) most similar to it, plus the
/// similarity itself. Rows (residual positions) by columns (blocks).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTable {
    pub seq_len: usize,
    pub n_snapshots: usize,
    /// Row-major `[row][snapshot]`: (argmax position index, cosine similarity).
    pub cells: Vec<(usize, f64)>,
}

impl ProbeTable {
    pub fn cell(&self, row: usize, snapshot: usize) -> (usize, f64) {
        self.cells[row * self.n_snapshots + snapshot]
    }
}

/// Cosine similarity of every residual row against the position table,
/// restricted to the first `probe_count` positions.
pub fn position_probe(
    trace: &ResidualTrace,
    w: &ModelWeights,
    probe_count: usize,
) -> Result<ProbeTable, InvarianceError> {
    let max_len = w.positions.rows();
    if probe_count > max_len {
        return Err(InvarianceError::ProbeCountTooLarge { probe_count, max_len });
    }
    if probe_count == 0 {
        return Err(InvarianceError::BadParams("probe_count must be >= 1".into()));
    }
    let seq_len = trace.snapshots[0].rows();
    let n_snapshots = trace.snapshots.len();
    let mut cells = Vec::with_capacity(seq_len * n_snapshots);
    for row in 0..seq_len {
        for snapshot in &trace.snapshots {
            let r = snapshot.row(row);
            let mut best = (0usize, -2.0f64);
            for j in 0..probe_count {
                // zero-norm rows cannot be compared; leave them below any cosine
                let sim = cosine_similarity(r, w.positions.row(j)).unwrap_or(-2.0);
                if sim > best.1 {
                    best = (j, sim);
                }
            }
            cells.push(best);
        }
    }
    Ok(ProbeTable { seq_len, n_snapshots, cells })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionReport {
    pub trials: usize,
    pub near_collisions: usize,
    pub rate: f64,
    pub threshold: f64,
}

/// Samples distinct (token, position) pairs and counts how often the summed
/// vectors `E[t] + P[p]` come within `threshold` of cosine similarity 1.
pub fn collision_scan(
    w: &ModelWeights,
    trials: usize,
    threshold: f64,
    seed: u64,
) -> Result<CollisionReport, InvarianceError> {
    if trials == 0 {
        return Err(InvarianceError::BadParams("trials must be >= 1".into()));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(InvarianceError::BadParams(format!(
            "threshold must lie in (0, 1], got {threshold}"
        )));
    }
    let vocab = w.embedding.rows();
    let max_len = w.positions.rows();
    if vocab * max_len < 2 {
        return Err(InvarianceError::BadParams(
            "need at least two distinct (token, position) pairs".into(),
        ));
    }
    let d = w.embedding.cols();
    let mut rng = rng::seeded(seed);
    let mut hits = 0usize;
    let sum = |t: usize, p: usize| -> Vec<f64> {
        (0..d).map(|j| w.embedding.get(t, j) + w.positions.get(p, j)).collect()
    };
    use rand::Rng;
    for _ in 0..trials {
        let (t1, p1) = (rng.random_range(0..vocab), rng.random_range(0..max_len));
        let (t2, p2) = loop {
            let cand = (rng.random_range(0..vocab), rng.random_range(0..max_len));
            if cand != (t1, p1) {
                break cand;
            }
        };
        let sim = cosine_similarity(&sum(t1, p1), &sum(t2, p2))
            .map_err(InvarianceError::Linalg)?;
        if sim >= 1.0 - threshold {
            hits += 1;
        }
    }
    Ok(CollisionReport {
        trials,
        near_collisions: hits,
        rate: hits as f64 / trials as f64,
        threshold,
    })
}

pub mod csv {
    //! Stable CSV schemas for the verifier outputs. Column order is fixed,
    //! headers mandatory, floats in shortest round-trip scientific form, so
    //! identical runs produce identical bytes.

    use super::{CollisionReport, CurvePoint, DeviationReport, ProbeTable};

    fn fmt(v: f64) -> String {
        format!("{v:e}")
    }

    pub fn deviation_reports(reports: &[DeviationReport]) -> String {
        let mut out = String::from("scenario,block,deviation,tolerance,pass\n");
        for r in reports {
            for (block, &dev) in r.per_block.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.scenario,
                    block,
                    fmt(dev),
                    fmt(r.tolerance),
                    dev <= r.tolerance
                ));
            }
            out.push_str(&format!(
                "{},logits,{},{},{}\n",
                r.scenario,
                fmt(r.logit_deviation),
                fmt(r.tolerance),
                r.logit_deviation <= r.tolerance
            ));
        }
        out
    }

    pub fn curve(points: &[CurvePoint]) -> String {
        let mut out = String::from("length,median_marginal_deviation\n");
        for p in points {
            out.push_str(&format!("{},{}\n", p.length, fmt(p.median_marginal_deviation)));
        }
        out
    }

    pub fn probe(table: &ProbeTable) -> String {
        let mut out = String::from("row,block,argmax_position,similarity\n");
        for row in 0..table.seq_len {
            for block in 0..table.n_snapshots {
                let (pos, sim) = table.cell(row, block);
                out.push_str(&format!("{row},{block},{pos},{}\n", fmt(sim)));
            }
        }
        out
    }

    pub fn collisions(report: &CollisionReport) -> String {
        format!(
            "trials,near_collisions,rate,threshold\n{},{},{},{}\n",
            report.trials,
            report.near_collisions,
            fmt(report.rate),
            fmt(report.threshold)
        )
    }
}
