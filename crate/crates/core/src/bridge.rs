//! Hand-constructed transformer weights that compute the state-sequence
//! function of a reset automaton in a single masked attention block.
//!
//! The construction gives every key a score `beta * is_reset + gamma * pos`,
//! so after the row softmax the most recent reset token dominates each row's
//! mixture. Values carry a one-hot of the state a symbol resets to; the
//! unembedding reads that channel back out, with a small standing bias on
//! the initial state's token so that rows with no reset in scope decode the
//! initial state. Correctness is defined at the decoded-argmax level.
//!
//! Layer norm sits in front of the attention branch, so the embedding is
//! engineered to give every row the same mean and variance: the position
//! scalar appears in a +/- pair, a complement channel mirrors the reset
//! one-hot, and score/value reads go through zero-column-sum weight matrices
//! (balanced against an always-zero pad channel). Standardization then
//! reduces to one global affine map, which softmax ordering and argmax both
//! survive.

use thiserror::Error;

use crate::automata::{state_sequence, AutomataError, Fsa};
use crate::linalg::Matrix;
use crate::transformer::{
    decode_top, forward, MaskMode, ModelConfig, ModelError, ModelWeights, SavedModel,
};

/// Reset-bonus floor for exact decoding, fixed by sweep (see
/// `examples/beta_sweep.rs`): over all words to length 10 and 2000 random
/// words to length 16, decoding first breaks at beta = 8 and is exact from
/// beta = 9 upward. 12 keeps a margin; the default stays far above it.
pub const BETA_FLOOR: f64 = 12.0;
pub const DEFAULT_BETA: f64 = 100.0;

/// Per-position score increment (`gamma * pos_step`) is 1.0: the position
/// channel steps by `POS_STEP` and the key read scales it by `POS_GAIN`.
const POS_STEP: f64 = 1e-3;
const POS_GAIN: f64 = 1e3;

/// Logit gain on the state channel and the standing initial-state bias.
const STATE_GAIN: f64 = 10.0;
const INIT_BIAS: f64 = 3.0;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("invalid bridge spec: {0}")]
    InvalidSpec(String),
    #[error("model vocabulary is missing label '{0}'")]
    VocabMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
}

/// Recipe for a reset-automaton emulator: which symbols reset to which
/// states, the identity symbol, the state decoded before any reset has been
/// seen, and the attention sharpness.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeSpec {
    /// (symbol, target state); targets must be distinct.
    pub resets: Vec<(String, String)>,
    pub identity_symbol: String,
    pub initial_state: String,
    pub beta: f64,
    pub max_len: usize,
}

impl BridgeSpec {
    /// The two-state reset automaton with an identity symbol: `0 -> A`,
    /// `1 -> B`, identity `e`, starting at `A`.
    pub fn reset2() -> Self {
        BridgeSpec {
            resets: vec![("0".into(), "A".into()), ("1".into(), "B".into())],
            identity_symbol: "e".into(),
            initial_state: "A".into(),
            beta: DEFAULT_BETA,
            max_len: 64,
        }
    }

    pub fn validate(&self) -> Result<(), BridgeError> {
        if self.resets.is_empty() {
            return Err(BridgeError::InvalidSpec("need at least one reset symbol".into()));
        }
        let mut symbols: Vec<&String> = self.resets.iter().map(|(s, _)| s).collect();
        symbols.push(&self.identity_symbol);
        let mut seen = std::collections::HashSet::new();
        for s in symbols {
            if !seen.insert(s) {
                return Err(BridgeError::InvalidSpec(format!("symbol '{s}' appears twice")));
            }
        }
        let mut states = std::collections::HashSet::new();
        for (_, st) in &self.resets {
            if !states.insert(st) {
                return Err(BridgeError::InvalidSpec(format!(
                    "reset symbols must map onto distinct states; '{st}' repeats"
                )));
            }
        }
        if !self.resets.iter().any(|(_, st)| st == &self.initial_state) {
            return Err(BridgeError::InvalidSpec(format!(
                "initial state '{}' is not a reset target",
                self.initial_state
            )));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(BridgeError::InvalidSpec(format!("beta must be positive, got {}", self.beta)));
        }
        if self.max_len == 0 {
            return Err(BridgeError::InvalidSpec("max_len must be >= 1".into()));
        }
        Ok(())
    }

    /// The automaton this model is built to emulate.
    pub fn to_fsa(&self) -> Fsa {
        let n = self.resets.len();
        let mut alphabet: Vec<String> = self.resets.iter().map(|(s, _)| s.clone()).collect();
        alphabet.push(self.identity_symbol.clone());
        let states: Vec<String> = self.resets.iter().map(|(_, st)| st.clone()).collect();
        let mut delta: Vec<Vec<usize>> = (0..n).map(|j| vec![j; n]).collect();
        delta.push((0..n).collect()); // identity row
        Fsa::new(alphabet, states, delta).expect("spec validated")
    }
}

/// A built emulator: ordinary model weights plus the label table that maps
/// automaton symbols and states onto token ids.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeModel {
    pub config: ModelConfig,
    pub weights: ModelWeights,
    /// Reset symbols, then the identity symbol, then one token per state.
    pub vocab: Vec<String>,
    pub spec: BridgeSpec,
}

impl BridgeModel {
    pub fn token_id(&self, label: &str) -> Option<usize> {
        self.vocab.iter().position(|v| v == label)
    }

    pub fn saved(&self) -> SavedModel {
        SavedModel {
            config: self.config.clone(),
            weights: self.weights.clone(),
            vocab: Some(self.vocab.clone()),
        }
    }
}

/// Builds the one-block masked emulator for a reset automaton.
///
/// Channel layout (`k` reset symbols, `d_model = 2k + 6`):
/// symbol one-hot (`k+1`), a constant-one channel, the +/- position pair,
/// state one-hot (`k`), a reset-complement channel, and the zero pad channel
/// that absorbs balancing weight entries.
pub fn build_reset_shortcut_model(spec: &BridgeSpec) -> Result<BridgeModel, BridgeError> {
    spec.validate()?;
    let k = spec.resets.len();
    let d = 2 * k + 6;
    let vocab_size = 2 * k + 1;

    let ch_one = k + 1;
    let ch_pos_plus = k + 2;
    let ch_pos_minus = k + 3;
    let ch_state = |j: usize| k + 4 + j;
    let ch_complement = 2 * k + 4;
    let ch_pad = 2 * k + 5;

    let mut vocab: Vec<String> = spec.resets.iter().map(|(s, _)| s.clone()).collect();
    vocab.push(spec.identity_symbol.clone());
    vocab.extend(spec.resets.iter().map(|(_, st)| st.clone()));

    // token embedding: symbol rows are engineered, state-token rows stay zero
    let mut embedding = Matrix::zeros(vocab_size, d);
    for j in 0..k {
        embedding.set(j, j, 1.0);
        embedding.set(j, ch_one, 1.0);
        embedding.set(j, ch_state(j), 1.0);
    }
    embedding.set(k, k, 1.0);
    embedding.set(k, ch_one, 1.0);
    embedding.set(k, ch_complement, 1.0);

    // positions: antisymmetric pair, so row sums stay put while a monotone
    // scalar is still linearly readable
    let mut positions = Matrix::zeros(spec.max_len, d);
    for i in 0..spec.max_len {
        let v = POS_STEP * (i as f64 + 1.0);
        positions.set(i, ch_pos_plus, v);
        positions.set(i, ch_pos_minus, -v);
    }

    // query: a constant vector for every row, read off the one-channel
    let mut wq = Matrix::zeros(d, d);
    wq.set(ch_one, 0, 1.0);

    // key score: beta per reset one-hot + gamma * position, balanced to a
    // zero column sum through the pad channel so standardization offsets
    // cancel
    let mut wk = Matrix::zeros(d, d);
    for j in 0..k {
        wk.set(ch_state(j), 0, spec.beta);
    }
    wk.set(ch_pos_plus, 0, POS_GAIN);
    wk.set(ch_pad, 0, -(k as f64 * spec.beta + POS_GAIN));

    // values: pass the state one-hot through, zero-sum per column
    let mut wv = Matrix::zeros(d, d);
    for j in 0..k {
        wv.set(ch_state(j), ch_state(j), 1.0);
        wv.set(ch_pad, ch_state(j), -1.0);
    }

    let wo = Matrix::identity(d);

    let layer = crate::transformer::LayerWeights {
        wq,
        wk,
        wv,
        wo,
        w1: Matrix::zeros(d, 1),
        w2: Matrix::zeros(1, d),
        ln1_gain: vec![1.0; d],
        ln1_bias: vec![0.0; d],
        ln2_gain: vec![1.0; d],
        ln2_bias: vec![0.0; d],
    };

    // unembedding: state tokens read their state channel, the initial state
    // gets a standing bias from the one-channel, and every column sums to
    // zero so the final layer norm's shift drops out of the argmax
    let mut unembedding = Matrix::zeros(d, vocab_size);
    let initial_idx = spec
        .resets
        .iter()
        .position(|(_, st)| st == &spec.initial_state)
        .expect("validated initial state");
    for j in 0..k {
        let col = k + 1 + j;
        unembedding.set(ch_state(j), col, STATE_GAIN);
        let mut colsum = STATE_GAIN;
        if j == initial_idx {
            unembedding.set(ch_one, col, INIT_BIAS);
            colsum += INIT_BIAS;
        }
        unembedding.set(ch_pad, col, -colsum);
    }

    let config = ModelConfig {
        vocab_size,
        d_model: d,
        n_layers: 1,
        d_mlp: 1,
        max_len: spec.max_len,
        mask_mode: MaskMode::NegInfPreSoftmax,
        seed: 0,
        attn_scale: Some(1.0),
    };
    let weights = ModelWeights {
        embedding,
        positions,
        layers: vec![layer],
        final_ln_gain: vec![1.0; d],
        final_ln_bias: vec![0.0; d],
        unembedding,
    };
    Ok(BridgeModel { config, weights, vocab, spec: spec.clone() })
}

/// Decodes a word through the model: forward pass, top token per row, token
/// labels back out.
pub fn decode_word(model: &BridgeModel, word: &[String]) -> Result<Vec<String>, BridgeError> {
    let tokens: Vec<usize> = word
        .iter()
        .map(|s| model.token_id(s).ok_or_else(|| BridgeError::VocabMismatch(s.clone())))
        .collect::<Result<_, _>>()?;
    let trace = forward(&tokens, &model.weights, &model.config)?;
    Ok(decode_top(&trace)
        .into_iter()
        .map(|id| model.vocab[id].clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordResult {
    pub word: Vec<String>,
    pub matched: bool,
    pub first_mismatch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub results: Vec<WordResult>,
    pub words_matched: usize,
    pub positions_matched: usize,
    pub total_positions: usize,
}

impl CompareReport {
    /// Positionwise accuracy over all compared words.
    pub fn accuracy(&self) -> f64 {
        if self.total_positions == 0 {
            return 1.0;
        }
        self.positions_matched as f64 / self.total_positions as f64
    }

    pub fn all_matched(&self) -> bool {
        self.results.iter().all(|r| r.matched)
    }
}

/// Runs every word through the model and through the automaton's serial
/// state sequence, comparing decoded tokens against state labels position by
/// position. Any model over the right vocabulary can be compared; a
/// mismatch is reported, never an error.
pub fn compare_model_to_fsa(
    config: &ModelConfig,
    weights: &ModelWeights,
    vocab: &[String],
    fsa: &Fsa,
    q0_label: &str,
    words: &[Vec<String>],
) -> Result<CompareReport, BridgeError> {
    let token_of = |label: &str| -> Result<usize, BridgeError> {
        vocab
            .iter()
            .position(|v| v == label)
            .ok_or_else(|| BridgeError::VocabMismatch(label.to_string()))
    };
    // the vocabulary must cover both the alphabet and the state labels
    for sym in fsa.alphabet() {
        token_of(sym)?;
    }
    let state_tokens: Vec<usize> = fsa
        .states()
        .iter()
        .map(|st| token_of(st))
        .collect::<Result<_, _>>()?;
    let q0 = fsa.state_index(q0_label)?;

    let mut results = Vec::with_capacity(words.len());
    let mut words_matched = 0;
    let mut positions_matched = 0;
    let mut total_positions = 0;
    for word in words {
        let syms: Vec<usize> = word
            .iter()
            .map(|s| fsa.symbol_index(s))
            .collect::<Result<_, _>>()?;
        let tokens: Vec<usize> = word.iter().map(|s| token_of(s)).collect::<Result<_, _>>()?;
        let expected: Vec<usize> = state_sequence(fsa, q0, &syms)
            .into_iter()
            .map(|q| state_tokens[q])
            .collect();
        let decoded = decode_top(&forward(&tokens, weights, config)?);

        let first_mismatch = expected
            .iter()
            .zip(&decoded)
            .position(|(e, d)| e != d)
            .or_else(|| {
                if expected.len() != decoded.len() {
                    Some(expected.len().min(decoded.len()))
                } else {
                    None
                }
            });
        let matched = first_mismatch.is_none();
        let correct = expected.iter().zip(&decoded).filter(|(e, d)| e == d).count();
        positions_matched += correct;
        total_positions += expected.len();
        if matched {
            words_matched += 1;
        }
        results.push(WordResult { word: word.clone(), matched, first_mismatch });
    }
    Ok(CompareReport { results, words_matched, positions_matched, total_positions })
}

/// `word,match,first_mismatch_pos` rows, one per compared word. Symbols are
/// joined bare when they are all single characters, otherwise by spaces.
pub fn compare_report_csv(report: &CompareReport) -> String {
    let mut out = String::from("word,match,first_mismatch_pos\n");
    for r in &report.results {
        let sep = if r.word.iter().all(|s| s.chars().count() == 1) { "" } else { " " };
        let word = r.word.join(sep);
        let pos = r.first_mismatch.map(|p| p.to_string()).unwrap_or_default();
        out.push_str(&format!("{word},{},{pos}\n", r.matched));
    }
    out
}

/// Every word over `alphabet` with length in `1..=max_len`.
pub fn all_words(alphabet: &[String], max_len: usize) -> Vec<Vec<String>> {
    let mut words: Vec<Vec<String>> = vec![Vec::new()];
    let mut out = Vec::new();
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(words.len() * alphabet.len());
        for w in &words {
            for s in alphabet {
                let mut w2 = w.clone();
                w2.push(s.clone());
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        words = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn model() -> BridgeModel {
        build_reset_shortcut_model(&BridgeSpec::reset2()).unwrap()
    }

    fn word_of(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    #[test]
    fn decodes_0110_as_abba() {
        let m = model();
        let decoded = decode_word(&m, &word_of("0110")).unwrap();
        assert_eq!(decoded, vec!["A", "B", "B", "A"]);
    }

    #[test]
    fn all_identity_word_decodes_initial_state_everywhere() {
        let m = model();
        let decoded = decode_word(&m, &word_of("eee")).unwrap();
        assert_eq!(decoded, vec!["A", "A", "A"]);
    }

    #[test]
    fn matches_the_automaton_exhaustively_to_length_6() {
        let m = model();
        let fsa = m.spec.to_fsa();
        let words = all_words(fsa.alphabet(), 6);
        let report =
            compare_model_to_fsa(&m.config, &m.weights, &m.vocab, &fsa, "A", &words).unwrap();
        assert!(report.all_matched(), "accuracy {}", report.accuracy());
        assert_eq!(report.words_matched, words.len());
    }

    #[test]
    fn matches_random_long_words() {
        let m = model();
        let fsa = m.spec.to_fsa();
        let mut rng = crate::rng::seeded(404);
        let alphabet = fsa.alphabet().to_vec();
        let words: Vec<Vec<String>> = (0..100)
            .map(|_| {
                let len = rng.random_range(1..=16);
                (0..len)
                    .map(|_| alphabet[rng.random_range(0..alphabet.len())].clone())
                    .collect()
            })
            .collect();
        let report =
            compare_model_to_fsa(&m.config, &m.weights, &m.vocab, &fsa, "A", &words).unwrap();
        assert_eq!(report.accuracy(), 1.0);
    }

    #[test]
    fn decoded_outputs_inherit_the_prefix_property() {
        let m = model();
        let fsa = m.spec.to_fsa();
        for word in all_words(fsa.alphabet(), 5) {
            let full = decode_word(&m, &word).unwrap();
            for n in 0..word.len() {
                let prefix = decode_word(&m, &word[..n]).unwrap();
                assert_eq!(prefix, full[..n].to_vec());
            }
        }
    }

    #[test]
    fn doubling_beta_changes_no_decoded_output() {
        let base = model();
        let mut spec = BridgeSpec::reset2();
        spec.beta *= 2.0;
        let sharper = build_reset_shortcut_model(&spec).unwrap();
        for word in all_words(base.spec.to_fsa().alphabet(), 5) {
            assert_eq!(decode_word(&base, &word).unwrap(), decode_word(&sharper, &word).unwrap());
        }
    }

    #[test]
    fn beta_floor_still_decodes_exactly() {
        let mut spec = BridgeSpec::reset2();
        spec.beta = BETA_FLOOR;
        let m = build_reset_shortcut_model(&spec).unwrap();
        let fsa = m.spec.to_fsa();
        let words = all_words(fsa.alphabet(), 6);
        let report =
            compare_model_to_fsa(&m.config, &m.weights, &m.vocab, &fsa, "A", &words).unwrap();
        assert!(report.all_matched());
    }

    #[test]
    fn random_model_reports_accuracy_without_error() {
        let m = model();
        let fsa = m.spec.to_fsa();
        let mut cfg = m.config.clone();
        cfg.seed = 7;
        let random = crate::transformer::init_weights(&cfg).unwrap();
        let words = vec![word_of("0110"), word_of("ee10")];
        let report = compare_model_to_fsa(&cfg, &random, &m.vocab, &fsa, "A", &words).unwrap();
        assert!(report.accuracy() < 1.0, "random weights should not emulate the automaton");
    }

    #[test]
    fn empty_word_set_gives_empty_report() {
        let m = model();
        let fsa = m.spec.to_fsa();
        let report = compare_model_to_fsa(&m.config, &m.weights, &m.vocab, &fsa, "A", &[]).unwrap();
        assert!(report.results.is_empty());
        assert_eq!(report.accuracy(), 1.0);
        assert_eq!(compare_report_csv(&report), "word,match,first_mismatch_pos\n");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = BridgeSpec::reset2();
        s.resets.clear();
        assert!(build_reset_shortcut_model(&s).is_err());

        let mut s = BridgeSpec::reset2();
        s.resets[1].1 = "A".into();
        assert!(build_reset_shortcut_model(&s).is_err());

        let mut s = BridgeSpec::reset2();
        s.identity_symbol = "0".into();
        assert!(build_reset_shortcut_model(&s).is_err());

        let mut s = BridgeSpec::reset2();
        s.initial_state = "C".into();
        assert!(build_reset_shortcut_model(&s).is_err());

        let mut s = BridgeSpec::reset2();
        s.beta = -1.0;
        assert!(build_reset_shortcut_model(&s).is_err());
    }

    #[test]
    fn vocabulary_mismatch_is_an_error() {
        let m = model();
        let other = Fsa::new(
            vec!["x".into()],
            vec!["A".into()],
            vec![vec![0]],
        )
        .unwrap();
        let err = compare_model_to_fsa(&m.config, &m.weights, &m.vocab, &other, "A", &[]).unwrap_err();
        assert!(matches!(err, BridgeError::VocabMismatch(_)));
    }

    #[test]
    fn three_reset_spec_also_works() {
        let spec = BridgeSpec {
            resets: vec![
                ("x".into(), "P".into()),
                ("y".into(), "Q".into()),
                ("z".into(), "R".into()),
            ],
            identity_symbol: "i".into(),
            initial_state: "Q".into(),
            beta: DEFAULT_BETA,
            max_len: 32,
        };
        let m = build_reset_shortcut_model(&spec).unwrap();
        let fsa = spec.to_fsa();
        let words = all_words(fsa.alphabet(), 4);
        let report =
            compare_model_to_fsa(&m.config, &m.weights, &m.vocab, &fsa, "Q", &words).unwrap();
        assert!(report.all_matched(), "accuracy {}", report.accuracy());
    }
}
