//! Locates the sharpness floor for the reset-shortcut construction: the
//! smallest `beta` at which decoded output matches the automaton exactly,
//! over every word to length 10 plus 2000 random words to length 16.
//! `BETA_FLOOR` in the bridge module records the result.

use rand::Rng;
use traceline_core::bridge::{
    all_words, build_reset_shortcut_model, compare_model_to_fsa, BridgeSpec,
};

fn main() {
    let fsa = BridgeSpec::reset2().to_fsa();
    let words10 = all_words(fsa.alphabet(), 10);
    let mut rng = traceline_core::rng::seeded(999);
    let alphabet = fsa.alphabet().to_vec();
    let words16: Vec<Vec<String>> = (0..2000)
        .map(|_| {
            let len = rng.random_range(1..=16);
            (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())].clone()).collect()
        })
        .collect();
    for beta in [4.0, 6.0, 8.0, 9.0, 10.0, 12.0, 16.0, 20.0, 50.0, 100.0] {
        let mut spec = BridgeSpec::reset2();
        spec.beta = beta;
        let m = build_reset_shortcut_model(&spec).unwrap();
        let a = compare_model_to_fsa(&m.config, &m.weights, &m.vocab, &fsa, "A", &words10).unwrap();
        let b = compare_model_to_fsa(&m.config, &m.weights, &m.vocab, &fsa, "A", &words16).unwrap();
        println!(
            "beta={beta:5.1}  exhaustive len<=10: {}/{}  random len<=16: {}/{}",
            a.words_matched,
            words10.len(),
            b.words_matched,
            words16.len()
        );
    }
}
