//! Finite state automata, their state-sequence functions, per-symbol
//! transformation classification, transformation semigroups, and the
//! parallel-scan shortcut evaluation.
//!
//! The convention throughout: words act left to right, so the transformation
//! of `uv` is "do `u`, then do `v`". Symbols and states carry string labels
//! at the API boundary and are indices internally.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AutomataError {
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("unknown state '{0}'")]
    UnknownState(String),
    #[error("duplicate {kind} label '{label}'")]
    DuplicateLabel { kind: &'static str, label: String },
    #[error("transformation image entry {entry} is not a state index below {n_states}")]
    BadImageEntry { entry: usize, n_states: usize },
    #[error("transformations act on different state counts: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("semigroup closure exceeded max_size {max_size} (reached {reached} elements)")]
    ClosureOverflow { max_size: usize, reached: usize },
    #[error("semigroup needs at least one generator")]
    NoGenerators,
    #[error("word '{word}' cannot be split into symbols of the alphabet {alphabet:?}")]
    UnparsableWord { word: String, alphabet: Vec<String> },
    #[error("automaton file: {0}")]
    Format(String),
}

/// A deterministic finite state automaton `(alphabet, states, delta)` with a
/// total transition table.
#[derive(Debug, Clone, PartialEq)]
pub struct Fsa {
    alphabet: Vec<String>,
    states: Vec<String>,
    /// `delta[symbol][state]` = next state, all indices.
    delta: Vec<Vec<usize>>,
}

impl Fsa {
    pub fn new(
        alphabet: Vec<String>,
        states: Vec<String>,
        delta: Vec<Vec<usize>>,
    ) -> Result<Self, AutomataError> {
        check_distinct("symbol", &alphabet)?;
        check_distinct("state", &states)?;
        if delta.len() != alphabet.len() {
            return Err(AutomataError::Format(format!(
                "table has {} symbol rows, alphabet has {}",
                delta.len(),
                alphabet.len()
            )));
        }
        for row in &delta {
            if row.len() != states.len() {
                return Err(AutomataError::Format(format!(
                    "table row has {} entries, expected {}",
                    row.len(),
                    states.len()
                )));
            }
            for &target in row {
                if target >= states.len() {
                    return Err(AutomataError::BadImageEntry { entry: target, n_states: states.len() });
                }
            }
        }
        Ok(Fsa { alphabet, states, delta })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn symbol_index(&self, symbol: &str) -> Result<usize, AutomataError> {
        self.alphabet
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| AutomataError::UnknownSymbol(symbol.to_string()))
    }

    pub fn state_index(&self, state: &str) -> Result<usize, AutomataError> {
        self.states
            .iter()
            .position(|s| s == state)
            .ok_or_else(|| AutomataError::UnknownState(state.to_string()))
    }

    pub fn step(&self, symbol: usize, state: usize) -> usize {
        self.delta[symbol][state]
    }

    /// The transformation `f_sigma: Q -> Q` of one symbol.
    pub fn symbol_transformation(&self, symbol: usize) -> Transformation {
        Transformation { image: self.delta[symbol].clone() }
    }

    /// Splits a word string into symbol indices. Whitespace- or
    /// comma-separated tokens are taken as symbols; a bare string is split
    /// into single characters when every character names a symbol.
    pub fn parse_word(&self, word: &str) -> Result<Vec<usize>, AutomataError> {
        if word.is_empty() {
            return Ok(Vec::new());
        }
        if word.contains(|c: char| c.is_whitespace() || c == ',') {
            return word
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| self.symbol_index(t))
                .collect();
        }
        let by_char: Option<Vec<usize>> = word
            .chars()
            .map(|c| self.alphabet.iter().position(|s| s == &c.to_string()))
            .collect();
        if let Some(indices) = by_char {
            return Ok(indices);
        }
        // fall back: the whole string as a single symbol
        if let Ok(idx) = self.symbol_index(word) {
            return Ok(vec![idx]);
        }
        Err(AutomataError::UnparsableWord { word: word.to_string(), alphabet: self.alphabet.clone() })
    }

    pub fn state_label(&self, index: usize) -> &str {
        &self.states[index]
    }
}

fn check_distinct(kind: &'static str, labels: &[String]) -> Result<(), AutomataError> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(AutomataError::DuplicateLabel { kind, label: l.clone() });
        }
    }
    Ok(())
}

/// Runs the automaton: left-to-right fold of the transition table.
pub fn run(a: &Fsa, q0: usize, input: &[usize]) -> usize {
    input.iter().fold(q0, |q, &sym| a.step(sym, q))
}

/// The state-sequence function: element `i` is the state after consuming
/// `input[0..=i]`. Prefix-coherent by construction.
pub fn state_sequence(a: &Fsa, q0: usize, input: &[usize]) -> Vec<usize> {
    let mut states = Vec::with_capacity(input.len());
    let mut q = q0;
    for &sym in input {
        q = a.step(sym, q);
        states.push(q);
    }
    states
}

/// A total map `Q -> Q`, stored as its image vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transformation {
    image: Vec<usize>,
}

impl Transformation {
    pub fn new(image: Vec<usize>) -> Result<Self, AutomataError> {
        let n = image.len();
        for &e in &image {
            if e >= n {
                return Err(AutomataError::BadImageEntry { entry: e, n_states: n });
            }
        }
        Ok(Transformation { image })
    }

    pub fn identity(n: usize) -> Self {
        Transformation { image: (0..n).collect() }
    }

    pub fn constant(n: usize, target: usize) -> Result<Self, AutomataError> {
        if target >= n {
            return Err(AutomataError::BadImageEntry { entry: target, n_states: n });
        }
        Ok(Transformation { image: vec![target; n] })
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, q: usize) -> usize {
        self.image[q]
    }

    /// `self` first, then `next`: `(self.then(next))(q) = next(self(q))`.
    pub fn then(&self, next: &Transformation) -> Result<Transformation, AutomataError> {
        if self.image.len() != next.image.len() {
            return Err(AutomataError::SizeMismatch(self.image.len(), next.image.len()));
        }
        Ok(Transformation { image: self.image.iter().map(|&q| next.image[q]).collect() })
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(q, &r)| q == r)
    }

    pub fn is_constant(&self) -> bool {
        !self.image.is_empty() && self.image.iter().all(|&r| r == self.image[0])
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.image.len()];
        for &r in &self.image {
            if seen[r] {
                return false;
            }
            seen[r] = true;
        }
        true
    }

    pub fn inverse(&self) -> Option<Transformation> {
        if !self.is_bijection() {
            return None;
        }
        let mut inv = vec![0; self.image.len()];
        for (q, &r) in self.image.iter().enumerate() {
            inv[r] = q;
        }
        Some(Transformation { image: inv })
    }
}

/// How one symbol's row of the machine table acts on the states.
///
/// A reset takes every state to one specific state or leaves all unchanged;
/// a permutation's row lists every state exactly once; identity rows count
/// as both. Mixed is everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolClass {
    pub is_reset: bool,
    pub is_permutation: bool,
    pub is_identity: bool,
}

impl SymbolClass {
    pub fn of(t: &Transformation) -> SymbolClass {
        let is_identity = t.is_identity();
        SymbolClass {
            is_reset: t.is_constant() || is_identity,
            is_permutation: t.is_bijection(),
            is_identity,
        }
    }

    pub fn is_mixed(&self) -> bool {
        !self.is_reset && !self.is_permutation
    }
}

impl fmt::Display for SymbolClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity {
            write!(f, "identity (reset and permutation)")
        } else if self.is_reset {
            write!(f, "reset")
        } else if self.is_permutation {
            write!(f, "permutation")
        } else {
            write!(f, "mixed")
        }
    }
}

/// Classifies one symbol of an automaton.
pub fn classify_symbol(a: &Fsa, symbol: &str) -> Result<SymbolClass, AutomataError> {
    let idx = a.symbol_index(symbol)?;
    Ok(SymbolClass::of(&a.symbol_transformation(idx)))
}

/// The transformation a whole word induces: per-symbol transformations
/// composed in reading order. The empty word is the identity.
pub fn transformation_of(a: &Fsa, input: &[usize]) -> Result<Transformation, AutomataError> {
    let mut t = Transformation::identity(a.n_states());
    for &sym in input {
        t = t.then(&a.symbol_transformation(sym))?;
    }
    Ok(t)
}

/// A composition-closed set of transformations with its generator labels.
/// Element order is deterministic: generators first (deduplicated, in the
/// order given), then products in discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct Semigroup {
    elements: Vec<Transformation>,
    generator_labels: Vec<String>,
}

impl Semigroup {
    pub fn elements(&self) -> &[Transformation] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn generator_labels(&self) -> &[String] {
        &self.generator_labels
    }

    pub fn contains(&self, t: &Transformation) -> bool {
        self.elements.iter().any(|e| e == t)
    }
}

/// Breadth-first closure of `generators` under composition. Aborts with the
/// partial size once the element count would pass `max_size`; the bound
/// matters because `|T|` can reach `|Q|^|Q|`.
pub fn semigroup_closure(
    generators: &[(String, Transformation)],
    max_size: usize,
) -> Result<Semigroup, AutomataError> {
    if generators.is_empty() {
        return Err(AutomataError::NoGenerators);
    }
    let n = generators[0].1.len();
    for (_, g) in generators {
        if g.len() != n {
            return Err(AutomataError::SizeMismatch(n, g.len()));
        }
    }

    let mut elements: Vec<Transformation> = Vec::new();
    let mut seen: HashMap<Transformation, usize> = HashMap::new();
    let push = |elements: &mut Vec<Transformation>,
                    seen: &mut HashMap<Transformation, usize>,
                    t: Transformation|
     -> Result<bool, AutomataError> {
        if seen.contains_key(&t) {
            return Ok(false);
        }
        if elements.len() + 1 > max_size {
            return Err(AutomataError::ClosureOverflow { max_size, reached: elements.len() + 1 });
        }
        seen.insert(t.clone(), elements.len());
        elements.push(t);
        Ok(true)
    };

    for (_, g) in generators {
        push(&mut elements, &mut seen, g.clone())?;
    }

    // Worklist closure: when an element is processed it is composed both
    // ways with everything discovered so far. Every pair is eventually
    // covered because the later-processed member of the pair sees the other.
    let mut next = 0;
    while next < elements.len() {
        let current = elements[next].clone();
        let mut j = 0;
        while j < elements.len() {
            let other = elements[j].clone();
            push(&mut elements, &mut seen, current.then(&other)?)?;
            push(&mut elements, &mut seen, other.then(&current)?)?;
            j += 1;
        }
        next += 1;
    }

    Ok(Semigroup {
        elements,
        generator_labels: generators.iter().map(|(l, _)| l.clone()).collect(),
    })
}

/// Closure of all symbol transformations of an automaton.
pub fn fsa_semigroup(a: &Fsa, max_size: usize) -> Result<Semigroup, AutomataError> {
    let generators: Vec<(String, Transformation)> = a
        .alphabet()
        .iter()
        .enumerate()
        .map(|(i, label)| (label.clone(), a.symbol_transformation(i)))
        .collect();
    semigroup_closure(&generators, max_size)
}

/// True when the closed set is a group: every element a bijection, the
/// identity present, and every element's inverse present.
pub fn is_group(s: &Semigroup) -> bool {
    if !s.elements.iter().all(Transformation::is_bijection) {
        return false;
    }
    let n = match s.elements.first() {
        Some(e) => e.len(),
        None => return false,
    };
    if !s.contains(&Transformation::identity(n)) {
        return false;
    }
    s.elements.iter().all(|e| match e.inverse() {
        Some(inv) => s.contains(&inv),
        None => false,
    })
}

/// Shortcut evaluation of the state-sequence function.
///
/// Lifts each input symbol to its transformation, computes all prefix
/// compositions with an inclusive Hillis-Steele scan (log-depth combine
/// tree; composition is associative and exact on indices, so any bracketing
/// agrees), then applies each prefix transformation to `q0`. Agrees with
/// [`state_sequence`] exactly.
pub fn scan_state_sequence(a: &Fsa, q0: usize, input: &[usize]) -> Result<Vec<usize>, AutomataError> {
    let mut prefix: Vec<Transformation> =
        input.iter().map(|&sym| a.symbol_transformation(sym)).collect();
    let n = prefix.len();
    let mut stride = 1;
    while stride < n {
        // One parallel level: every slot at distance >= stride folds in the
        // composition ending `stride` steps earlier.
        let snapshot = prefix.clone();
        for i in stride..n {
            prefix[i] = snapshot[i - stride].then(&snapshot[i])?;
        }
        stride *= 2;
    }
    Ok(prefix.iter().map(|t| t.apply(q0)).collect())
}

/// The two-state reset automaton: `0` sends every state to `A`, `1` sends
/// every state to `B`.
pub fn reset_automaton() -> Fsa {
    Fsa::new(
        vec!["0".into(), "1".into()],
        vec!["A".into(), "B".into()],
        vec![vec![0, 0], vec![1, 1]],
    )
    .expect("static table")
}

/// The flip-flop: reset-to-A, reset-to-B, and an identity symbol `e`.
pub fn flip_flop() -> Fsa {
    Fsa::new(
        vec!["0".into(), "1".into(), "e".into()],
        vec!["A".into(), "B".into()],
        vec![vec![0, 0], vec![1, 1], vec![0, 1]],
    )
    .expect("static table")
}

/// Modulo-`n` counter with the single generator `+1`.
pub fn cyclic_counter(n: usize) -> Fsa {
    assert!(n >= 1, "cyclic counter needs at least one state");
    let states = (0..n).map(|i| format!("q{i}")).collect();
    let delta = vec![(0..n).map(|i| (i + 1) % n).collect()];
    Fsa::new(vec!["+1".into()], states, delta).expect("static table")
}

pub mod format {
    //! Line-oriented FSA text format:
    //!
    //! ```text
    //! states: A B
    //! alphabet: 0 1
    //! 0: A A
    //! 1: B B
    //! ```
    //!
    //! One line per symbol; the targets line up positionally with the
    //! `states:` line. `#` starts a comment. The parser rejects incomplete
    //! or duplicated tables.

    use super::{AutomataError, Fsa};

    pub fn parse_fsa(text: &str) -> Result<Fsa, AutomataError> {
        let mut states: Option<Vec<String>> = None;
        let mut alphabet: Option<Vec<String>> = None;
        let mut rows: Vec<(String, Vec<String>)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line.split_once(':').ok_or_else(|| {
                AutomataError::Format(format!("line {}: expected 'name: ...'", lineno + 1))
            })?;
            let head = head.trim();
            let items: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            match head {
                "states" => {
                    if states.replace(items).is_some() {
                        return Err(AutomataError::Format("duplicate states line".into()));
                    }
                }
                "alphabet" => {
                    if alphabet.replace(items).is_some() {
                        return Err(AutomataError::Format("duplicate alphabet line".into()));
                    }
                }
                symbol => rows.push((symbol.to_string(), items)),
            }
        }

        let states = states.ok_or_else(|| AutomataError::Format("missing states line".into()))?;
        let alphabet = alphabet.ok_or_else(|| AutomataError::Format("missing alphabet line".into()))?;
        if states.is_empty() {
            return Err(AutomataError::Format("states line is empty".into()));
        }

        let mut delta: Vec<Option<Vec<usize>>> = vec![None; alphabet.len()];
        for (symbol, targets) in rows {
            let sym_idx = alphabet
                .iter()
                .position(|s| s == &symbol)
                .ok_or(AutomataError::UnknownSymbol(symbol.clone()))?;
            if targets.len() != states.len() {
                return Err(AutomataError::Format(format!(
                    "symbol '{symbol}' lists {} targets for {} states",
                    targets.len(),
                    states.len()
                )));
            }
            let row = targets
                .iter()
                .map(|t| {
                    states
                        .iter()
                        .position(|s| s == t)
                        .ok_or_else(|| AutomataError::UnknownState(t.clone()))
                })
                .collect::<Result<Vec<usize>, _>>()?;
            if delta[sym_idx].replace(row).is_some() {
                return Err(AutomataError::Format(format!("symbol '{symbol}' defined twice")));
            }
        }
        let delta = delta
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.ok_or_else(|| {
                    AutomataError::Format(format!("no transition row for symbol '{}'", alphabet[i]))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        Fsa::new(alphabet, states, delta)
    }

    pub fn serialize_fsa(a: &Fsa) -> String {
        let mut out = String::new();
        out.push_str(&format!("states: {}\n", a.states().join(" ")));
        out.push_str(&format!("alphabet: {}\n", a.alphabet().join(" ")));
        for (i, symbol) in a.alphabet().iter().enumerate() {
            let targets: Vec<&str> = a
                .symbol_transformation(i)
                .image()
                .iter()
                .map(|&q| a.state_label(q))
                .collect();
            out.push_str(&format!("{symbol}: {}\n", targets.join(" ")));
        }
        out
    }

    pub(crate) fn strip_comment(line: &str) -> &str {
        match line.find('#') {
            Some(idx) => &line[..idx],
            None => line,
        }
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn parse_round_trip() {
            let a = super::super::flip_flop();
            let text = serialize_fsa(&a);
            assert_eq!(parse_fsa(&text).unwrap(), a);
        }

        #[test]
        fn parser_rejects_incomplete_table() {
            let text = "states: A B\nalphabet: 0 1\n0: A A\n";
            let err = parse_fsa(text).unwrap_err();
            assert!(matches!(err, AutomataError::Format(_)), "{err}");
        }

        #[test]
        fn parser_rejects_unknown_target_and_short_rows() {
            assert!(parse_fsa("states: A B\nalphabet: 0\n0: A C\n").is_err());
            assert!(parse_fsa("states: A B\nalphabet: 0\n0: A\n").is_err());
        }

        #[test]
        fn comments_and_blank_lines_are_ignored() {
            let text = "# reset automaton\nstates: A B\n\nalphabet: 0 1\n0: A A # reset to A\n1: B B\n";
            let a = parse_fsa(text).unwrap();
            assert_eq!(a, super::super::reset_automaton());
        }
    }
}
