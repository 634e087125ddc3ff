//! Feedforward cascades of automata, the covering relation, and a catalog of
//! hand-built decomposition witnesses.
//!
//! A cascade is an ordered sequence of components; component `k` reads the
//! input symbol, the states of components `0..k`, and its own state.
//! Updates are synchronous: within one step every component sees the
//! *previous-step* states of the components above it. The delay-line catalog
//! entry pins that choice observably.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::automata::{AutomataError, Fsa, SymbolClass};

#[derive(Debug, Error, PartialEq)]
pub enum CascadeError {
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error("cascade file: {0}")]
    Format(String),
    #[error("joint state has {got} components, cascade has {expected}")]
    JointArity { expected: usize, got: usize },
    #[error("component {component} has no state index {state}")]
    BadJointState { component: usize, state: usize },
    #[error("alphabets differ: {0:?} vs {1:?}")]
    AlphabetMismatch(Vec<String>, Vec<String>),
    #[error("covering map uses unknown label '{0}'")]
    UnknownCoverLabel(String),
    #[error("covering map lists '{0}' twice")]
    DuplicateCoverEntry(String),
}

/// One level of a cascade: its own state set and a transition table indexed
/// by (symbol, upstream joint state, own state).
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeComponent {
    states: Vec<String>,
    /// `table[symbol][upstream][own]` = next own state. `upstream` is the
    /// mixed-radix index over the state sets of all earlier components
    /// (component 0 most significant); for component 0 it is always 0.
    table: Vec<Vec<Vec<usize>>>,
}

impl CascadeComponent {
    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Classifies every (symbol, upstream) row of the component's table.
    pub fn row_classes(&self) -> Vec<SymbolClass> {
        let mut out = Vec::new();
        for sym_rows in &self.table {
            for row in sym_rows {
                let t = crate::automata::Transformation::new(row.clone()).expect("validated table");
                out.push(SymbolClass::of(&t));
            }
        }
        out
    }

    /// Reset / Permutation / Mixed verdict over all rows; identity rows
    /// count toward both pure kinds.
    pub fn kind(&self) -> ComponentKind {
        let classes = self.row_classes();
        if classes.iter().all(|c| c.is_reset) {
            ComponentKind::Reset
        } else if classes.iter().all(|c| c.is_permutation) {
            ComponentKind::Permutation
        } else {
            ComponentKind::Mixed
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Reset,
    Permutation,
    Mixed,
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentKind::Reset => write!(f, "reset"),
            ComponentKind::Permutation => write!(f, "permutation"),
            ComponentKind::Mixed => write!(f, "mixed"),
        }
    }
}

/// An ordered feedforward composition of components over one alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    alphabet: Vec<String>,
    components: Vec<CascadeComponent>,
}

impl Cascade {
    pub fn new(alphabet: Vec<String>, components: Vec<Vec<String>>, tables: Vec<Vec<Vec<Vec<usize>>>>) -> Result<Self, CascadeError> {
        if components.len() != tables.len() {
            return Err(CascadeError::Format("component/table count mismatch".into()));
        }
        let mut upstream_count = 1usize;
        let mut built = Vec::new();
        for (k, (states, table)) in components.into_iter().zip(tables).enumerate() {
            if states.is_empty() {
                return Err(CascadeError::Format(format!("component {k} has no states")));
            }
            if table.len() != alphabet.len() {
                return Err(CascadeError::Format(format!(
                    "component {k}: table covers {} symbols, alphabet has {}",
                    table.len(),
                    alphabet.len()
                )));
            }
            for sym_rows in &table {
                if sym_rows.len() != upstream_count {
                    return Err(CascadeError::Format(format!(
                        "component {k}: expected {upstream_count} upstream rows, found {}",
                        sym_rows.len()
                    )));
                }
                for row in sym_rows {
                    if row.len() != states.len() {
                        return Err(CascadeError::Format(format!(
                            "component {k}: row lists {} targets for {} states",
                            row.len(),
                            states.len()
                        )));
                    }
                    if row.iter().any(|&t| t >= states.len()) {
                        return Err(CascadeError::Format(format!("component {k}: target out of range")));
                    }
                }
            }
            upstream_count *= states.len();
            built.push(CascadeComponent { states, table });
        }
        Ok(Cascade { alphabet, components: built })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn components(&self) -> &[CascadeComponent] {
        &self.components
    }

    pub fn symbol_index(&self, symbol: &str) -> Result<usize, CascadeError> {
        self.alphabet
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| AutomataError::UnknownSymbol(symbol.to_string()).into())
    }

    fn check_joint(&self, joint: &[usize]) -> Result<(), CascadeError> {
        if joint.len() != self.components.len() {
            return Err(CascadeError::JointArity { expected: self.components.len(), got: joint.len() });
        }
        for (k, (&s, comp)) in joint.iter().zip(&self.components).enumerate() {
            if s >= comp.n_states() {
                return Err(CascadeError::BadJointState { component: k, state: s });
            }
        }
        Ok(())
    }

    fn upstream_index(&self, joint: &[usize], k: usize) -> usize {
        let mut idx = 0;
        for j in 0..k {
            idx = idx * self.components[j].n_states() + joint[j];
        }
        idx
    }

    /// One synchronous step: every component reads the previous-step states
    /// of the components before it.
    pub fn step(&self, joint: &[usize], symbol: usize) -> Result<Vec<usize>, CascadeError> {
        self.check_joint(joint)?;
        if symbol >= self.alphabet.len() {
            return Err(AutomataError::UnknownSymbol(format!("#{symbol}")).into());
        }
        let next = self
            .components
            .iter()
            .enumerate()
            .map(|(k, comp)| comp.table[symbol][self.upstream_index(joint, k)][joint[k]])
            .collect();
        Ok(next)
    }

    /// Iterated [`Cascade::step`], one joint state per consumed symbol.
    pub fn state_sequence(&self, joint_q0: &[usize], input: &[usize]) -> Result<Vec<Vec<usize>>, CascadeError> {
        self.check_joint(joint_q0)?;
        let mut out = Vec::with_capacity(input.len());
        let mut joint = joint_q0.to_vec();
        for &sym in input {
            joint = self.step(&joint, sym)?;
            out.push(joint.clone());
        }
        Ok(out)
    }

    /// Tuple label of a joint state, e.g. `(u,b0)`. Single-component
    /// cascades use the bare component label.
    pub fn joint_label(&self, joint: &[usize]) -> String {
        if self.components.len() == 1 {
            return self.components[0].states[joint[0]].clone();
        }
        let parts: Vec<&str> = joint
            .iter()
            .zip(&self.components)
            .map(|(&s, comp)| comp.states[s].as_str())
            .collect();
        format!("({})", parts.join(","))
    }

    /// Parses a joint-state label in the [`Cascade::joint_label`] format.
    pub fn parse_joint_label(&self, label: &str) -> Result<Vec<usize>, CascadeError> {
        let parts: Vec<&str> = if self.components.len() == 1 {
            vec![label]
        } else {
            let inner = label
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| CascadeError::Format(format!("joint state '{label}' is not parenthesized")))?;
            inner.split(',').map(str::trim).collect()
        };
        if parts.len() != self.components.len() {
            return Err(CascadeError::JointArity { expected: self.components.len(), got: parts.len() });
        }
        parts
            .iter()
            .zip(&self.components)
            .map(|(p, comp)| {
                comp.states
                    .iter()
                    .position(|s| s == p)
                    .ok_or_else(|| AutomataError::UnknownState(p.to_string()).into())
            })
            .collect()
    }

    fn enumerate_joints(&self) -> Vec<Vec<usize>> {
        let mut joints = vec![Vec::new()];
        for comp in &self.components {
            let mut next = Vec::with_capacity(joints.len() * comp.n_states());
            for j in &joints {
                for s in 0..comp.n_states() {
                    let mut j2 = j.clone();
                    j2.push(s);
                    next.push(j2);
                }
            }
            joints = next;
        }
        joints
    }
}

/// The ordinary automaton over the product state space, with transitions
/// induced by [`Cascade::step`]. State labels are the joint tuple labels.
pub fn flatten(c: &Cascade) -> Fsa {
    let joints = c.enumerate_joints();
    let labels: Vec<String> = joints.iter().map(|j| c.joint_label(j)).collect();
    let index_of: HashMap<&[usize], usize> =
        joints.iter().enumerate().map(|(i, j)| (j.as_slice(), i)).collect();
    let delta: Vec<Vec<usize>> = (0..c.alphabet.len())
        .map(|sym| {
            joints
                .iter()
                .map(|j| {
                    let next = c.step(j, sym).expect("validated cascade");
                    index_of[next.as_slice()]
                })
                .collect()
        })
        .collect();
    Fsa::new(c.alphabet.clone(), labels, delta).expect("flattened cascade is a valid table")
}

/// Surjective partial map from Y-states to X-states, stored by label.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringMap {
    entries: Vec<(String, String)>,
}

impl CoveringMap {
    pub fn new(entries: Vec<(String, String)>) -> Result<Self, CascadeError> {
        let mut seen = HashSet::new();
        for (from, _) in &entries {
            if !seen.insert(from.clone()) {
                return Err(CascadeError::DuplicateCoverEntry(from.clone()));
            }
        }
        Ok(CoveringMap { entries })
    }

    pub fn identity(a: &Fsa) -> Self {
        CoveringMap {
            entries: a.states().iter().map(|s| (s.clone(), s.clone())).collect(),
        }
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, from: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(f, _)| f == from)
            .map(|(_, to)| to.as_str())
    }

    /// `other` after `self`: a map Z -> X from `self`: Z -> Y and
    /// `other`: Y -> X, defined where both legs are.
    pub fn compose(&self, other: &CoveringMap) -> CoveringMap {
        let entries = self
            .entries
            .iter()
            .filter_map(|(z, y)| other.get(y).map(|x| (z.clone(), x.to_string())))
            .collect();
        CoveringMap { entries }
    }
}

/// Why a covering check failed, with the witnessing pair where one exists.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverFailure {
    /// Some X-state is never hit by the map.
    NotSurjective { missing: String },
    /// A domain state steps outside the domain.
    DomainEscape { symbol: String, from: String, to: String },
    /// The commuting equation fails at this (symbol, state).
    Mismatch { symbol: String, from: String, expected: String, got: String },
}

impl fmt::Display for CoverFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverFailure::NotSurjective { missing } => {
                write!(f, "map is not surjective: state '{missing}' is never hit")
            }
            CoverFailure::DomainEscape { symbol, from, to } => write!(
                f,
                "domain is not closed: '{from}' steps to '{to}' on '{symbol}', outside the map"
            ),
            CoverFailure::Mismatch { symbol, from, expected, got } => write!(
                f,
                "commuting fails at ('{symbol}', '{from}'): target steps to '{expected}' but the map sends the source step to '{got}'"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverReport {
    pub holds: bool,
    pub failure: Option<CoverFailure>,
}

impl CoverReport {
    fn ok() -> Self {
        CoverReport { holds: true, failure: None }
    }

    fn fail(failure: CoverFailure) -> Self {
        CoverReport { holds: false, failure: Some(failure) }
    }
}

/// Checks that `map` witnesses "`y` covers `x`": it is surjective onto the
/// states of `x`, its domain is closed under the transitions of `y`, and
/// stepping commutes with the map for every symbol and every domain state.
/// A failed check carries the witnessing counterexample.
pub fn check_covering(y: &Fsa, x: &Fsa, map: &CoveringMap) -> Result<CoverReport, CascadeError> {
    let y_syms: HashSet<&String> = y.alphabet().iter().collect();
    let x_syms: HashSet<&String> = x.alphabet().iter().collect();
    if y_syms != x_syms {
        return Err(CascadeError::AlphabetMismatch(y.alphabet().to_vec(), x.alphabet().to_vec()));
    }

    // resolve labels up front; unknown labels are usage errors, not failures
    let mut dom: Vec<(usize, usize)> = Vec::with_capacity(map.entries().len());
    for (from, to) in map.entries() {
        let qy = y.state_index(from).map_err(|_| CascadeError::UnknownCoverLabel(from.clone()))?;
        let qx = x.state_index(to).map_err(|_| CascadeError::UnknownCoverLabel(to.clone()))?;
        dom.push((qy, qx));
    }
    let image: HashSet<usize> = dom.iter().map(|&(_, qx)| qx).collect();
    for (qx, label) in x.states().iter().enumerate() {
        if !image.contains(&qx) {
            return Ok(CoverReport::fail(CoverFailure::NotSurjective { missing: label.clone() }));
        }
    }

    let phi: HashMap<usize, usize> = dom.iter().copied().collect();
    for symbol in x.alphabet() {
        let sy = y.symbol_index(symbol)?;
        let sx = x.symbol_index(symbol)?;
        for &(qy, qx) in &dom {
            let qy_next = y.step(sy, qy);
            let qx_next = x.step(sx, qx);
            match phi.get(&qy_next) {
                None => {
                    return Ok(CoverReport::fail(CoverFailure::DomainEscape {
                        symbol: symbol.clone(),
                        from: y.state_label(qy).to_string(),
                        to: y.state_label(qy_next).to_string(),
                    }))
                }
                Some(&mapped) if mapped != qx_next => {
                    return Ok(CoverReport::fail(CoverFailure::Mismatch {
                        symbol: symbol.clone(),
                        from: y.state_label(qy).to_string(),
                        expected: x.state_label(qx_next).to_string(),
                        got: x.state_label(mapped).to_string(),
                    }))
                }
                Some(_) => {}
            }
        }
    }
    Ok(CoverReport::ok())
}

/// Componentwise product of two automata over the same alphabet (same
/// symbols in the same order). Tuple state labels.
pub fn direct_product(a: &Fsa, b: &Fsa) -> Result<Fsa, CascadeError> {
    if a.alphabet() != b.alphabet() {
        return Err(CascadeError::AlphabetMismatch(a.alphabet().to_vec(), b.alphabet().to_vec()));
    }
    let mut labels = Vec::with_capacity(a.n_states() * b.n_states());
    for sa in a.states() {
        for sb in b.states() {
            labels.push(format!("({sa},{sb})"));
        }
    }
    let delta = (0..a.alphabet().len())
        .map(|sym| {
            let mut row = Vec::with_capacity(labels.len());
            for qa in 0..a.n_states() {
                for qb in 0..b.n_states() {
                    row.push(a.step(sym, qa) * b.n_states() + b.step(sym, qb));
                }
            }
            row
        })
        .collect();
    Ok(Fsa::new(a.alphabet().to_vec(), labels, delta)?)
}

/// Same automaton over a larger alphabet; the added symbols act as the
/// identity. Used to put automata with different alphabets over a common one
/// before products or coverings.
pub fn extend_with_identity(a: &Fsa, alphabet: &[String]) -> Result<Fsa, CascadeError> {
    for sym in a.alphabet() {
        if !alphabet.contains(sym) {
            return Err(CascadeError::Format(format!(
                "extended alphabet drops symbol '{sym}'"
            )));
        }
    }
    let delta = alphabet
        .iter()
        .map(|sym| match a.symbol_index(sym) {
            Ok(idx) => a.symbol_transformation(idx).image().to_vec(),
            Err(_) => (0..a.n_states()).collect(),
        })
        .collect();
    Ok(Fsa::new(alphabet.to_vec(), a.states().to_vec(), delta)?)
}

pub mod catalog;
pub mod format;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{flip_flop, reset_automaton, state_sequence};

    fn mixed3() -> (Fsa, Cascade, CoveringMap) {
        catalog::mixed3_decomposition()
    }

    #[test]
    fn single_component_cascade_agrees_with_its_fsa() {
        let reset = reset_automaton();
        let c = Cascade::new(
            reset.alphabet().to_vec(),
            vec![reset.states().to_vec()],
            vec![vec![vec![vec![0, 0]], vec![vec![1, 1]]]],
        )
        .unwrap();
        assert_eq!(flatten(&c), reset);
        for sym in 0..2 {
            for q in 0..2 {
                assert_eq!(c.step(&[q], sym).unwrap(), vec![reset.step(sym, q)]);
            }
        }
    }

    #[test]
    fn delay_line_shifts_component_zero_by_one_step() {
        let c = catalog::delay_line();
        let word = [0usize, 1, 1, 0];
        let seq = c.state_sequence(&[0, 0], &word).unwrap();
        let comp0: Vec<usize> = seq.iter().map(|j| j[0]).collect();
        let comp1: Vec<usize> = seq.iter().map(|j| j[1]).collect();
        assert_eq!(comp0, vec![0, 1, 1, 0]); // A B B A
        assert_eq!(comp1, vec![0, 0, 1, 1]); // initial A, then comp0 delayed
    }

    #[test]
    fn empty_cascade_step_is_a_no_op() {
        let c = Cascade::new(vec!["a".into()], vec![], vec![]).unwrap();
        assert_eq!(c.step(&[], 0).unwrap(), Vec::<usize>::new());
        let flat = flatten(&c);
        assert_eq!(flat.n_states(), 1);
    }

    #[test]
    fn flatten_of_independent_pair_is_the_direct_product() {
        let alphabet: Vec<String> = vec!["0".into(), "1".into(), "e".into()];
        let ff = flip_flop();
        // two independent flip-flops: component 1 ignores upstream
        let ff_table = vec![vec![vec![0, 0]], vec![vec![1, 1]], vec![vec![0, 1]]];
        let ff_table_ignoring: Vec<Vec<Vec<usize>>> = ff_table
            .iter()
            .map(|rows| vec![rows[0].clone(), rows[0].clone()])
            .collect();
        let c = Cascade::new(
            alphabet.clone(),
            vec![ff.states().to_vec(), ff.states().to_vec()],
            vec![ff_table, ff_table_ignoring],
        )
        .unwrap();
        assert_eq!(flatten(&c), direct_product(&ff, &ff).unwrap());
        assert_eq!(flatten(&c).n_states(), 4);
    }

    #[test]
    fn cascade_sequence_matches_flattened_serial_run() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(77);
        for _ in 0..200 {
            let n_syms = rng.random_range(1..=3);
            let alphabet: Vec<String> = (0..n_syms).map(|i| format!("s{i}")).collect();
            let n_comps = rng.random_range(1..=3);
            let mut states = Vec::new();
            let mut tables = Vec::new();
            let mut upstream = 1;
            for k in 0..n_comps {
                let n = rng.random_range(1..=3);
                states.push((0..n).map(|i| format!("c{k}q{i}")).collect::<Vec<String>>());
                let table: Vec<Vec<Vec<usize>>> = (0..n_syms)
                    .map(|_| {
                        (0..upstream)
                            .map(|_| (0..n).map(|_| rng.random_range(0..n)).collect())
                            .collect()
                    })
                    .collect();
                tables.push(table);
                upstream *= n;
            }
            let c = Cascade::new(alphabet, states, tables).unwrap();
            let flat = flatten(&c);
            let q0: Vec<usize> = c.components().iter().map(|comp| rng.random_range(0..comp.n_states())).collect();
            let len = rng.random_range(0..=32);
            let word: Vec<usize> = (0..len).map(|_| rng.random_range(0..n_syms)).collect();

            let joint_seq = c.state_sequence(&q0, &word).unwrap();
            let flat_q0 = flat.state_index(&c.joint_label(&q0)).unwrap();
            let flat_seq = state_sequence(&flat, flat_q0, &word);
            let relabeled: Vec<String> =
                flat_seq.iter().map(|&q| flat.state_label(q).to_string()).collect();
            let expected: Vec<String> = joint_seq.iter().map(|j| c.joint_label(j)).collect();
            assert_eq!(relabeled, expected);
        }
    }

    #[test]
    fn identity_covering_always_verifies() {
        let ff = flip_flop();
        let report = check_covering(&ff, &ff, &CoveringMap::identity(&ff)).unwrap();
        assert!(report.holds);
    }

    #[test]
    fn product_projection_covers_each_factor() {
        let ff = flip_flop();
        let prod = direct_product(&ff, &ff).unwrap();
        let proj = CoveringMap::new(
            prod.states()
                .iter()
                .map(|s| {
                    let first = s.trim_start_matches('(').split(',').next().unwrap();
                    (s.clone(), first.to_string())
                })
                .collect(),
        )
        .unwrap();
        let report = check_covering(&prod, &ff, &proj).unwrap();
        assert!(report.holds, "{:?}", report.failure);
    }

    #[test]
    fn swapped_map_fails_with_a_counterexample() {
        let ff = flip_flop();
        let swap = CoveringMap::new(vec![
            ("A".into(), "B".into()),
            ("B".into(), "A".into()),
        ])
        .unwrap();
        let report = check_covering(&ff, &ff, &swap).unwrap();
        assert!(!report.holds);
        match report.failure {
            Some(CoverFailure::Mismatch { .. }) => {}
            other => panic!("expected a commuting counterexample, got {other:?}"),
        }
    }

    #[test]
    fn non_surjective_map_is_rejected_before_commuting() {
        let ff = flip_flop();
        let partial = CoveringMap::new(vec![("A".into(), "A".into())]).unwrap();
        let report = check_covering(&ff, &ff, &partial).unwrap();
        assert_eq!(
            report.failure,
            Some(CoverFailure::NotSurjective { missing: "B".into() })
        );
    }

    #[test]
    fn alphabet_mismatch_is_an_error_not_a_failure() {
        let ff = flip_flop();
        let reset = reset_automaton();
        let id = CoveringMap::identity(&ff);
        assert!(matches!(
            check_covering(&ff, &reset, &id),
            Err(CascadeError::AlphabetMismatch(..))
        ));
    }

    #[test]
    fn mixed_target_witness_verifies() {
        let (target, cascade, cover) = mixed3();
        let flat = flatten(&cascade);
        let report = check_covering(&flat, &target, &cover).unwrap();
        assert!(report.holds, "{:?}", report.failure);

        // the target really is mixed: neither symbol is a reset or a permutation
        for sym in target.alphabet() {
            let class = crate::automata::classify_symbol(&target, sym).unwrap();
            assert!(class.is_mixed(), "symbol {sym} should be mixed");
        }
        // and the cascade is a reset component feeding a permutation component
        assert_eq!(cascade.components()[0].kind(), ComponentKind::Reset);
        assert_eq!(cascade.components()[1].kind(), ComponentKind::Permutation);
    }

    #[test]
    fn covering_composes_through_an_intermediate_automaton() {
        let ff = flip_flop();
        let mid = direct_product(&ff, &ff).unwrap();
        let big = direct_product(&mid, &ff).unwrap();

        let first = |s: &str| -> String {
            // "((A,B),A)" -> "(A,B)"; "(A,B)" -> "A"
            let inner = &s[1..s.len() - 1];
            let mut depth = 0;
            for (i, ch) in inner.char_indices() {
                match ch {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    ',' if depth == 0 => return inner[..i].to_string(),
                    _ => {}
                }
            }
            inner.to_string()
        };
        let phi1 = CoveringMap::new(big.states().iter().map(|s| (s.clone(), first(s))).collect()).unwrap();
        let phi2 = CoveringMap::new(mid.states().iter().map(|s| (s.clone(), first(s))).collect()).unwrap();
        assert!(check_covering(&big, &mid, &phi1).unwrap().holds);
        assert!(check_covering(&mid, &ff, &phi2).unwrap().holds);
        let composed = phi1.compose(&phi2);
        assert!(check_covering(&big, &ff, &composed).unwrap().holds);
    }
}
