//! Built-in automata, cascades, and covering witnesses.
//!
//! The decomposition entries are hand-built: the checker verifies coverings,
//! it never synthesizes them.

use crate::automata::{cyclic_counter, flip_flop, reset_automaton, Fsa};

use super::{direct_product, extend_with_identity, flatten, Cascade, CoveringMap};

pub struct NamedFsa {
    pub name: &'static str,
    pub fsa: Fsa,
    pub note: &'static str,
}

pub struct NamedCascade {
    pub name: &'static str,
    pub cascade: Cascade,
    pub note: &'static str,
}

/// A covering claim ready to hand to `check_covering`, with the outcome the
/// catalog promises.
pub struct CoveringWitness {
    pub name: &'static str,
    pub y: Fsa,
    pub x: Fsa,
    pub map: CoveringMap,
    pub expect_holds: bool,
    pub note: &'static str,
}

pub struct Catalog {
    pub automata: Vec<NamedFsa>,
    pub cascades: Vec<NamedCascade>,
    pub coverings: Vec<CoveringWitness>,
}

/// Two-component cascade whose second level copies the first level's
/// previous state: a one-step delay line. Fixes the synchronous-update
/// reading of cascade semantics observably.
pub fn delay_line() -> Cascade {
    let states = vec!["A".to_string(), "B".to_string()];
    // component 0: the reset automaton
    let head = vec![vec![vec![0, 0]], vec![vec![1, 1]]];
    // component 1: next state = upstream previous state, whatever the symbol
    let copy = vec![
        vec![vec![0, 0], vec![1, 1]],
        vec![vec![0, 0], vec![1, 1]],
    ];
    Cascade::new(
        vec!["0".into(), "1".into()],
        vec![states.clone(), states],
        vec![head, copy],
    )
    .expect("static tables")
}

/// A mixed 3-state automaton together with a two-level cascade (a reset
/// component feeding a permutation component) and the covering map from the
/// flattened cascade onto it.
///
/// The cascade: on `s` the head resets to `u` and the tail swaps exactly
/// when the head *was* `u`; on `t` the head resets to `w` and the tail swaps
/// exactly when the head was `w`. Collapsing `(u,b0)` with `(w,b1)` is a
/// congruence of the flat automaton, and the quotient's two symbols are both
/// mixed rows.
pub fn mixed3_decomposition() -> (Fsa, Cascade, CoveringMap) {
    let target = Fsa::new(
        vec!["s".into(), "t".into()],
        vec!["m0".into(), "m1".into(), "m2".into()],
        vec![vec![1, 0, 0], vec![2, 0, 0]],
    )
    .expect("static table");

    let head = vec![vec![vec![0, 0]], vec![vec![1, 1]]]; // s: const u, t: const w
    let tail = vec![
        vec![vec![1, 0], vec![0, 1]], // s: swap under u, hold under w
        vec![vec![0, 1], vec![1, 0]], // t: hold under u, swap under w
    ];
    let cascade = Cascade::new(
        vec!["s".into(), "t".into()],
        vec![vec!["u".into(), "w".into()], vec!["b0".into(), "b1".into()]],
        vec![head, tail],
    )
    .expect("static tables");

    let cover = CoveringMap::new(vec![
        ("(u,b0)".into(), "m0".into()),
        ("(u,b1)".into(), "m1".into()),
        ("(w,b0)".into(), "m2".into()),
        ("(w,b1)".into(), "m0".into()),
    ])
    .expect("distinct domain labels");

    (target, cascade, cover)
}

/// Flip-flop and mod-2 counter over a common alphabet (each extended with
/// the other's symbols acting as identity), their product, and the
/// projection covering onto the extended flip-flop.
pub fn product_projection_witness() -> CoveringWitness {
    let common: Vec<String> = vec!["0".into(), "1".into(), "e".into(), "+1".into()];
    let ff = extend_with_identity(&flip_flop(), &common).expect("superset alphabet");
    let c2 = extend_with_identity(&cyclic_counter(2), &common).expect("superset alphabet");
    let prod = direct_product(&ff, &c2).expect("same alphabet");
    let map = CoveringMap::new(
        prod.states()
            .iter()
            .map(|s| {
                let first = s.trim_start_matches('(').split(',').next().expect("tuple label");
                (s.clone(), first.to_string())
            })
            .collect(),
    )
    .expect("distinct domain labels");
    CoveringWitness {
        name: "product-projection",
        y: prod,
        x: ff,
        map,
        expect_holds: true,
        note: "projection from a direct product onto its first factor",
    }
}

/// Every shipped example: the basic automata, the cascades, and the covering
/// witnesses (including one deliberately failing map).
pub fn builtin_examples() -> Catalog {
    let (mixed_target, mixed_cascade, mixed_cover) = mixed3_decomposition();
    let mixed_flat = flatten(&mixed_cascade);

    let automata = vec![
        NamedFsa {
            name: "reset2",
            fsa: reset_automaton(),
            note: "two-state reset automaton: 0 resets to A, 1 resets to B",
        },
        NamedFsa {
            name: "flipflop",
            fsa: flip_flop(),
            note: "reset-to-A, reset-to-B, and an identity symbol",
        },
        NamedFsa { name: "cyclic2", fsa: cyclic_counter(2), note: "mod-2 counter" },
        NamedFsa { name: "cyclic3", fsa: cyclic_counter(3), note: "mod-3 counter" },
        NamedFsa { name: "cyclic4", fsa: cyclic_counter(4), note: "mod-4 counter" },
        NamedFsa { name: "cyclic5", fsa: cyclic_counter(5), note: "mod-5 counter" },
        NamedFsa {
            name: "mixed3",
            fsa: mixed_target.clone(),
            note: "3-state target with two mixed symbols, covered by the mixed3 cascade",
        },
    ];

    let cascades = vec![
        NamedCascade {
            name: "delay-line",
            cascade: delay_line(),
            note: "second component replays the first with a one-step delay",
        },
        NamedCascade {
            name: "mixed3",
            cascade: mixed_cascade,
            note: "reset component feeding a permutation component; covers mixed3",
        },
    ];

    let coverings = vec![
        CoveringWitness {
            name: "identity",
            y: flip_flop(),
            x: flip_flop(),
            map: CoveringMap::identity(&flip_flop()),
            expect_holds: true,
            note: "every automaton covers itself",
        },
        product_projection_witness(),
        CoveringWitness {
            name: "mixed3",
            y: mixed_flat,
            x: mixed_target,
            map: mixed_cover,
            expect_holds: true,
            note: "flattened reset-then-permutation cascade onto the mixed 3-state target",
        },
        CoveringWitness {
            name: "bad-swap",
            y: flip_flop(),
            x: flip_flop(),
            map: CoveringMap::new(vec![("A".into(), "B".into()), ("B".into(), "A".into())])
                .expect("two entries"),
            expect_holds: false,
            note: "swapping states against asymmetric resets cannot commute",
        },
    ];

    Catalog { automata, cascades, coverings }
}
