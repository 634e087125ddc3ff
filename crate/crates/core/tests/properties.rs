//! Property tests for the algebraic invariants the library is built around.

use proptest::prelude::*;

use traceline_core::automata::{
    classify_symbol, scan_state_sequence, semigroup_closure, state_sequence, transformation_of,
    Fsa, Transformation,
};
use traceline_core::linalg::{matmul, permutation_matrix, row_softmax, Matrix, Permutation};

fn arb_permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just(n).prop_perturb(move |n, mut rng| {
        let mut mapping: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            mapping.swap(i, j);
        }
        Permutation::new(mapping).expect("shuffled identity")
    })
}

fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-10.0..10.0f64, rows * cols)
        .prop_map(move |data| Matrix::from_vec(rows, cols, data).expect("length fixed"))
}

proptest! {
    #[test]
    fn softmax_commutes_with_permutation_conjugation(
        n in 1usize..8,
        seed in proptest::num::u64::ANY,
    ) {
        let mut rng = traceline_core::rng::seeded(seed);
        let a = traceline_core::rng::uniform_matrix(&mut rng, n, n, 5.0);
        let perm = traceline_core::rng::permutation(&mut rng, n);
        let p = permutation_matrix(&perm);
        let pt = p.transpose();
        let lhs = row_softmax(&matmul(&matmul(&p, &a).unwrap(), &pt).unwrap()).unwrap();
        let rhs = matmul(&matmul(&p, &row_softmax(&a).unwrap()).unwrap(), &pt).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn matmul_associates_with_row_permutation(
        (x, w, perm) in (1usize..7, 1usize..7, 1usize..7).prop_flat_map(|(r, c, k)| {
            (arb_matrix(r, c), arb_matrix(c, k), arb_permutation(r))
        })
    ) {
        let lhs = matmul(&perm.apply_to_rows(&x).unwrap(), &w).unwrap();
        let rhs = perm.apply_to_rows(&matmul(&x, &w).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn permutation_matrices_are_orthogonal(perm in (1usize..9).prop_flat_map(arb_permutation)) {
        let p = permutation_matrix(&perm);
        prop_assert_eq!(matmul(&p.transpose(), &p).unwrap(), Matrix::identity(perm.len()));
    }

    #[test]
    fn softmax_rows_are_a_distribution(m in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| arb_matrix(r, c))) {
        let s = row_softmax(&m).unwrap();
        for i in 0..s.rows() {
            let sum: f64 = s.row(i).iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(s.row(i).iter().all(|&w| w >= 0.0));
        }
    }
}

fn fsa_with(max_states: usize) -> impl Strategy<Value = Fsa> {
    (1usize..=max_states, 1usize..=4).prop_flat_map(|(n_states, n_syms)| {
        proptest::collection::vec(
            proptest::collection::vec(0..n_states, n_states),
            n_syms,
        )
        .prop_map(move |delta| {
            Fsa::new(
                (0..n_syms).map(|i| format!("s{i}")).collect(),
                (0..n_states).map(|i| format!("q{i}")).collect(),
                delta,
            )
            .expect("generated table is total")
        })
    })
}

fn arb_fsa() -> impl Strategy<Value = Fsa> {
    fsa_with(6)
}

fn arb_small_fsa() -> impl Strategy<Value = Fsa> {
    fsa_with(4)
}

fn arb_word(a: &Fsa, max_len: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..a.alphabet().len(), 0..=max_len)
}

proptest! {
    #[test]
    fn state_sequence_is_prefix_coherent(
        (a, q0, word) in arb_fsa().prop_flat_map(|a| {
            let n = a.n_states();
            (Just(a.clone()), 0..n, arb_word(&a, 24))
        })
    ) {
        let full = state_sequence(&a, q0, &word);
        for n in 0..=word.len() {
            prop_assert_eq!(&state_sequence(&a, q0, &word[..n])[..], &full[..n]);
        }
    }

    #[test]
    fn scan_equals_serial(
        (a, q0, word) in arb_fsa().prop_flat_map(|a| {
            let n = a.n_states();
            (Just(a.clone()), 0..n, arb_word(&a, 64))
        })
    ) {
        prop_assert_eq!(scan_state_sequence(&a, q0, &word).unwrap(), state_sequence(&a, q0, &word));
    }

    #[test]
    fn word_transformations_compose(
        (a, u, v) in arb_fsa().prop_flat_map(|a| {
            (Just(a.clone()), arb_word(&a, 6), arb_word(&a, 6))
        })
    ) {
        let mut uv = u.clone();
        uv.extend_from_slice(&v);
        let joint = transformation_of(&a, &uv).unwrap();
        let split = transformation_of(&a, &u)
            .unwrap()
            .then(&transformation_of(&a, &v).unwrap())
            .unwrap();
        prop_assert_eq!(joint, split);
    }

    #[test]
    fn symbol_classification_matches_first_principles(a in arb_fsa()) {
        for (i, sym) in a.alphabet().iter().enumerate() {
            let class = classify_symbol(&a, sym).unwrap();
            let image = a.symbol_transformation(i).image().to_vec();
            let n = a.n_states();

            let identity = image.iter().enumerate().all(|(q, &r)| q == r);
            let constant = image.windows(2).all(|w| w[0] == w[1]);
            let bijective = {
                let mut seen = vec![false; n];
                image.iter().all(|&r| !std::mem::replace(&mut seen[r], true))
            };

            prop_assert_eq!(class.is_identity, identity);
            prop_assert_eq!(class.is_reset, constant || identity);
            prop_assert_eq!(class.is_permutation, bijective);
            prop_assert_eq!(class.is_mixed(), !(constant || identity) && !bijective);
        }
    }

    #[test]
    fn closure_is_closed_and_idempotent(a in arb_small_fsa()) {
        // |Q| <= 4 keeps |Q|^|Q| at most 256
        let s = traceline_core::automata::fsa_semigroup(&a, 1000).unwrap();
        let members: std::collections::HashSet<&Transformation> = s.elements().iter().collect();
        for x in s.elements() {
            for y in s.elements() {
                prop_assert!(members.contains(&x.then(y).unwrap()));
            }
        }
        let regenerated: Vec<(String, Transformation)> = s
            .elements()
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("g{i}"), t.clone()))
            .collect();
        let s2 = semigroup_closure(&regenerated, 1000).unwrap();
        prop_assert_eq!(s2.len(), s.len());
    }
}
