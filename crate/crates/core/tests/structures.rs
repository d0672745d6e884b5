use proptest::prelude::*;

use probsss::access_structure::{
    builtin_structure, diagonal_refutation, gdelta_membership, gen_membership, grid_row,
    minimize_generators, normalize_witness, parse_structure, progression, structure_to_text,
    Builtin, BuiltinName, BuiltinParams, GDeltaWitness, ParticipantSet,
};

fn universe(n: u32) -> ParticipantSet {
    (1..=n).collect()
}

fn family(n: u32, max_len: usize) -> impl Strategy<Value = Vec<ParticipantSet>> {
    prop::collection::vec(
        prop::collection::btree_set(1..=n, 1..=max_len)
            .prop_map(|s| s.into_iter().collect::<ParticipantSet>()),
        0..6,
    )
}

proptest! {
    #[test]
    fn gen_membership_is_monotone(g in family(6, 3)) {
        let subsets = universe(6).subsets();
        for a in &subsets {
            if gen_membership(&g, a) {
                for b in subsets.iter().filter(|b| a.is_subset(b)) {
                    prop_assert!(gen_membership(&g, b));
                }
            }
        }
    }

    #[test]
    fn minimize_is_idempotent_and_preserves_membership(g in family(6, 4)) {
        let m = minimize_generators(&g);
        prop_assert_eq!(minimize_generators(&m), m.clone());
        for (i, a) in m.iter().enumerate() {
            for (j, b) in m.iter().enumerate() {
                prop_assert!(i == j || !a.is_subset(b));
            }
        }
        for a in universe(6).subsets() {
            prop_assert_eq!(gen_membership(&g, &a), gen_membership(&m, &a));
        }
    }

    #[test]
    fn normalized_levels_decrease(layers in prop::collection::vec(family(5, 3), 1..4)) {
        let w = normalize_witness(&layers);
        prop_assert!(w.is_normalized());
        for a in universe(5).subsets() {
            for i in 1..w.depth() {
                if gen_membership(&w.levels()[i], &a) {
                    prop_assert!(gen_membership(&w.levels()[i - 1], &a));
                }
            }
            // level i generates the intersection of the first i layers
            for i in 0..w.depth() {
                let direct = layers[..=i].iter().all(|l| gen_membership(l, &a));
                prop_assert_eq!(gen_membership(&w.levels()[i], &a), direct);
            }
        }
    }

    #[test]
    fn structure_text_round_trip(g in family(9, 4)) {
        let m = minimize_generators(&g);
        prop_assert_eq!(parse_structure(&structure_to_text(&m)).unwrap(), m);
    }

    #[test]
    fn witness_text_round_trip(layers in prop::collection::vec(family(5, 3), 1..4)) {
        let w = normalize_witness(&layers);
        prop_assert_eq!(GDeltaWitness::parse(&w.to_text()).unwrap(), w);
    }
}

#[test]
fn all_infinite_membership_is_size_threshold() {
    for n in 1..=6u32 {
        let params = BuiltinParams {
            max_index: n,
            levels: n as usize,
            ..Default::default()
        };
        let Builtin::GDelta(w) = builtin_structure(BuiltinName::AllInfinite, &params).unwrap()
        else {
            panic!("expected a witness");
        };
        for k in 1..=n as usize {
            for a in universe(n).subsets() {
                assert_eq!(gdelta_membership(&w, &a, k).unwrap(), a.len() >= k);
            }
        }
    }
}

fn check_refutation(sets: &[ParticipantSet], witness: &GDeltaWitness) {
    let b = diagonal_refutation(sets, witness).unwrap();
    for level in &witness.levels()[..sets.len()] {
        assert!(gen_membership(level, &b));
    }
    assert!(!gen_membership(sets, &b), "{b} extends some A_i");
}

#[test]
fn refutes_witnesses_for_disjoint_progressions() {
    for m in 2..=4u32 {
        let max = 5 * m;
        let sets: Vec<ParticipantSet> = (1..=m).map(|i| progression(i, m, max)).collect();
        let own: Vec<Vec<ParticipantSet>> = (1..=m as usize)
            .map(|i| {
                sets[i - 1]
                    .subsets()
                    .into_iter()
                    .filter(|s| s.len() == i)
                    .collect()
            })
            .collect();
        let pooled: Vec<Vec<ParticipantSet>> = (1..=m as usize)
            .map(|i| {
                sets.iter()
                    .flat_map(|a| a.subsets().into_iter().filter(move |s| s.len() == i))
                    .collect()
            })
            .collect();
        check_refutation(&sets, &GDeltaWitness::from_levels(own));
        let pooled = GDeltaWitness::from_levels(pooled);
        assert!(pooled.is_normalized());
        check_refutation(&sets, &pooled);
    }
}

#[test]
fn refutes_witnesses_for_grid_rows() {
    for m in 2..=4u32 {
        let rows: Vec<ParticipantSet> = (1..=m).map(|r| grid_row(r, m)).collect();
        let Builtin::Open(s) = builtin_structure(
            BuiltinName::GridRows,
            &BuiltinParams {
                m,
                ..Default::default()
            },
        )
        .unwrap() else {
            panic!("expected an open structure");
        };
        assert_eq!(s.generators(), &rows[..]);
        let levels: Vec<Vec<ParticipantSet>> = (1..m as usize)
            .map(|i| {
                rows.iter()
                    .flat_map(|a| a.subsets().into_iter().filter(move |s| s.len() == i))
                    .collect()
            })
            .collect();
        check_refutation(&rows[..m as usize - 1], &GDeltaWitness::from_levels(levels));
    }
}
