use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use probsss::access_structure::{minimize_generators, support, MonotoneStructure, ParticipantSet};
use probsss::catalogue::{generator_families, random_table};
use probsss::classifier::{
    classify, min_c, positivity_holds, Bound, JointDistributionTable, Label,
};
use probsss::linear_scheme::{
    classify_program, deal_with_randomness, joint_distribution, recover, RecoveryPlan,
    ENUMERATION_BOUND,
};
use probsss::span_program::{SpanProgram, BRUTE_FORCE_BOUND};

fn table_for(seed: u64) -> JointDistributionTable {
    random_table(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// All randomness vectors of `GF(p)^dim`, little-endian digit order.
fn all_vectors(p: u64, dim: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..p).map(move |x| {
                    let mut v = v.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

#[test]
fn span_round_trip_over_catalogue() {
    for gens in generator_families() {
        for p in [2, 3, 5] {
            let prog = SpanProgram::from_generators(&gens, p).unwrap();
            let universe = support(&gens);
            assert_eq!(
                prog.realized_structure(&universe, BRUTE_FORCE_BOUND)
                    .unwrap(),
                minimize_generators(&gens),
                "p={p} gens={gens:?}"
            );
            assert_eq!(SpanProgram::parse(&prog.to_text()).unwrap(), prog);
        }
    }
}

#[test]
fn recovery_identity_over_enumeration() {
    for gens in generator_families().into_iter().take(8) {
        let prog = SpanProgram::from_generators(&gens, 3).unwrap();
        let plans: Vec<RecoveryPlan> = minimize_generators(&gens)
            .iter()
            .map(|g| RecoveryPlan::new(&prog, g).unwrap())
            .collect();
        for r in all_vectors(3, prog.dim()) {
            let d = deal_with_randomness(&prog, &r).unwrap();
            let shares = d.share_values();
            for plan in &plans {
                assert_eq!(plan.apply(&shares).unwrap(), d.secret);
            }
        }
    }
}

#[test]
fn recover_uses_canonical_coefficients() {
    let gens = vec![ParticipantSet::from([1, 2]), ParticipantSet::from([2, 3])];
    let prog = SpanProgram::from_generators(&gens, 5).unwrap();
    let d = deal_with_randomness(&prog, &[4, 2, 3]).unwrap();
    let shares: BTreeMap<_, _> = d.share_values();
    let all: ParticipantSet = (1..=3).collect();
    assert_eq!(recover(&prog, &all, &shares).unwrap(), d.secret);
}

#[test]
fn derived_schemes_are_perfect_over_gf2() {
    for gens in generator_families() {
        let prog = SpanProgram::from_generators(&gens, 2).unwrap();
        let structure = MonotoneStructure::new(gens.clone()).unwrap();
        let c = classify_program(&prog, &structure, ENUMERATION_BOUND).unwrap();
        assert_eq!(c.label, Label::Perfect, "{gens:?}");
        assert_eq!(c.c, Some(BigRational::one()));
    }
}

#[test]
fn secret_marginal_is_uniform() {
    for gens in generator_families().into_iter().take(5) {
        let prog = SpanProgram::from_generators(&gens, 5).unwrap();
        let t = joint_distribution(&prog, &ParticipantSet::new(), ENUMERATION_BOUND).unwrap();
        assert_eq!(t.masses().len(), 5);
        assert!(t
            .masses()
            .values()
            .all(|m| *m == BigRational::new(1.into(), 5.into())));
    }
}

#[test]
fn full_table_classifies_like_per_set_enumeration() {
    let gens = generator_families()[3].clone();
    let prog = SpanProgram::from_generators(&gens, 2).unwrap();
    let structure = MonotoneStructure::new(gens).unwrap();
    let table = joint_distribution(&prog, &prog.participants(), ENUMERATION_BOUND).unwrap();
    let a = classify(&table, &structure).unwrap();
    let b = classify_program(&prog, &structure, ENUMERATION_BOUND).unwrap();
    assert_eq!(a.label, b.label);
    assert_eq!(a.c_by_set, b.c_by_set);
}

fn rectangle_mass(
    m: &probsss::classifier::Marginal,
    us: &[Vec<u64>],
    es: &[u64],
) -> (BigRational, BigRational, BigRational) {
    let zero = BigRational::zero;
    let joint: BigRational = us
        .iter()
        .flat_map(|u| es.iter().map(move |e| (u.clone(), *e)))
        .map(|k| m.joint.get(&k).cloned().unwrap_or_else(zero))
        .sum();
    let mu_u: BigRational = us
        .iter()
        .map(|u| m.shares.get(u).cloned().unwrap_or_else(zero))
        .sum();
    let mu_e: BigRational = es
        .iter()
        .map(|e| m.secret.get(e).cloned().unwrap_or_else(zero))
        .sum();
    (joint, mu_u, mu_e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn finite_ratio_iff_positivity(seed in any::<u64>()) {
        let t = table_for(seed);
        for set in t.participant_set().subsets() {
            let finite = min_c(&t, &set).unwrap().is_finite();
            prop_assert_eq!(finite, positivity_holds(&t, &set).unwrap());
        }
    }

    #[test]
    fn implication_chain_holds(seed in any::<u64>()) {
        let t = table_for(seed);
        let universe = t.participant_set();
        let structure = MonotoneStructure::permissive(vec![universe]);
        let c = classify(&t, &structure).unwrap();
        prop_assert!(c.conditions.chain_holds());
        prop_assert_eq!(c.conditions.almost_perfect, c.conditions.almost_ramp);
        prop_assert_eq!(c.conditions.ramp, c.conditions.almost_ramp);
    }

    #[test]
    fn rectangles_inherit_atom_bounds(seed in any::<u64>(), umask in any::<u16>(), emask in any::<u8>()) {
        let t = table_for(seed);
        for set in t.participant_set().subsets() {
            let m = t.marginal(&set).unwrap();
            let Bound::Finite(c) = m.min_c() else { continue };
            let atoms: Vec<Vec<u64>> = m.shares.keys().cloned().collect();
            let us: Vec<Vec<u64>> = atoms.iter().enumerate()
                .filter(|(i, _)| umask >> (i % 16) & 1 == 1).map(|(_, a)| a.clone()).collect();
            let es: Vec<u64> = t.secret_domain().iter().enumerate()
                .filter(|(i, _)| emask >> i & 1 == 1).map(|(_, e)| *e).collect();
            let (joint, mu_u, mu_e) = rectangle_mass(&m, &us, &es);
            let product = mu_u * mu_e;
            if product.is_zero() {
                continue;
            }
            let ratio = joint / product;
            prop_assert!(ratio <= c && ratio >= c.recip(), "ratio {} outside c {}", ratio, c);
        }
    }

    #[test]
    fn table_text_round_trip(seed in any::<u64>()) {
        let t = table_for(seed);
        prop_assert_eq!(JointDistributionTable::parse(&t.to_text()).unwrap(), t);
    }
}
