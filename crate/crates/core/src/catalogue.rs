//! Small fixed inputs shared by tests, the acceptance run and the command line.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::RngCore;

use crate::access_structure::{
    builtin_structure, normalize_witness, threshold_generators, Builtin, BuiltinName,
    BuiltinParams, GDeltaWitness, ParticipantId, ParticipantSet,
};
use crate::classifier::JointDistributionTable;
use crate::gaussian_ramp::{hilbert_from_witness, HilbertProgram};

fn fam(sets: &[&[u32]]) -> Vec<ParticipantSet> {
    sets.iter().map(|s| ParticipantSet::from(*s)).collect()
}

/// Generator families on at most four participants with generators of size 2 or 3.
/// Some are deliberately not minimal.
pub fn generator_families() -> Vec<Vec<ParticipantSet>> {
    vec![
        fam(&[&[1, 2]]),
        fam(&[&[1, 2], &[3, 4]]),
        fam(&[&[1, 2], &[2, 3]]),
        threshold_generators(3, 2),
        fam(&[&[1, 2, 3]]),
        fam(&[&[1, 2, 3], &[1, 4]]),
        threshold_generators(4, 2),
        threshold_generators(4, 3),
        fam(&[&[1, 2], &[1, 2, 3]]),
        fam(&[&[1, 2], &[3, 4], &[1, 3]]),
        fam(&[&[1, 2], &[2, 3], &[3, 4]]),
        fam(&[&[1, 2], &[2, 3], &[3, 4], &[1, 4]]),
        fam(&[&[1, 2, 3], &[2, 3, 4]]),
        fam(&[&[1, 2, 3], &[1, 2, 4], &[3, 4]]),
        fam(&[&[1, 4], &[2, 4], &[3, 4]]),
        fam(&[&[1, 2], &[1, 3], &[1, 4]]),
        fam(&[&[1, 2, 4], &[3, 4]]),
        fam(&[&[1, 3], &[2, 4]]),
        fam(&[&[2, 3], &[1, 2, 4]]),
        fam(&[&[1, 2], &[1, 3], &[2, 3], &[1, 2, 3]]),
        fam(&[&[1, 3], &[1, 2, 3], &[2, 4]]),
        fam(&[&[2, 4], &[1, 3, 4]]),
    ]
}

/// A Hilbert program, with the witness and truncation it was built from if any.
#[derive(Debug, Clone)]
pub struct HilbertCase {
    pub name: &'static str,
    pub program: HilbertProgram,
    pub witness: Option<(GDeltaWitness, usize)>,
}

fn gdelta(name: BuiltinName, params: &BuiltinParams) -> GDeltaWitness {
    match builtin_structure(name, params).expect("valid builtin parameters") {
        Builtin::GDelta(w) => w,
        Builtin::Open(s) => GDeltaWitness::from_levels(vec![s.generators().to_vec()]),
    }
}

pub fn hilbert_cases() -> Vec<HilbertCase> {
    let mut direct = BTreeMap::new();
    direct.insert(ParticipantId(1), vec![vec![1.0, 0.0]]);
    direct.insert(ParticipantId(2), vec![vec![0.0, 1.0]]);
    let direct = HilbertProgram::new(vec![1.0, 0.5], direct).expect("valid program");

    let witnesses: Vec<(&'static str, GDeltaWitness, usize)> = vec![
        (
            "pair_twice",
            normalize_witness(&[fam(&[&[1, 2]]), fam(&[&[1, 2]])]),
            2,
        ),
        (
            "all_infinite",
            gdelta(
                BuiltinName::AllInfinite,
                &BuiltinParams {
                    max_index: 4,
                    levels: 3,
                    ..Default::default()
                },
            ),
            3,
        ),
        (
            "forbidden",
            gdelta(
                BuiltinName::Forbidden,
                &BuiltinParams {
                    max_index: 4,
                    levels: 4,
                    forbidden: (1..=4).map(|i| ParticipantSet::from([i])).collect(),
                    ..Default::default()
                },
            ),
            4,
        ),
        (
            "chain",
            normalize_witness(&[fam(&[&[1], &[2]]), fam(&[&[3]])]),
            2,
        ),
        (
            "disjoint",
            gdelta(
                BuiltinName::Disjoint,
                &BuiltinParams {
                    max_index: 4,
                    m: 2,
                    ..Default::default()
                },
            ),
            1,
        ),
    ];
    let mut cases = vec![HilbertCase {
        name: "direct",
        program: direct,
        witness: None,
    }];
    for (name, w, levels) in witnesses {
        cases.push(HilbertCase {
            name,
            program: hilbert_from_witness(&w, levels).expect("normalized witness"),
            witness: Some((w, levels)),
        });
    }
    cases
}

/// A random table on 1 to 3 participants with 1 to 3 share atoms each and 2 or 3
/// secrets. About a third of the atoms get zero mass.
pub fn random_table(rng: &mut impl RngCore) -> JointDistributionTable {
    let mut pick = |n: u64| rng.next_u64() % n;
    let k = 1 + pick(3) as usize;
    let domains: Vec<u64> = (0..k).map(|_| 1 + pick(3)).collect();
    let secrets = 2 + pick(2);
    let mut atoms: Vec<Vec<u64>> = vec![Vec::new()];
    for &d in domains.iter().chain(std::iter::once(&secrets)) {
        atoms = atoms
            .into_iter()
            .flat_map(|a| {
                (0..d).map(move |x| {
                    let mut a = a.clone();
                    a.push(x);
                    a
                })
            })
            .collect();
    }
    let mut weights: Vec<u64> = atoms
        .iter()
        .map(|_| if pick(3) == 0 { 0 } else { 1 + pick(4) })
        .collect();
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let total: u64 = weights.iter().sum();
    JointDistributionTable::new(
        (1..=k as u32).map(ParticipantId).collect(),
        domains.iter().map(|&d| (0..d).collect()).collect(),
        (0..secrets).collect(),
        atoms
            .into_iter()
            .zip(weights)
            .map(|(a, w)| (a, BigRational::new(BigInt::from(w), BigInt::from(total)))),
    )
    .expect("weights normalize to one")
}
