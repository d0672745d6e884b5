//! Perfect secret sharing from a span program.
//!
//! The dealer draws `r` uniformly from `GF(p)^dim`. The secret is `<target, r>` and a
//! participant holding vector `x` receives `<x, r>`. Any set whose vectors span the
//! target recombines its shares with the same coefficients; any other set sees shares
//! independent of the secret.
//!
//! # Randomness expansion
//!
//! `deal` reads 64-bit words from [`rng::stream`]`(seed)`. With `k` the largest
//! exponent such that `p^k ≤ 2^32`, each word `w` yields the `k` little-endian base-`p`
//! digits of `w mod p^k`, which become the next `k` coordinates of `r`. No word is
//! rejected; the distance from uniform is at most `p^k / 2^64 ≤ 2^-32` per chunk.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::RngCore;
use rayon::prelude::*;

use crate::access_structure::{MonotoneStructure, ParticipantId, ParticipantSet};
use crate::classifier::{self, Atom, Classification, JointDistributionTable, Marginal};
use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::rng;
use crate::span_program::SpanProgram;
use crate::text;

/// Default bound on `p^dim` for exhaustive enumeration.
pub const ENUMERATION_BOUND: u64 = 10_000_000;

/// Share domains up to this size are listed in full; larger ones are cut to the
/// support of the distribution.
const FULL_DOMAIN_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Share {
    pub vector: Vec<u64>,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dealing {
    pub randomness: Vec<u64>,
    pub secret: FieldElement,
    pub shares: BTreeMap<ParticipantId, Vec<Share>>,
}

impl Dealing {
    /// Share values per participant, in vector order.
    pub fn share_values(&self) -> BTreeMap<ParticipantId, Vec<u64>> {
        self.shares
            .iter()
            .map(|(id, s)| (*id, s.iter().map(|x| x.value).collect()))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("dealing v1\nsecret {}\n", self.secret);
        for (id, shares) in &self.shares {
            for (i, s) in shares.iter().enumerate() {
                out.push_str(&format!("share {id} {i} {}\n", s.value));
            }
        }
        out
    }
}

/// Secret and share values read back from a dealing dump.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DealtShares {
    pub secret: u64,
    pub shares: BTreeMap<ParticipantId, Vec<u64>>,
}

impl DealtShares {
    pub fn parse(input: &str) -> Result<Self> {
        let mut lines = text::lines(input);
        text::expect_header(&mut lines, "dealing v1")?;
        let line = lines.next().ok_or_else(|| Error::Format {
            line: 0,
            msg: "missing `secret` line".into(),
        })?;
        let mut toks = line.keyword("secret")?;
        let secret: u64 = line.parse_one(toks.next().ok_or_else(|| line.err("missing value"))?)?;
        let mut indexed: BTreeMap<ParticipantId, BTreeMap<usize, u64>> = BTreeMap::new();
        for line in lines {
            let toks: Vec<u64> = line.parse_all(line.keyword("share")?)?;
            let [id, index, value] = toks[..] else {
                return Err(line.err("expected `share <id> <index> <value>`"));
            };
            let id = u32::try_from(id).map_err(|_| line.err("participant id out of range"))?;
            if indexed
                .entry(ParticipantId(id))
                .or_default()
                .insert(index as usize, value)
                .is_some()
            {
                return Err(line.err(format!("duplicate share {id} {index}")));
            }
        }
        let mut shares = BTreeMap::new();
        for (id, by_index) in indexed {
            if by_index.keys().copied().ne(0..by_index.len()) {
                return Err(Error::Format {
                    line: 0,
                    msg: format!("share indices of participant {id} are not 0..n"),
                });
            }
            shares.insert(id, by_index.into_values().collect());
        }
        Ok(DealtShares { secret, shares })
    }
}

/// Largest `k` with `p^k ≤ 2^32`.
fn digits_per_word(p: u64) -> u32 {
    let mut k = 1;
    while (p as u128).pow(k + 1) <= 1 << 32 {
        k += 1;
    }
    k
}

/// Expands a seed into `dim` uniform field elements (see the module docs).
pub fn randomness_from_seed(field: &PrimeField, dim: usize, seed: u64) -> Vec<u64> {
    let p = field.modulus();
    let k = digits_per_word(p);
    let chunk = p.pow(k);
    let mut rng = rng::stream(seed);
    let mut r = Vec::with_capacity(dim);
    while r.len() < dim {
        let mut x = rng.next_u64() % chunk;
        for _ in 0..k {
            if r.len() == dim {
                break;
            }
            r.push(x % p);
            x /= p;
        }
    }
    r
}

pub fn deal(program: &SpanProgram, seed: u64) -> Dealing {
    let r = randomness_from_seed(program.field(), program.dim(), seed);
    deal_with_randomness(program, &r).expect("randomness has the program's dimension")
}

/// Deals with the given randomness instead of a seeded draw.
pub fn deal_with_randomness(program: &SpanProgram, r: &[u64]) -> Result<Dealing> {
    if r.len() != program.dim() {
        return Err(Error::DimensionMismatch {
            expected: program.dim(),
            found: r.len(),
        });
    }
    let f = program.field();
    let r: Vec<u64> = r.iter().map(|x| x % f.modulus()).collect();
    let secret = f.element(f.dot(program.target(), &r));
    let shares = program
        .assignment()
        .iter()
        .map(|(id, vecs)| {
            let shares = vecs
                .iter()
                .map(|v| Share {
                    vector: v.clone(),
                    value: f.dot(v, &r),
                })
                .collect();
            (*id, shares)
        })
        .collect();
    Ok(Dealing {
        randomness: r,
        secret,
        shares,
    })
}

/// Precomputed recombination coefficients for one qualified set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryPlan {
    field: PrimeField,
    terms: Vec<(ParticipantId, usize, u64)>,
}

impl RecoveryPlan {
    pub fn new(program: &SpanProgram, set: &ParticipantSet) -> Result<Self> {
        let refs = program.vectors_of(set)?;
        let lambda = program
            .reconstruction(set)?
            .ok_or_else(|| Error::NotQualified(set.clone()))?;
        let terms = refs
            .iter()
            .zip(lambda)
            .filter(|(_, l)| *l != 0)
            .map(|(v, l)| (v.participant, v.index, l))
            .collect();
        Ok(RecoveryPlan {
            field: *program.field(),
            terms,
        })
    }

    pub fn apply(&self, shares: &BTreeMap<ParticipantId, Vec<u64>>) -> Result<FieldElement> {
        let f = &self.field;
        let mut acc = 0;
        for &(participant, index, l) in &self.terms {
            let value = shares
                .get(&participant)
                .and_then(|s| s.get(index))
                .ok_or(Error::MissingShare { participant, index })?;
            acc = f.add(acc, f.mul(l, value % f.modulus()));
        }
        Ok(f.element(acc))
    }
}

/// Recombines the shares of `set`. Only the shares the recombination actually uses
/// need to be present.
pub fn recover(
    program: &SpanProgram,
    set: &ParticipantSet,
    shares: &BTreeMap<ParticipantId, Vec<u64>>,
) -> Result<FieldElement> {
    RecoveryPlan::new(program, set)?.apply(shares)
}

/// Linear forms for the observed shares and the secret, plus mixed-radix packing.
struct Observation {
    participants: Vec<ParticipantId>,
    // per participant: its vectors, first one most significant in the packed atom
    forms: Vec<Vec<Vec<u64>>>,
    target: Vec<u64>,
}

impl Observation {
    fn key(&self, f: &PrimeField, r: &[u64]) -> Vec<Atom> {
        let p = f.modulus();
        let mut key: Vec<Atom> = self
            .forms
            .iter()
            .map(|vs| vs.iter().fold(0, |acc, v| acc * p + f.dot(v, r)))
            .collect();
        key.push(f.dot(&self.target, r));
        key
    }
}

fn enumeration_size(program: &SpanProgram, bound: u64) -> Result<u64> {
    let p = program.field().modulus() as u128;
    let size = p.checked_pow(program.dim() as u32);
    match size {
        Some(n) if n <= bound as u128 => Ok(n as u64),
        _ => Err(Error::EnumerationBound {
            size: format!("{p}^{}", program.dim()),
            bound,
        }),
    }
}

/// Counts of each (observed shares, secret) atom over all of `GF(p)^dim`.
fn enumerate_counts(
    program: &SpanProgram,
    obs: &Observation,
    bound: u64,
) -> Result<(u64, BTreeMap<Vec<Atom>, u64>)> {
    const BLOCK: u64 = 1 << 14;
    let total = enumeration_size(program, bound)?;
    let f = *program.field();
    let p = f.modulus();
    let dim = program.dim();
    let blocks = total.div_ceil(BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = total.min(start + BLOCK);
            let mut r = vec![0u64; dim];
            let mut x = start;
            for d in r.iter_mut() {
                *d = x % p;
                x /= p;
            }
            let mut local: HashMap<Vec<Atom>, u64> = HashMap::new();
            for _ in start..end {
                *local.entry(obs.key(&f, &r)).or_default() += 1;
                for d in r.iter_mut() {
                    *d += 1;
                    if *d < p {
                        break;
                    }
                    *d = 0;
                }
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    Ok((total, counts.into_iter().collect()))
}

fn observation(program: &SpanProgram, observed: &ParticipantSet) -> Result<Observation> {
    let mut participants = Vec::new();
    let mut forms = Vec::new();
    for id in observed.iter() {
        let vecs = program
            .assignment()
            .get(&id)
            .ok_or(Error::UnknownParticipant(id))?;
        participants.push(id);
        forms.push(vecs.clone());
    }
    Ok(Observation {
        participants,
        forms,
        target: program.target().to_vec(),
    })
}

/// Exact joint distribution of the shares of `observed` and the secret, by
/// enumerating every randomness vector with weight `1/p^dim`.
///
/// A participant with several vectors gets a single atom: its share values read as
/// a base-`p` number, first vector most significant.
pub fn joint_distribution(
    program: &SpanProgram,
    observed: &ParticipantSet,
    bound: u64,
) -> Result<JointDistributionTable> {
    let obs = observation(program, observed)?;
    let (total, counts) = enumerate_counts(program, &obs, bound)?;
    let p = program.field().modulus();
    let share_domains = obs
        .forms
        .iter()
        .enumerate()
        .map(|(i, vs)| {
            let size = (p as u128).checked_pow(vs.len() as u32);
            match size {
                Some(n) if n <= FULL_DOMAIN_LIMIT as u128 => (0..n as u64).collect(),
                _ => {
                    let mut support: Vec<Atom> = counts.keys().map(|k| k[i]).collect();
                    support.sort_unstable();
                    support.dedup();
                    support
                }
            }
        })
        .collect();
    let denom = BigInt::from(total);
    JointDistributionTable::new(
        obs.participants,
        share_domains,
        (0..p).collect(),
        counts
            .into_iter()
            .map(|(k, c)| (k, BigRational::new(BigInt::from(c), denom.clone()))),
    )
}

/// Marginal for `observed` straight from the enumeration counts.
pub fn marginal(program: &SpanProgram, observed: &ParticipantSet, bound: u64) -> Result<Marginal> {
    let obs = observation(program, observed)?;
    let (total, counts) = enumerate_counts(program, &obs, bound)?;
    let denom = BigInt::from(total);
    Ok(Marginal::from_parts(
        observed.clone(),
        counts.into_iter().map(|(mut k, c)| {
            let e = k.pop().expect("secret atom");
            (k, e, BigRational::new(BigInt::from(c), denom.clone()))
        }),
    ))
}

/// Classifies the scheme of `program` against `structure`, over the program's
/// participants.
pub fn classify_program(
    program: &SpanProgram,
    structure: &MonotoneStructure,
    bound: u64,
) -> Result<Classification> {
    enumeration_size(program, bound)?;
    classifier::classify_with(&program.participants(), structure, |s| {
        marginal(program, s, bound)
    })
}
