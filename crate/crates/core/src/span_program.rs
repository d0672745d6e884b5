//! Monotone span programs over prime fields.
//!
//! A set of participants is qualified when the target vector lies in the span of the
//! vectors assigned to its members.

use std::collections::BTreeMap;

use crate::access_structure::{minimize_generators, ParticipantId, ParticipantSet};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::text;

/// Default bound on the universe size for brute-force structure recovery.
pub const BRUTE_FORCE_BOUND: usize = 12;

/// Solves `Σ λ_i · vectors[i] = target` over GF(p), canonical solution (see
/// [`PrimeField::solve_span`]).
pub fn span_membership(
    field: &PrimeField,
    vectors: &[Vec<u64>],
    target: &[u64],
) -> Result<Option<Vec<u64>>> {
    field.solve_span(vectors, target)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanProgram {
    field: PrimeField,
    dim: usize,
    target: Vec<u64>,
    assignment: BTreeMap<ParticipantId, Vec<Vec<u64>>>,
}

/// One assigned vector, located by participant and position in its list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VectorRef<'a> {
    pub participant: ParticipantId,
    pub index: usize,
    pub vector: &'a [u64],
}

impl SpanProgram {
    pub fn new(
        field: PrimeField,
        target: Vec<u64>,
        assignment: BTreeMap<ParticipantId, Vec<Vec<u64>>>,
    ) -> Result<Self> {
        let dim = target.len();
        let p = field.modulus();
        if target.iter().all(|&x| x % p == 0) {
            return Err(Error::InvalidArgument("target vector is zero".into()));
        }
        for (id, vecs) in &assignment {
            if vecs.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "participant {id} has no vectors"
                )));
            }
            for v in vecs {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: v.len(),
                    });
                }
            }
        }
        let reduce = |v: Vec<u64>| v.into_iter().map(|x| x % p).collect::<Vec<_>>();
        Ok(SpanProgram {
            field,
            dim,
            target: reduce(target),
            assignment: assignment
                .into_iter()
                .map(|(id, vs)| (id, vs.into_iter().map(reduce).collect()))
                .collect(),
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn target(&self) -> &[u64] {
        &self.target
    }

    pub fn assignment(&self) -> &BTreeMap<ParticipantId, Vec<Vec<u64>>> {
        &self.assignment
    }

    pub fn participants(&self) -> ParticipantSet {
        self.assignment.keys().copied().collect()
    }

    /// Vectors assigned to the members of `set`, ordered by participant then index.
    pub fn vectors_of(&self, set: &ParticipantSet) -> Result<Vec<VectorRef<'_>>> {
        let mut out = Vec::new();
        for id in set.iter() {
            let vecs = self
                .assignment
                .get(&id)
                .ok_or(Error::UnknownParticipant(id))?;
            out.extend(vecs.iter().enumerate().map(|(index, v)| VectorRef {
                participant: id,
                index,
                vector: v,
            }));
        }
        Ok(out)
    }

    /// Coefficients reconstructing the target from the vectors of `set`, if any.
    pub fn reconstruction(&self, set: &ParticipantSet) -> Result<Option<Vec<u64>>> {
        let vecs: Vec<Vec<u64>> = self
            .vectors_of(set)?
            .into_iter()
            .map(|r| r.vector.to_vec())
            .collect();
        span_membership(&self.field, &vecs, &self.target)
    }

    /// True iff the target lies in the span of the vectors of `set`.
    pub fn realizes(&self, set: &ParticipantSet) -> Result<bool> {
        Ok(self.reconstruction(set)?.is_some())
    }

    /// Builds a program realizing `gen(generators)`.
    ///
    /// Coordinate 0 carries the target `e_0`. Each generator `B`, in canonical order,
    /// gets `|B|-1` fresh standard basis vectors for its smallest members, and its
    /// largest member gets `e_0` minus their sum. The dimension is `1 + Σ (|B|-1)`.
    pub fn from_generators(generators: &[ParticipantSet], p: u64) -> Result<Self> {
        let field = PrimeField::new(p)?;
        let mut gens = generators.to_vec();
        gens.sort();
        gens.dedup();
        if let Some(empty) = gens.iter().find(|g| g.is_empty()) {
            return Err(Error::EmptyGenerator(empty.clone()));
        }
        let dim = 1 + gens.iter().map(|g| g.len() - 1).sum::<usize>();
        let mut assignment: BTreeMap<ParticipantId, Vec<Vec<u64>>> = BTreeMap::new();
        let mut next = 1;
        for g in &gens {
            let members: Vec<ParticipantId> = g.iter().collect();
            let (last, first) = members.split_last().expect("non-empty generator");
            let mut completing = vec![0; dim];
            completing[0] = 1;
            for &id in first {
                let mut fresh = vec![0; dim];
                fresh[next] = 1;
                completing[next] = field.neg(1);
                next += 1;
                assignment.entry(id).or_default().push(fresh);
            }
            assignment.entry(*last).or_default().push(completing);
        }
        let mut target = vec![0; dim];
        target[0] = 1;
        SpanProgram::new(field, target, assignment)
    }

    /// Minimal qualified subsets of `universe`, by brute force. Members of the
    /// universe without assigned vectors are treated as holding none.
    pub fn realized_structure(
        &self,
        universe: &ParticipantSet,
        bound: usize,
    ) -> Result<Vec<ParticipantSet>> {
        if universe.len() > bound {
            return Err(Error::UniverseTooLarge {
                size: universe.len(),
                bound,
            });
        }
        let known: ParticipantSet = universe
            .iter()
            .filter(|id| self.assignment.contains_key(id))
            .collect();
        let mut qualified = Vec::new();
        for set in universe.subsets() {
            if self.realizes(&set.intersection(&known))? {
                qualified.push(set);
            }
        }
        Ok(minimize_generators(&qualified))
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[u64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = format!(
            "span v1\np {}\ndim {}\ntarget {}\n",
            self.field.modulus(),
            self.dim,
            join(&self.target)
        );
        for (id, vecs) in &self.assignment {
            for v in vecs {
                out.push_str(&format!("vec {id} {}\n", join(v)));
            }
        }
        out
    }

    pub fn parse(input: &str) -> Result<Self> {
        let mut lines = text::lines(input);
        text::expect_header(&mut lines, "span v1")?;
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Format {
                line: 0,
                msg: format!("missing `{what}` line"),
            })
        };
        let line = next("p")?;
        let mut toks = line.keyword("p")?;
        let p: u64 = line.parse_one(toks.next().ok_or_else(|| line.err("missing prime"))?)?;
        let field = PrimeField::new(p).map_err(|e| line.err(e.to_string()))?;
        let line = next("dim")?;
        let mut toks = line.keyword("dim")?;
        let dim: usize = line.parse_one(toks.next().ok_or_else(|| line.err("missing dim"))?)?;
        let line = next("target")?;
        let target: Vec<u64> = line.parse_all(line.keyword("target")?)?;
        if target.len() != dim {
            return Err(line.err(format!("target has {} entries, dim is {dim}", target.len())));
        }
        let mut assignment: BTreeMap<ParticipantId, Vec<Vec<u64>>> = BTreeMap::new();
        for line in lines {
            let mut toks = line.keyword("vec")?;
            let id: u32 = line.parse_one(toks.next().ok_or_else(|| line.err("missing id"))?)?;
            let v: Vec<u64> = line.parse_all(toks)?;
            if v.len() != dim {
                return Err(line.err(format!("vector has {} entries, dim is {dim}", v.len())));
            }
            assignment.entry(ParticipantId(id)).or_default().push(v);
        }
        SpanProgram::new(field, target, assignment).map_err(|e| Error::Format {
            line: 0,
            msg: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access_structure::threshold_generators;

    fn fam(sets: &[&[u32]]) -> Vec<ParticipantSet> {
        sets.iter().map(|s| ParticipantSet::from(*s)).collect()
    }

    #[test]
    fn span_membership_examples() {
        let f2 = PrimeField::new(2).unwrap();
        assert_eq!(
            span_membership(&f2, &[vec![1, 0], vec![0, 1]], &[1, 1]).unwrap(),
            Some(vec![1, 1])
        );
        assert_eq!(span_membership(&f2, &[vec![1, 1]], &[1, 0]).unwrap(), None);
    }

    #[test]
    fn span_membership_gf5_canonical_solution() {
        // (2,3) and (1,4) are proportional mod 5; the first column pivots.
        let f5 = PrimeField::new(5).unwrap();
        let vecs = [vec![2, 3], vec![1, 4]];
        let coeffs = span_membership(&f5, &vecs, &[4, 1]).unwrap().unwrap();
        assert_eq!(coeffs, vec![2, 0]);
        // the alternative solution (0, 4) also reproduces the target
        for sol in [coeffs, vec![0, 4]] {
            let combo: Vec<u64> = (0..2)
                .map(|r| f5.add(f5.mul(sol[0], vecs[0][r]), f5.mul(sol[1], vecs[1][r])))
                .collect();
            assert_eq!(combo, vec![4, 1]);
        }
    }

    #[test]
    fn span_membership_dimension_mismatch() {
        let f2 = PrimeField::new(2).unwrap();
        assert_eq!(
            span_membership(&f2, &[vec![1, 0, 1]], &[1, 0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
    }

    #[test]
    fn from_generators_single_pair() {
        let prog = SpanProgram::from_generators(&fam(&[&[1, 2]]), 2).unwrap();
        assert_eq!(prog.dim(), 2);
        assert_eq!(prog.target(), &[1, 0]);
        assert_eq!(prog.assignment()[&ParticipantId(1)], vec![vec![0, 1]]);
        assert_eq!(prog.assignment()[&ParticipantId(2)], vec![vec![1, 1]]);
    }

    #[test]
    fn from_generators_threshold() {
        let prog = SpanProgram::from_generators(&threshold_generators(3, 2), 2).unwrap();
        assert_eq!(prog.dim(), 4);
        assert!(prog.realizes(&[1, 2].into()).unwrap());
        assert!(!prog.realizes(&[1].into()).unwrap());
        assert!(!prog.realizes(&ParticipantSet::new()).unwrap());
        let universe: ParticipantSet = (1..=3).collect();
        assert_eq!(
            prog.realized_structure(&universe, BRUTE_FORCE_BOUND)
                .unwrap(),
            threshold_generators(3, 2)
        );
    }

    #[test]
    fn from_generators_singleton_gets_target() {
        let prog = SpanProgram::from_generators(&fam(&[&[1]]), 3).unwrap();
        assert_eq!(prog.dim(), 1);
        assert_eq!(
            prog.assignment()[&ParticipantId(1)],
            vec![prog.target().to_vec()]
        );
        let universe = ParticipantSet::from([1, 2]);
        assert_eq!(
            prog.realized_structure(&universe, 12).unwrap(),
            fam(&[&[1]])
        );
    }

    #[test]
    fn from_generators_errors() {
        assert!(matches!(
            SpanProgram::from_generators(&[ParticipantSet::new()], 2),
            Err(Error::EmptyGenerator(_))
        ));
        assert_eq!(
            SpanProgram::from_generators(&fam(&[&[1, 2]]), 6),
            Err(Error::NotPrime(6))
        );
    }

    #[test]
    fn realizes_unknown_participant() {
        let prog = SpanProgram::from_generators(&fam(&[&[1, 2]]), 2).unwrap();
        assert_eq!(
            prog.realizes(&[1, 9].into()),
            Err(Error::UnknownParticipant(ParticipantId(9)))
        );
    }

    #[test]
    fn realized_structure_bound() {
        let prog = SpanProgram::from_generators(&fam(&[&[1, 2]]), 2).unwrap();
        let universe: ParticipantSet = (1..=13).collect();
        assert!(matches!(
            prog.realized_structure(&universe, BRUTE_FORCE_BOUND),
            Err(Error::UniverseTooLarge { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let prog = SpanProgram::from_generators(&threshold_generators(4, 3), 5).unwrap();
        assert_eq!(SpanProgram::parse(&prog.to_text()).unwrap(), prog);
        assert!(matches!(
            SpanProgram::parse("span v1\np 4\ndim 1\ntarget 1\n"),
            Err(Error::Format { line: 2, .. })
        ));
        assert!(matches!(
            SpanProgram::parse("span v1\np 2\ndim 2\ntarget 1 0\nvec 1 1\n"),
            Err(Error::Format { line: 5, .. })
        ));
    }
}
