//! Monotone access structures and G-delta witnesses over finite truncations.
//!
//! A structure is open (in the Sierpinski product topology) exactly when it is
//! generated by finitely many finite sets, so an open structure is stored as a
//! generator family. A G-delta structure is the intersection of a sequence of open
//! structures; it is stored as a [`GDeltaWitness`], a list of generator families
//! whose generated structures decrease. Infinite participant sets are handled
//! through explicit truncation bounds.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::text;

/// Participants are identified with natural numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParticipantId(pub u32);

impl fmt::Display for ParticipantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for ParticipantId {
    fn from(id: u32) -> Self {
        ParticipantId(id)
    }
}

/// A finite set of participants.
///
/// Sets are ordered canonically: first by size, then lexicographically by their
/// sorted members. All tie-breaking in this crate follows that order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ParticipantSet(BTreeSet<ParticipantId>);

impl ParticipantSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: ParticipantId) -> bool {
        self.0.contains(&id)
    }

    pub fn insert(&mut self, id: ParticipantId) -> bool {
        self.0.insert(id)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = ParticipantId> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &ParticipantSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &ParticipantSet) -> ParticipantSet {
        ParticipantSet(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &ParticipantSet) -> ParticipantSet {
        ParticipantSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &ParticipantSet) -> ParticipantSet {
        ParticipantSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn max(&self) -> Option<ParticipantId> {
        self.0.last().copied()
    }

    /// All subsets, in canonical order. Intended for small universes only.
    pub fn subsets(&self) -> Vec<ParticipantSet> {
        let members: Vec<_> = self.iter().collect();
        let n = members.len();
        assert!(n < 32, "subset enumeration over {n} participants");
        let mut out: Vec<ParticipantSet> = (0u32..(1 << n))
            .map(|mask| {
                members
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &p)| p)
                    .collect()
            })
            .collect();
        out.sort();
        out
    }

    /// Space-separated ids, the form used by the text formats.
    pub fn to_line(&self) -> String {
        self.iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Ord for ParticipantSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl PartialOrd for ParticipantSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ParticipantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<ParticipantId> for ParticipantSet {
    fn from_iter<I: IntoIterator<Item = ParticipantId>>(iter: I) -> Self {
        ParticipantSet(iter.into_iter().collect())
    }
}

impl FromIterator<u32> for ParticipantSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        ParticipantSet(iter.into_iter().map(ParticipantId).collect())
    }
}

impl<const N: usize> From<[u32; N]> for ParticipantSet {
    fn from(ids: [u32; N]) -> Self {
        ids.into_iter().collect()
    }
}

impl From<&[u32]> for ParticipantSet {
    fn from(ids: &[u32]) -> Self {
        ids.iter().copied().collect()
    }
}

impl FromStr for ParticipantSet {
    type Err = Error;

    /// Parses ids separated by whitespace or commas; braces are ignored.
    fn from_str(s: &str) -> Result<Self> {
        s.split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map(ParticipantId)
                    .map_err(|_| Error::InvalidArgument(format!("bad participant id `{t}`")))
            })
            .collect()
    }
}

/// True iff some generator is a subset of `set`.
pub fn gen_membership(generators: &[ParticipantSet], set: &ParticipantSet) -> bool {
    generators.iter().any(|g| g.is_subset(set))
}

/// Canonical antichain generating the same structure, sorted by size then lexicographically.
pub fn minimize_generators(generators: &[ParticipantSet]) -> Vec<ParticipantSet> {
    let mut sorted = generators.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut kept: Vec<ParticipantSet> = Vec::with_capacity(sorted.len());
    for g in sorted {
        // sorted by size, so any absorbing generator is already kept
        if !kept.iter().any(|k| k.is_subset(&g)) {
            kept.push(g);
        }
    }
    kept
}

/// Generators of `gen(a) ∩ gen(b)`: minimal unions of one member of each family.
pub fn intersect_generated(a: &[ParticipantSet], b: &[ParticipantSet]) -> Vec<ParticipantSet> {
    let a = minimize_generators(a);
    let b = minimize_generators(b);
    let unions: Vec<_> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| x.union(y)))
        .collect();
    minimize_generators(&unions)
}

/// All participants mentioned by a family.
pub fn support(generators: &[ParticipantSet]) -> ParticipantSet {
    generators
        .iter()
        .fold(ParticipantSet::new(), |acc, g| acc.union(g))
}

/// An open access structure given by finite generators.
///
/// The public constructor enforces a non-empty family without empty or singleton
/// generators. [`MonotoneStructure::permissive`] skips those checks for intermediate
/// families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneStructure {
    generators: Vec<ParticipantSet>,
    universe_hint: Option<u32>,
}

impl MonotoneStructure {
    pub fn new(generators: Vec<ParticipantSet>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::EmptyStructure);
        }
        for g in &generators {
            match g.len() {
                0 => return Err(Error::EmptyGenerator(g.clone())),
                1 => return Err(Error::SingletonGenerator(g.clone())),
                _ => {}
            }
        }
        Ok(Self::permissive(generators))
    }

    pub fn permissive(generators: Vec<ParticipantSet>) -> Self {
        MonotoneStructure {
            generators: minimize_generators(&generators),
            universe_hint: None,
        }
    }

    pub fn with_universe_hint(mut self, max_index: u32) -> Self {
        self.universe_hint = Some(max_index);
        self
    }

    pub fn universe_hint(&self) -> Option<u32> {
        self.universe_hint
    }

    /// The minimal qualified sets, in canonical order.
    pub fn generators(&self) -> &[ParticipantSet] {
        &self.generators
    }

    pub fn contains(&self, set: &ParticipantSet) -> bool {
        gen_membership(&self.generators, set)
    }

    pub fn participants(&self) -> ParticipantSet {
        support(&self.generators)
    }

    pub fn to_text(&self) -> String {
        structure_to_text(&self.generators)
    }
}

/// Writes a generator family in the `structure v1` format.
pub fn structure_to_text(generators: &[ParticipantSet]) -> String {
    let mut out = String::from("structure v1\n");
    for g in generators {
        out.push_str(&g.to_line());
        out.push('\n');
    }
    out
}

/// Reads a generator family in the `structure v1` format. No validation beyond syntax.
pub fn parse_structure(input: &str) -> Result<Vec<ParticipantSet>> {
    let mut lines = text::lines(input);
    text::expect_header(&mut lines, "structure v1")?;
    lines
        .map(|line| {
            let ids: Vec<u32> = line.parse_all(line.tokens())?;
            Ok(ids.into_iter().collect())
        })
        .collect()
}

/// A finite prefix `B_1, B_2, ..., B_k` of a witness for a G-delta structure
/// `⋂_i gen(B_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GDeltaWitness {
    levels: Vec<Vec<ParticipantSet>>,
    normalized: bool,
}

impl GDeltaWitness {
    /// Wraps raw levels; the normalized flag records whether they form a decreasing chain.
    pub fn from_levels(levels: Vec<Vec<ParticipantSet>>) -> Self {
        let normalized = levels
            .windows(2)
            .all(|w| w[1].iter().all(|b| gen_membership(&w[0], b)));
        GDeltaWitness { levels, normalized }
    }

    pub fn levels(&self) -> &[Vec<ParticipantSet>] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Participants mentioned in the first `levels` levels.
    pub fn participants(&self, levels: usize) -> ParticipantSet {
        self.levels
            .iter()
            .take(levels)
            .fold(ParticipantSet::new(), |acc, l| acc.union(&support(l)))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("gdelta v1\n");
        out.push_str(&format!("levels {}\n", self.levels.len()));
        for (i, level) in self.levels.iter().enumerate() {
            if i > 0 {
                out.push_str("---\n");
            }
            for g in level {
                out.push_str(&g.to_line());
                out.push('\n');
            }
        }
        out
    }

    /// Reads the `gdelta v1` format. The optional `levels <k>` line disambiguates
    /// empty levels.
    pub fn parse(input: &str) -> Result<Self> {
        Ok(Self::from_levels(parse_layers(input)?))
    }
}

/// Reads the raw level list of a `gdelta v1` file without checking the chain condition.
pub fn parse_layers(input: &str) -> Result<Vec<Vec<ParticipantSet>>> {
    let mut lines = text::lines(input).peekable();
    text::expect_header(&mut lines, "gdelta v1")?;
    let mut declared = None;
    if let Some(line) = lines.peek() {
        if line.text.starts_with("levels") {
            let mut toks = line.keyword("levels")?;
            let k: usize = line.parse_one(toks.next().ok_or_else(|| line.err("missing count"))?)?;
            declared = Some((k, line.number));
            lines.next();
        }
    }
    let mut levels: Vec<Vec<ParticipantSet>> = Vec::new();
    let mut current: Vec<ParticipantSet> = Vec::new();
    let mut any = false;
    for line in lines {
        any = true;
        if line.text == "---" {
            levels.push(std::mem::take(&mut current));
            continue;
        }
        let ids: Vec<u32> = line.parse_all(line.tokens())?;
        current.push(ids.into_iter().collect());
    }
    if any {
        levels.push(current);
    }
    if let Some((k, number)) = declared {
        if k == 1 && levels.is_empty() {
            levels.push(Vec::new());
        }
        if k != levels.len() {
            return Err(Error::Format {
                line: number,
                msg: format!("declared {k} levels, found {}", levels.len()),
            });
        }
    }
    Ok(levels)
}

/// Normalizes arbitrary open layers into a decreasing chain: level `i` generates
/// `⋂_{j≤i} gen(layer_j)`.
pub fn normalize_witness(layers: &[Vec<ParticipantSet>]) -> GDeltaWitness {
    let mut levels: Vec<Vec<ParticipantSet>> = Vec::with_capacity(layers.len());
    for layer in layers {
        let next = match levels.last() {
            None => minimize_generators(layer),
            Some(prev) => intersect_generated(prev, layer),
        };
        levels.push(next);
    }
    GDeltaWitness {
        levels,
        normalized: true,
    }
}

/// True iff `set ∈ gen(B_i)` for every `i ≤ up_to_level`.
pub fn gdelta_membership(
    witness: &GDeltaWitness,
    set: &ParticipantSet,
    up_to_level: usize,
) -> Result<bool> {
    if !witness.is_normalized() {
        return Err(Error::NotNormalized);
    }
    if up_to_level > witness.depth() {
        return Err(Error::LevelOutOfRange {
            level: up_to_level,
            depth: witness.depth(),
        });
    }
    Ok(witness.levels[..up_to_level]
        .iter()
        .all(|level| gen_membership(level, set)))
}

/// Names of the builtin example structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinName {
    AllInfinite,
    Forbidden,
    GridRows,
    Disjoint,
}

impl FromStr for BuiltinName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_infinite" => Ok(BuiltinName::AllInfinite),
            "forbidden" => Ok(BuiltinName::Forbidden),
            "grid_rows" => Ok(BuiltinName::GridRows),
            "disjoint" => Ok(BuiltinName::Disjoint),
            other => Err(Error::UnknownBuiltin(other.to_string())),
        }
    }
}

/// Truncation parameters for [`builtin_structure`].
#[derive(Debug, Clone, Default)]
pub struct BuiltinParams {
    /// Largest participant index; participants are `1..=max_index`.
    pub max_index: u32,
    /// Number of witness levels to emit.
    pub levels: usize,
    /// Grid side (grid_rows) or number of progressions (disjoint).
    pub m: u32,
    /// Forbidden sets `F_1, ..., F_n`.
    pub forbidden: Vec<ParticipantSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Builtin {
    Open(MonotoneStructure),
    GDelta(GDeltaWitness),
}

impl Builtin {
    pub fn to_text(&self) -> String {
        match self {
            Builtin::Open(s) => s.to_text(),
            Builtin::GDelta(w) => w.to_text(),
        }
    }
}

fn k_subsets(universe: &[u32], k: usize) -> Vec<ParticipantSet> {
    fn rec(rest: &[u32], k: usize, acc: &mut Vec<u32>, out: &mut Vec<ParticipantSet>) {
        if k == 0 {
            out.push(acc.iter().copied().collect());
            return;
        }
        for (i, &x) in rest.iter().enumerate() {
            if rest.len() - i < k {
                break;
            }
            acc.push(x);
            rec(&rest[i + 1..], k - 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(universe, k, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All `k`-element subsets of `{1..=n}`, canonical order.
pub fn threshold_generators(n: u32, k: usize) -> Vec<ParticipantSet> {
    let universe: Vec<u32> = (1..=n).collect();
    k_subsets(&universe, k)
}

/// The `i`-th progression `{ n ≤ max_index : n ≡ i (mod m) }` for `i` in `1..=m`.
pub fn progression(i: u32, m: u32, max_index: u32) -> ParticipantSet {
    (1..=max_index).filter(|n| n % m == i % m).collect()
}

/// Row `r` (1-based) of the `m × m` grid, cells `(r, c)` flattened to `(r-1)·m + c`.
pub fn grid_row(r: u32, m: u32) -> ParticipantSet {
    (1..=m).map(|c| (r - 1) * m + c).collect()
}

/// Builds one of the example structures at the given truncation.
///
/// * `AllInfinite`: levels `B_i` = all `i`-subsets of `{1..=max_index}`.
/// * `Forbidden`: level `n` generates the sets meeting the complement of each of
///   `F_1..F_n`.
/// * `GridRows`: generators are the rows of the `m × m` grid.
/// * `Disjoint`: generators are `m` residue classes of `{1..=max_index}`.
pub fn builtin_structure(name: BuiltinName, params: &BuiltinParams) -> Result<Builtin> {
    let positive = |v: u64, what: &str| {
        if v == 0 {
            Err(Error::InvalidArgument(format!("{what} must be positive")))
        } else {
            Ok(())
        }
    };
    match name {
        BuiltinName::AllInfinite => {
            positive(params.max_index.into(), "max_index")?;
            positive(params.levels as u64, "levels")?;
            let levels = (1..=params.levels)
                .map(|i| threshold_generators(params.max_index, i))
                .collect();
            Ok(Builtin::GDelta(GDeltaWitness::from_levels(levels)))
        }
        BuiltinName::Forbidden => {
            positive(params.max_index.into(), "max_index")?;
            positive(params.levels as u64, "levels")?;
            if params.forbidden.is_empty() {
                return Err(Error::InvalidArgument("no forbidden sets given".into()));
            }
            let universe: ParticipantSet = (1..=params.max_index).collect();
            let layers: Vec<Vec<ParticipantSet>> = params
                .forbidden
                .iter()
                .take(params.levels)
                .map(|f| {
                    universe
                        .difference(f)
                        .iter()
                        .map(|p| std::iter::once(p).collect())
                        .collect()
                })
                .collect();
            Ok(Builtin::GDelta(normalize_witness(&layers)))
        }
        BuiltinName::GridRows => {
            positive(params.m.into(), "m")?;
            let rows = (1..=params.m).map(|r| grid_row(r, params.m)).collect();
            Ok(Builtin::Open(
                MonotoneStructure::permissive(rows).with_universe_hint(params.m * params.m),
            ))
        }
        BuiltinName::Disjoint => {
            positive(params.m.into(), "m")?;
            positive(params.max_index.into(), "max_index")?;
            let sets = (1..=params.m)
                .map(|i| progression(i, params.m, params.max_index))
                .collect();
            Ok(Builtin::Open(
                MonotoneStructure::permissive(sets).with_universe_hint(params.max_index),
            ))
        }
    }
}

/// Refutes a candidate witness for the structure generated by pairwise disjoint sets.
///
/// For each `i`, picks the canonically smallest `B_i` in level `i` with `B_i ⊆ A_i`
/// and returns `B = ⋃ B_i`. `B` lies in every `gen(level_i)` but meets each `A_i` in a
/// proper subset, so it extends no `A_i` while the witness accepts it.
pub fn diagonal_refutation(
    disjoint_sets: &[ParticipantSet],
    witness: &GDeltaWitness,
) -> Result<ParticipantSet> {
    if disjoint_sets.len() > witness.depth() {
        return Err(Error::LevelOutOfRange {
            level: disjoint_sets.len(),
            depth: witness.depth(),
        });
    }
    for (i, a) in disjoint_sets.iter().enumerate() {
        for b in &disjoint_sets[i + 1..] {
            if !a.intersection(b).is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "{a} and {b} are not disjoint"
                )));
            }
        }
    }
    let mut refutation = ParticipantSet::new();
    for (i, a) in disjoint_sets.iter().enumerate() {
        let level = i + 1;
        let mut candidates: Vec<&ParticipantSet> = witness.levels[i]
            .iter()
            .filter(|g| g.is_subset(a))
            .collect();
        candidates.sort();
        let chosen = candidates.first().ok_or_else(|| Error::CoverageFailure {
            level,
            set: a.clone(),
        })?;
        refutation = refutation.union(chosen);
    }
    for (i, level) in witness.levels[..disjoint_sets.len()].iter().enumerate() {
        if !gen_membership(level, &refutation) {
            return Err(Error::CoverageFailure {
                level: i + 1,
                set: refutation,
            });
        }
    }
    for (i, a) in disjoint_sets.iter().enumerate() {
        if a.is_subset(&refutation) {
            return Err(Error::Unrefuted {
                level: i + 1,
                set: a.clone(),
            });
        }
    }
    Ok(refutation)
}
