//! Scheme-type classification of finite joint distributions.
//!
//! For an unqualified set `B`, write `μ^B(u)` for the marginal of its shares,
//! `μ_s(e)` for the marginal of the secret and `μ^{Bs}(u, e)` for the joint marginal.
//! The scheme is perfect, almost perfect, ramp or almost ramp according to how far the
//! ratio `μ^{Bs}(u,e) / (μ^B(u)·μ_s(e))` may stray from 1.
//!
//! All checks run on atoms. That suffices for arbitrary rectangles `U × E`: summing
//! `c⁻¹·μ^B(u)μ_s(e) ≤ μ^{Bs}(u,e) ≤ c·μ^B(u)μ_s(e)` over `u ∈ U, e ∈ E` gives the
//! same inequality for `U × E`, so the rectangle ratio always lies between the
//! smallest and largest atom ratio. Atoms with `μ^B(u)·μ_s(e) = 0` are skipped; the
//! conditions are vacuous there.
//!
//! On a finite table the almost perfect, ramp and almost ramp conditions coincide:
//! finitely many sets, each with finitely many atoms, so every constant is finite
//! exactly when no atom ratio is zero.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::access_structure::{MonotoneStructure, ParticipantId, ParticipantSet};
use crate::error::{Error, Result};
use crate::text;

pub type Atom = u64;

/// Largest participant count `classify` will enumerate subsets of.
pub const CLASSIFY_BOUND: usize = 16;

/// Exact joint distribution of the shares of some participants and the secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistributionTable {
    participants: Vec<ParticipantId>,
    share_domains: Vec<Vec<Atom>>,
    secret_domain: Vec<Atom>,
    // key: one atom per participant, then the secret atom; zero masses are not stored
    mass: BTreeMap<Vec<Atom>, BigRational>,
}

impl JointDistributionTable {
    /// Validates and builds a table. Participants must be strictly increasing;
    /// duplicate atoms have their masses added.
    pub fn new(
        participants: Vec<ParticipantId>,
        share_domains: Vec<Vec<Atom>>,
        secret_domain: Vec<Atom>,
        mass: impl IntoIterator<Item = (Vec<Atom>, BigRational)>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidTable(msg));
        if participants.windows(2).any(|w| w[0] >= w[1]) {
            return bad("participants must be strictly increasing".into());
        }
        if share_domains.len() != participants.len() {
            return bad(format!(
                "{} share domains for {} participants",
                share_domains.len(),
                participants.len()
            ));
        }
        let mut share_domains = share_domains;
        for d in share_domains.iter_mut() {
            d.sort_unstable();
            d.dedup();
            if d.is_empty() {
                return bad("empty share domain".into());
            }
        }
        let mut secret_domain = secret_domain;
        secret_domain.sort_unstable();
        secret_domain.dedup();
        if secret_domain.len() < 2 {
            return bad("secret domain needs at least two atoms".into());
        }
        let mut table: BTreeMap<Vec<Atom>, BigRational> = BTreeMap::new();
        for (key, m) in mass {
            if key.len() != participants.len() + 1 {
                return bad(format!("atom {key:?} has the wrong arity"));
            }
            for (i, a) in key[..participants.len()].iter().enumerate() {
                if share_domains[i].binary_search(a).is_err() {
                    return bad(format!(
                        "share atom {a} outside the domain of {}",
                        participants[i]
                    ));
                }
            }
            if secret_domain.binary_search(key.last().unwrap()).is_err() {
                return bad(format!(
                    "secret atom {} outside the secret domain",
                    key.last().unwrap()
                ));
            }
            if m.is_negative() {
                return bad(format!("negative mass at {key:?}"));
            }
            *table.entry(key).or_insert_with(BigRational::zero) += m;
        }
        table.retain(|_, m| !m.is_zero());
        let total: BigRational = table.values().sum();
        if !total.is_one() {
            return bad(format!("masses sum to {total}, not 1"));
        }
        Ok(JointDistributionTable {
            participants,
            share_domains,
            secret_domain,
            mass: table,
        })
    }

    pub fn participants(&self) -> &[ParticipantId] {
        &self.participants
    }

    pub fn participant_set(&self) -> ParticipantSet {
        self.participants.iter().copied().collect()
    }

    pub fn share_domains(&self) -> &[Vec<Atom>] {
        &self.share_domains
    }

    pub fn secret_domain(&self) -> &[Atom] {
        &self.secret_domain
    }

    /// Positive-mass atoms.
    pub fn masses(&self) -> &BTreeMap<Vec<Atom>, BigRational> {
        &self.mass
    }

    /// Marginal of the shares of `set` together with the secret.
    pub fn marginal(&self, set: &ParticipantSet) -> Result<Marginal> {
        let positions: Vec<usize> = set
            .iter()
            .map(|id| {
                self.participants
                    .binary_search(&id)
                    .map_err(|_| Error::UnknownParticipant(id))
            })
            .collect::<Result<_>>()?;
        let mut m = Marginal::new(set.clone());
        for (key, mass) in &self.mass {
            let shares: Vec<Atom> = positions.iter().map(|&i| key[i]).collect();
            m.add(shares, *key.last().unwrap(), mass);
        }
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[Atom]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::from("table v1\n");
        let ids: Vec<Atom> = self.participants.iter().map(|p| p.0 as Atom).collect();
        out.push_str(
            &format!("participants {}\n", join(&ids)).replace("participants \n", "participants\n"),
        );
        out.push_str(&format!("secretdomain {}\n", join(&self.secret_domain)));
        for (id, d) in self.participants.iter().zip(&self.share_domains) {
            out.push_str(&format!("domain {id} {}\n", join(d)));
        }
        for (key, m) in &self.mass {
            out.push_str(&format!("p {} {}\n", join(key), format_rational(m)));
        }
        out
    }

    pub fn parse(input: &str) -> Result<Self> {
        let mut lines = text::lines(input);
        text::expect_header(&mut lines, "table v1")?;
        let missing = |what: &str| Error::Format {
            line: 0,
            msg: format!("missing `{what}` line"),
        };
        let line = lines.next().ok_or_else(|| missing("participants"))?;
        let ids: Vec<u32> = line.parse_all(line.keyword("participants")?)?;
        let line = lines.next().ok_or_else(|| missing("secretdomain"))?;
        let secret_domain: Vec<Atom> = line.parse_all(line.keyword("secretdomain")?)?;
        let mut domains: BTreeMap<u32, Vec<Atom>> = BTreeMap::new();
        let mut masses = Vec::new();
        for line in lines {
            let mut toks = line.tokens();
            match toks.next() {
                Some("domain") => {
                    let id: u32 =
                        line.parse_one(toks.next().ok_or_else(|| line.err("missing id"))?)?;
                    if !ids.contains(&id) {
                        return Err(line.err(format!("domain for unlisted participant {id}")));
                    }
                    domains.insert(id, line.parse_all(toks)?);
                }
                Some("p") => {
                    let toks: Vec<&str> = toks.collect();
                    let (mass, atoms) = toks
                        .split_last()
                        .ok_or_else(|| line.err("empty mass line"))?;
                    let key: Vec<Atom> = atoms
                        .iter()
                        .map(|t| line.parse_one(t))
                        .collect::<Result<_>>()?;
                    let mass =
                        parse_rational(mass).map_err(|_| line.err(format!("bad mass `{mass}`")))?;
                    masses.push((key, mass));
                }
                _ => return Err(line.err("expected `domain` or `p`")),
            }
        }
        let share_domains = ids
            .iter()
            .map(|id| {
                domains.remove(id).ok_or_else(|| Error::Format {
                    line: 0,
                    msg: format!("no domain for participant {id}"),
                })
            })
            .collect::<Result<_>>()?;
        JointDistributionTable::new(
            ids.into_iter().map(ParticipantId).collect(),
            share_domains,
            secret_domain,
            masses,
        )
        .map_err(|e| Error::Format {
            line: 0,
            msg: e.to_string(),
        })
    }
}

/// `a/b`, or just `a` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> std::result::Result<BigRational, ()> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| ())?;
    let d: BigInt = d.parse().map_err(|_| ())?;
    if d.is_zero() {
        return Err(());
    }
    Ok(BigRational::new(n, d))
}

/// Marginal distributions for one participant set: `μ^{Bs}`, `μ^B` and `μ_s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marginal {
    pub set: ParticipantSet,
    pub joint: BTreeMap<(Vec<Atom>, Atom), BigRational>,
    pub shares: BTreeMap<Vec<Atom>, BigRational>,
    pub secret: BTreeMap<Atom, BigRational>,
}

/// One atom that breaks a condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub set: ParticipantSet,
    pub shares: Vec<Atom>,
    /// The excluded secret, or `None` for a recovery failure.
    pub secret: Option<Atom>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let u = self
            .shares
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",");
        match self.secret {
            Some(e) => write!(f, "exclusion B={} u=({u}) e={e}", self.set),
            None => write!(f, "recovery A={} u=({u}) ambiguous", self.set),
        }
    }
}

impl Marginal {
    fn new(set: ParticipantSet) -> Self {
        Marginal {
            set,
            joint: BTreeMap::new(),
            shares: BTreeMap::new(),
            secret: BTreeMap::new(),
        }
    }

    pub(crate) fn add(&mut self, shares: Vec<Atom>, secret: Atom, mass: &BigRational) {
        *self.secret.entry(secret).or_insert_with(BigRational::zero) += mass;
        *self
            .shares
            .entry(shares.clone())
            .or_insert_with(BigRational::zero) += mass;
        *self
            .joint
            .entry((shares, secret))
            .or_insert_with(BigRational::zero) += mass;
    }

    pub(crate) fn from_parts(
        set: ParticipantSet,
        entries: impl IntoIterator<Item = (Vec<Atom>, Atom, BigRational)>,
    ) -> Self {
        let mut m = Marginal::new(set);
        for (u, e, mass) in entries {
            m.add(u, e, &mass);
        }
        m
    }

    fn joint_at(&self, u: &[Atom], e: Atom) -> BigRational {
        self.joint
            .get(&(u.to_vec(), e))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Share atoms with positive mass that leave more than one secret possible.
    pub fn ambiguous_atoms(&self) -> Vec<Vec<Atom>> {
        let mut counts: BTreeMap<&Vec<Atom>, usize> = BTreeMap::new();
        for ((u, _), m) in &self.joint {
            if !m.is_zero() {
                *counts.entry(u).or_default() += 1;
            }
        }
        counts
            .into_iter()
            .filter(|(_, c)| *c > 1)
            .map(|(u, _)| u.clone())
            .collect()
    }

    /// True iff every positive share atom determines the secret.
    pub fn recovers(&self) -> bool {
        self.ambiguous_atoms().is_empty()
    }

    /// Atoms `(u, e)` with positive marginals but zero joint mass.
    pub fn exclusions(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (u, mu_u) in &self.shares {
            for (&e, mu_e) in &self.secret {
                if mu_u.is_zero() || mu_e.is_zero() {
                    continue;
                }
                if self.joint_at(u, e).is_zero() {
                    out.push(Violation {
                        set: self.set.clone(),
                        shares: u.clone(),
                        secret: Some(e),
                    });
                }
            }
        }
        out
    }

    /// Smallest `c` with `c⁻¹ ≤ μ^{Bs}(u,e) / (μ^B(u)·μ_s(e)) ≤ c` on all positive atoms.
    pub fn min_c(&self) -> Bound {
        let mut c = BigRational::one();
        for (u, mu_u) in &self.shares {
            for (&e, mu_e) in &self.secret {
                let product = mu_u * mu_e;
                if product.is_zero() {
                    continue;
                }
                let joint = self.joint_at(u, e);
                if joint.is_zero() {
                    return Bound::Infinite;
                }
                let ratio = joint / product;
                let worst = if ratio >= BigRational::one() {
                    ratio
                } else {
                    ratio.recip()
                };
                if worst > c {
                    c = worst;
                }
            }
        }
        Bound::Finite(c)
    }
}

/// A ratio bound: an exact rational or infinity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bound {
    Finite(BigRational),
    Infinite,
}

impl Bound {
    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Bound::Finite(c) if c.is_one())
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(c) => write!(f, "{}", format_rational(c)),
            Bound::Infinite => write!(f, "inf"),
        }
    }
}

/// True iff for every positive `A`-share atom exactly one secret has positive mass.
pub fn recovery_check(table: &JointDistributionTable, set: &ParticipantSet) -> Result<bool> {
    Ok(table.marginal(set)?.recovers())
}

pub fn min_c(table: &JointDistributionTable, set: &ParticipantSet) -> Result<Bound> {
    Ok(table.marginal(set)?.min_c())
}

/// The almost-ramp condition for one set: no positive secret is excluded.
pub fn positivity_holds(table: &JointDistributionTable, set: &ParticipantSet) -> Result<bool> {
    Ok(table.marginal(set)?.exclusions().is_empty())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Perfect,
    AlmostPerfect,
    Ramp,
    AlmostRamp,
    None,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Perfect => "perfect",
            Label::AlmostPerfect => "almost_perfect",
            Label::Ramp => "ramp",
            Label::AlmostRamp => "almost_ramp",
            Label::None => "none",
        })
    }
}

/// Truth values of the four conditions on the unqualified sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conditions {
    pub perfect: bool,
    pub almost_perfect: bool,
    pub ramp: bool,
    pub almost_ramp: bool,
}

impl Conditions {
    /// perfect ⇒ almost perfect ⇒ ramp ⇒ almost ramp.
    pub fn chain_holds(&self) -> bool {
        (!self.perfect || self.almost_perfect)
            && (!self.almost_perfect || self.ramp)
            && (!self.ramp || self.almost_ramp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub label: Label,
    /// Global constant, when every `c_B` is finite.
    pub c: Option<BigRational>,
    /// `c_B` for every unqualified set, canonical order.
    pub c_by_set: BTreeMap<ParticipantSet, Bound>,
    pub conditions: Conditions,
    /// Whether every minimal qualified set recovers the secret.
    pub recovers: bool,
    pub violations: Vec<Violation>,
}

impl Classification {
    pub fn to_text(&self) -> String {
        let mut out = format!("label {}\n", self.label);
        match &self.c {
            Some(c) => out.push_str(&format!("c {}\n", format_rational(c))),
            None => out.push_str("c inf\n"),
        }
        for (set, b) in &self.c_by_set {
            out.push_str(&format!("c_B {} {b}\n", set_token(set)));
        }
        for v in &self.violations {
            out.push_str(&format!("violation {v}\n"));
        }
        out
    }
}

fn set_token(set: &ParticipantSet) -> String {
    set.to_string()
}

/// Classifies with marginals supplied by `marginal_for`, which must return the joint
/// marginal of the shares of a given subset of `participants` and the secret.
pub fn classify_with<F>(
    participants: &ParticipantSet,
    structure: &MonotoneStructure,
    marginal_for: F,
) -> Result<Classification>
where
    F: Fn(&ParticipantSet) -> Result<Marginal>,
{
    if let Some(unknown) = structure
        .participants()
        .iter()
        .find(|p| !participants.contains(*p))
    {
        return Err(Error::UnknownParticipant(unknown));
    }
    if participants.len() > CLASSIFY_BOUND {
        return Err(Error::UniverseTooLarge {
            size: participants.len(),
            bound: CLASSIFY_BOUND,
        });
    }
    let mut violations = Vec::new();
    let mut recovers = true;
    for a in structure.generators() {
        let m = marginal_for(a)?;
        if let Some(u) = m.ambiguous_atoms().into_iter().next() {
            recovers = false;
            violations.push(Violation {
                set: a.clone(),
                shares: u,
                secret: None,
            });
        }
    }
    let mut c_by_set = BTreeMap::new();
    let mut exclusion_free = true;
    for b in participants.subsets() {
        if structure.contains(&b) {
            continue;
        }
        let m = marginal_for(&b)?;
        let ex = m.exclusions();
        exclusion_free &= ex.is_empty();
        violations.extend(ex);
        c_by_set.insert(b, m.min_c());
    }
    let all_finite = c_by_set.values().all(Bound::is_finite);
    let conditions = Conditions {
        perfect: c_by_set.values().all(Bound::is_one),
        almost_perfect: all_finite,
        ramp: all_finite,
        almost_ramp: exclusion_free,
    };
    assert!(
        conditions.chain_holds(),
        "implication chain broken: {conditions:?}"
    );
    assert_eq!(
        conditions.almost_perfect, conditions.almost_ramp,
        "finite tables: bounded ratios must coincide with positivity"
    );
    let c = all_finite.then(|| {
        c_by_set
            .values()
            .filter_map(|b| match b {
                Bound::Finite(c) => Some(c.clone()),
                Bound::Infinite => None,
            })
            .max()
            .unwrap_or_else(BigRational::one)
    });
    let label = if !recovers {
        Label::None
    } else if conditions.perfect {
        Label::Perfect
    } else if conditions.almost_perfect {
        Label::AlmostPerfect
    } else {
        Label::None
    };
    Ok(Classification {
        label,
        c,
        c_by_set,
        conditions,
        recovers,
        violations,
    })
}

/// Classifies `table` against `structure`, checking every unqualified subset of the
/// table's participants.
pub fn classify(
    table: &JointDistributionTable,
    structure: &MonotoneStructure,
) -> Result<Classification> {
    classify_with(&table.participant_set(), structure, |s| table.marginal(s))
}

/// Participants `p` for which some unqualified `B` makes `B ∪ {p}` qualified.
pub fn important_participants_by<F>(universe: &ParticipantSet, qualified: F) -> ParticipantSet
where
    F: Fn(&ParticipantSet) -> bool,
{
    let subsets = universe.subsets();
    universe
        .iter()
        .filter(|&p| {
            subsets.iter().any(|b| {
                if b.contains(p) || qualified(b) {
                    return false;
                }
                let mut with = b.clone();
                with.insert(p);
                qualified(&with)
            })
        })
        .collect()
}

pub fn important_participants(
    structure: &MonotoneStructure,
    universe: &ParticipantSet,
) -> ParticipantSet {
    important_participants_by(universe, |s| structure.contains(s))
}
