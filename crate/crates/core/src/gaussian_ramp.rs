//! Real span programs and the Gaussian scheme.
//!
//! A [`HilbertProgram`] assigns real vectors to participants in a finite-dimensional
//! inner-product space; at finite dimension the closure of a span is the span
//! itself, so a set is qualified when the target lies in the span of its vectors.
//!
//! # The Gaussian scheme
//!
//! Draw an independent standard normal `ξ_α` per coordinate and set
//! `ξ_a = Σ a_α ξ_α`. Participant vectors `a` get `ξ_a` as shares and the secret is
//! `ξ_v` for the target `v`, or its fractional part in the wrapped variant. The
//! `ξ_a` are jointly Gaussian with covariance `<a, b>`.
//!
//! For a set `B` with span `L`, decompose `v = v₁ + v₂` with `v₂ ∈ L` and `v₁ ⊥ L`.
//! Then `ξ_{v₁}` is independent of the shares of `B`, so given those shares the
//! secret is normal with mean `ξ_{v₂}` (a linear function of the shares) and
//! variance `‖v₁‖²`. When `‖v₁‖ > 0` the shares leave the secret with a
//! non-degenerate normal law.
//!
//! # The ramp certificate
//!
//! Let `f_σ` range over wrapped normal densities of standard deviation `σ` and write
//! `c(σ) = max f_σ / min f_σ` (see [`crate::wrapped`]). Every density on `[0, 1)`
//! has `min ≤ 1 ≤ max`. Given the shares of `B`, the wrapped secret has density
//! `g = f_{‖v₁‖}` (some mean) and unconditionally it has density `h = f_{‖v‖}`, so
//!
//! ```text
//! g/h ≤ max g / min h ≤ c(‖v₁‖) · min g / min h ≤ c(‖v₁‖) · c(‖v‖),
//! ```
//!
//! and symmetrically from below. Integrating over a set of secrets and a set of
//! share values keeps the same bounds, so `c_B = c(‖v₁‖) · c(‖v‖)` works for every
//! rectangle.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;

use crate::access_structure::{GDeltaWitness, ParticipantId, ParticipantSet};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::text;
use crate::wrapped::wrapped_density_bounds;

/// Residual norms at most `TAU_RANK · ‖v‖` count as zero.
pub const TAU_RANK: f64 = 1e-9;

/// Regression residual variance must land within this many standard errors.
pub const VARIANCE_SE_FACTOR: f64 = 4.0;

/// Histogram ratios may exceed the certified band by this many standard errors.
pub const HISTOGRAM_SE_FACTOR: f64 = 5.0;

pub const HISTOGRAM_BINS: usize = 20;
pub const PHASE_GROUPS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct HilbertProgram {
    dim: usize,
    target: Vec<f64>,
    assignment: BTreeMap<ParticipantId, Vec<Vec<f64>>>,
    level_targets: Vec<Vec<Rational64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl HilbertProgram {
    pub fn new(
        target: Vec<f64>,
        assignment: BTreeMap<ParticipantId, Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let dim = target.len();
        if target.iter().any(|x| !x.is_finite()) || target.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidArgument(
                "target must be finite and non-zero".into(),
            ));
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
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "participant {id} has a non-finite coordinate"
                    )));
                }
            }
        }
        Ok(HilbertProgram {
            dim,
            target,
            assignment,
            level_targets: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn assignment(&self) -> &BTreeMap<ParticipantId, Vec<Vec<f64>>> {
        &self.assignment
    }

    /// Exact coordinates of `v_1, ..., v_k` on `e_1, ..., e_k` for programs built
    /// from a witness; empty otherwise.
    pub fn level_targets(&self) -> &[Vec<Rational64>] {
        &self.level_targets
    }

    pub fn participants(&self) -> ParticipantSet {
        self.assignment.keys().copied().collect()
    }

    /// Vectors of `set` in participant then index order. Members without vectors
    /// contribute nothing.
    pub fn vectors_of(&self, set: &ParticipantSet) -> Vec<(ParticipantId, usize, &[f64])> {
        set.iter()
            .filter_map(|id| self.assignment.get(&id).map(|vs| (id, vs)))
            .flat_map(|(id, vs)| {
                vs.iter()
                    .enumerate()
                    .map(move |(i, v)| (id, i, v.as_slice()))
            })
            .collect()
    }

    pub fn all_vectors(&self) -> Vec<(ParticipantId, usize, &[f64])> {
        self.vectors_of(&self.participants())
    }

    /// True iff the target lies in the span of the vectors of `set`.
    pub fn realizes(&self, set: &ParticipantSet) -> bool {
        orthogonal_decompose(self, set).v1_norm_sq == 0.0
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = format!(
            "hilbert v1\ndim {}\ntarget {}\n",
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
        text::expect_header(&mut lines, "hilbert v1")?;
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Format {
                line: 0,
                msg: format!("missing `{what}` line"),
            })
        };
        let line = next("dim")?;
        let mut toks = line.keyword("dim")?;
        let dim: usize = line.parse_one(toks.next().ok_or_else(|| line.err("missing dim"))?)?;
        let line = next("target")?;
        let target: Vec<f64> = line.parse_all(line.keyword("target")?)?;
        if target.len() != dim {
            return Err(line.err(format!("target has {} entries, dim is {dim}", target.len())));
        }
        let mut assignment: BTreeMap<ParticipantId, Vec<Vec<f64>>> = BTreeMap::new();
        for line in lines {
            let mut toks = line.keyword("vec")?;
            let id: u32 = line.parse_one(toks.next().ok_or_else(|| line.err("missing id"))?)?;
            let v: Vec<f64> = line.parse_all(toks)?;
            if v.len() != dim {
                return Err(line.err(format!("vector has {} entries, dim is {dim}", v.len())));
            }
            assignment.entry(ParticipantId(id)).or_default().push(v);
        }
        HilbertProgram::new(target, assignment).map_err(|e| Error::Format {
            line: 0,
            msg: e.to_string(),
        })
    }
}

/// Builds the program for the first `levels` levels of a normalized witness.
///
/// Coordinates `0..levels` carry `e_1, ..., e_levels` and `v_n = Σ_{i≤n} e_i / i`.
/// Every generator `B` at level `n`, in canonical order, gives fresh unit vectors to
/// its `|B|-1` smallest members and `v_n` minus their sum to its largest member.
/// The target is `v_levels`.
pub fn hilbert_from_witness(witness: &GDeltaWitness, levels: usize) -> Result<HilbertProgram> {
    if levels == 0 {
        return Err(Error::InvalidArgument("levels must be at least 1".into()));
    }
    if levels > witness.depth() {
        return Err(Error::LevelOutOfRange {
            level: levels,
            depth: witness.depth(),
        });
    }
    if !witness.is_normalized() {
        return Err(Error::NotNormalized);
    }
    let used = &witness.levels()[..levels];
    let mut sorted: Vec<Vec<_>> = used.to_vec();
    for level in sorted.iter_mut() {
        level.sort();
        level.dedup();
        if let Some(empty) = level.iter().find(|g| g.is_empty()) {
            return Err(Error::EmptyGenerator(empty.clone()));
        }
    }
    let fresh: usize = sorted.iter().flatten().map(|g| g.len() - 1).sum();
    let dim = levels + fresh;
    let v = |n: usize| {
        let mut x = vec![0.0; dim];
        for (i, c) in x.iter_mut().take(n).enumerate() {
            *c = 1.0 / (i + 1) as f64;
        }
        x
    };
    let mut assignment: BTreeMap<ParticipantId, Vec<Vec<f64>>> = BTreeMap::new();
    let mut next = levels;
    for (n, level) in sorted.iter().enumerate() {
        for g in level {
            let members: Vec<ParticipantId> = g.iter().collect();
            let (last, first) = members.split_last().expect("non-empty generator");
            let mut completing = v(n + 1);
            for &id in first {
                let mut e = vec![0.0; dim];
                e[next] = 1.0;
                completing[next] = -1.0;
                next += 1;
                assignment.entry(id).or_default().push(e);
            }
            assignment.entry(*last).or_default().push(completing);
        }
    }
    let mut program = HilbertProgram::new(v(levels), assignment)?;
    program.level_targets = (1..=levels)
        .map(|n| (1..=n as i64).map(|i| Rational64::new(1, i)).collect())
        .collect();
    Ok(program)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// The vectors of the set, as (participant, index).
    pub vectors: Vec<(ParticipantId, usize)>,
    /// `‖v₁‖²`, exactly zero when the residual is below the rank tolerance.
    pub v1_norm_sq: f64,
    pub v2_norm_sq: f64,
    pub target_norm_sq: f64,
    /// `v₂ = Σ projection_coeffs[i] · vectors[i]`.
    pub projection_coeffs: Vec<f64>,
    /// Orthonormal basis of the span.
    pub basis: Vec<Vec<f64>>,
    /// `basis[j] = Σ basis_coeffs[j][i] · vectors[i]`.
    pub basis_coeffs: Vec<Vec<f64>>,
    /// `v₁`.
    pub residual: Vec<f64>,
}

/// Projects the target onto the span of the vectors of `set` by pivoted modified
/// Gram-Schmidt with one re-orthogonalization pass.
pub fn orthogonal_decompose(program: &HilbertProgram, set: &ParticipantSet) -> Decomposition {
    let refs = program.vectors_of(set);
    let m = refs.len();
    let mut resid: Vec<Vec<f64>> = refs.iter().map(|r| r.2.to_vec()).collect();
    let mut coeffs: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut c = vec![0.0; m];
            c[i] = 1.0;
            c
        })
        .collect();
    let scale = resid.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let mut used = vec![false; m];
    let mut basis = Vec::new();
    let mut basis_coeffs = Vec::new();
    loop {
        let pick = (0..m)
            .filter(|&i| !used[i])
            .map(|i| (i, norm(&resid[i])))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((i, n)) = pick else { break };
        if n <= 1e-12 * scale || n == 0.0 {
            break;
        }
        used[i] = true;
        let u: Vec<f64> = resid[i].iter().map(|x| x / n).collect();
        let t: Vec<f64> = coeffs[i].iter().map(|x| x / n).collect();
        for j in 0..m {
            if used[j] {
                continue;
            }
            for _ in 0..2 {
                let proj = dot(&resid[j], &u);
                for (x, y) in resid[j].iter_mut().zip(&u) {
                    *x -= proj * y;
                }
                for (x, y) in coeffs[j].iter_mut().zip(&t) {
                    *x -= proj * y;
                }
            }
        }
        basis.push(u);
        basis_coeffs.push(t);
    }
    let v = program.target();
    let mut r = v.to_vec();
    let mut c = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (j, u) in basis.iter().enumerate() {
            let proj = dot(&r, u);
            c[j] += proj;
            for (x, y) in r.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
    }
    let target_norm_sq = dot(v, v);
    let mut v1_norm_sq = dot(&r, &r);
    if v1_norm_sq.sqrt() <= TAU_RANK * target_norm_sq.sqrt() {
        v1_norm_sq = 0.0;
        r.iter_mut().for_each(|x| *x = 0.0);
    }
    let mut projection_coeffs = vec![0.0; m];
    for (cj, t) in c.iter().zip(&basis_coeffs) {
        for (p, ti) in projection_coeffs.iter_mut().zip(t) {
            *p += cj * ti;
        }
    }
    Decomposition {
        vectors: refs.iter().map(|r| (r.0, r.1)).collect(),
        v1_norm_sq,
        v2_norm_sq: dot(&c, &c),
        target_norm_sq,
        projection_coeffs,
        basis,
        basis_coeffs,
        residual: r,
    }
}

/// One draw of the scheme: every share value in (participant, index) order, then
/// the secret.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub shares: Vec<f64>,
    pub secret: f64,
}

impl SampleRecord {
    pub fn to_line(&self) -> String {
        let mut fields: Vec<String> = self.shares.iter().map(|x| x.to_string()).collect();
        fields.push(self.secret.to_string());
        fields.join("\t")
    }
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

fn normals(rng: &mut Stream, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng::standard_normal(rng)).collect()
}

/// Draws `samples` independent records. Coordinate normals come from
/// [`rng::standard_normal`] on the chunked substreams of [`rng::par_samples`].
pub fn simulate(
    program: &HilbertProgram,
    samples: usize,
    seed: u64,
    wrap: bool,
) -> Result<Vec<SampleRecord>> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "at least one sample is required".into(),
        ));
    }
    let vectors: Vec<&[f64]> = program.all_vectors().into_iter().map(|r| r.2).collect();
    Ok(rng::par_samples(samples, seed, |rng| {
        let z = normals(rng, program.dim());
        let secret = dot(program.target(), &z);
        SampleRecord {
            shares: vectors.iter().map(|a| dot(a, &z)).collect(),
            secret: if wrap { frac(secret) } else { secret },
        }
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WrappedReport {
    /// `c(‖v₁‖) · c(‖v‖)`.
    pub c: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Largest standard error among the histogram ratios.
    pub max_standard_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalReport {
    pub set: ParticipantSet,
    pub samples: usize,
    pub v1_norm_sq: f64,
    pub residual_variance: f64,
    pub standard_error: f64,
    pub variance_passed: bool,
    pub wrapped: Option<WrappedReport>,
}

impl ConditionalReport {
    pub fn passed(&self) -> bool {
        self.variance_passed && self.wrapped.as_ref().is_none_or(|w| w.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "set {}\nsamples {}\nv1_norm_sq {}\nresidual_variance {}\nstandard_error {}\nvariance {}\n",
            self.set,
            self.samples,
            self.v1_norm_sq,
            self.residual_variance,
            self.standard_error,
            if self.variance_passed { "pass" } else { "fail" },
        );
        if let Some(w) = &self.wrapped {
            out.push_str(&format!(
                "wrapped_c {}\nratio_min {}\nratio_max {}\nwrapped {}\n",
                w.c,
                w.min_ratio,
                w.max_ratio,
                if w.passed { "pass" } else { "fail" }
            ));
        }
        out.push_str(&format!(
            "verdict {}\n",
            if self.passed() { "pass" } else { "fail" }
        ));
        out
    }
}

struct CheckSample {
    features: Vec<f64>,
    secret: f64,
    mean: f64,
}

/// Ordinary least squares of `y` on the features plus an intercept; returns the
/// residual variance with `n - k - 1` degrees of freedom.
fn residual_variance(rows: &[CheckSample]) -> Result<(f64, usize)> {
    let k = rows.first().map_or(0, |r| r.features.len()) + 1;
    let n = rows.len();
    if n <= k {
        return Err(Error::InvalidArgument(format!(
            "need more than {k} samples for the regression"
        )));
    }
    let mut xtx = DMatrix::<f64>::zeros(k, k);
    let mut xty = DVector::<f64>::zeros(k);
    let design = |r: &CheckSample| {
        let mut x = Vec::with_capacity(k);
        x.push(1.0);
        x.extend_from_slice(&r.features);
        x
    };
    for r in rows {
        let x = design(r);
        for i in 0..k {
            xty[i] += x[i] * r.secret;
            for j in 0..k {
                xtx[(i, j)] += x[i] * x[j];
            }
        }
    }
    let beta = xtx
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("singular regression design".into()))?
        .solve(&xty);
    let rss: f64 = rows
        .iter()
        .map(|r| {
            let fitted: f64 = design(r).iter().zip(beta.iter()).map(|(x, b)| x * b).sum();
            (r.secret - fitted).powi(2)
        })
        .sum();
    let df = n - k;
    Ok((rss / df as f64, df))
}

fn histogram_check(rows: &[CheckSample], v1_norm: f64, v_norm: f64) -> Result<WrappedReport> {
    let c = wrapped_density_bounds(v1_norm)? * wrapped_density_bounds(v_norm)?;
    let bin = |x: f64| ((frac(x) * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
    let group = |m: f64| ((frac(m) * PHASE_GROUPS as f64) as usize).min(PHASE_GROUPS - 1);
    let mut all = [0u64; HISTOGRAM_BINS];
    let mut by_group = [[0u64; HISTOGRAM_BINS]; PHASE_GROUPS];
    for r in rows {
        all[bin(r.secret)] += 1;
        by_group[group(r.mean)][bin(r.secret)] += 1;
    }
    let n = rows.len() as f64;
    let (mut lo, mut hi, mut max_se) = (f64::INFINITY, 0.0f64, 0.0f64);
    let mut passed = true;
    for counts in &by_group {
        let ng: u64 = counts.iter().sum();
        if ng == 0 {
            continue;
        }
        let ng = ng as f64;
        for (b, &count) in counts.iter().enumerate() {
            let q = all[b] as f64 / n;
            if q == 0.0 {
                continue;
            }
            let qg = count as f64 / ng;
            let ratio = qg / q;
            let p = qg.max(q / c).min(1.0);
            let se = (p * (1.0 - p) / ng).sqrt() / q;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            max_se = max_se.max(se);
            let slack = HISTOGRAM_SE_FACTOR * se;
            if ratio < 1.0 / c - slack || ratio > c + slack {
                passed = false;
            }
        }
    }
    Ok(WrappedReport {
        c,
        min_ratio: lo,
        max_ratio: hi,
        max_standard_error: max_se,
        passed,
    })
}

/// Monte Carlo check of the conditional law of the secret given the shares of `set`.
///
/// The unwrapped secret is regressed on the shares (through an orthonormal basis of
/// their span); the residual variance must match `‖v₁‖²` within
/// [`VARIANCE_SE_FACTOR`] standard errors `‖v₁‖² · √(2/df)`. With `wrap`, samples are
/// also grouped by the phase of their conditional mean and the histogram of the
/// wrapped secret in each group is compared against the unconditional histogram;
/// every bin ratio must lie in `[1/c_B, c_B]` up to [`HISTOGRAM_SE_FACTOR`] binomial
/// standard errors.
pub fn conditional_check(
    program: &HilbertProgram,
    set: &ParticipantSet,
    samples: usize,
    seed: u64,
    wrap: bool,
) -> Result<ConditionalReport> {
    let d = orthogonal_decompose(program, set);
    if d.v1_norm_sq == 0.0 {
        return Err(Error::Qualified(set.clone()));
    }
    let vectors: Vec<&[f64]> = program.vectors_of(set).into_iter().map(|r| r.2).collect();
    let rows = rng::par_samples(samples, seed, |rng| {
        let z = normals(rng, program.dim());
        let shares: Vec<f64> = vectors.iter().map(|a| dot(a, &z)).collect();
        CheckSample {
            features: d.basis_coeffs.iter().map(|t| dot(t, &shares)).collect(),
            secret: dot(program.target(), &z),
            mean: dot(&d.projection_coeffs, &shares),
        }
    });
    let (var, df) = residual_variance(&rows)?;
    let se = d.v1_norm_sq * (2.0 / df as f64).sqrt();
    let wrapped = if wrap {
        Some(histogram_check(
            &rows,
            d.v1_norm_sq.sqrt(),
            d.target_norm_sq.sqrt(),
        )?)
    } else {
        None
    };
    Ok(ConditionalReport {
        set: set.clone(),
        samples,
        v1_norm_sq: d.v1_norm_sq,
        residual_variance: var,
        standard_error: se,
        variance_passed: (var - d.v1_norm_sq).abs() <= VARIANCE_SE_FACTOR * se,
        wrapped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access_structure::{gdelta_membership, normalize_witness};

    fn prog(target: &[f64], vecs: &[(u32, &[f64])]) -> HilbertProgram {
        let mut a: BTreeMap<ParticipantId, Vec<Vec<f64>>> = BTreeMap::new();
        for (id, v) in vecs {
            a.entry(ParticipantId(*id)).or_default().push(v.to_vec());
        }
        HilbertProgram::new(target.to_vec(), a).unwrap()
    }

    fn witness(levels: &[&[&[u32]]]) -> GDeltaWitness {
        GDeltaWitness::from_levels(
            levels
                .iter()
                .map(|l| l.iter().map(|s| ParticipantSet::from(*s)).collect())
                .collect(),
        )
    }

    #[test]
    fn witness_construction_trace() {
        let w = witness(&[&[&[1]], &[&[1, 2]]]);
        let p = hilbert_from_witness(&w, 2).unwrap();
        assert_eq!(p.dim(), 3);
        assert_eq!(p.target(), &[1.0, 0.5, 0.0]);
        let a = p.assignment();
        assert_eq!(
            a[&ParticipantId(1)],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]
        );
        assert_eq!(a[&ParticipantId(2)], vec![vec![1.0, 0.5, -1.0]]);
        assert_eq!(
            p.level_targets()[1],
            vec![Rational64::new(1, 1), Rational64::new(1, 2)]
        );
    }

    #[test]
    fn witness_construction_dimension() {
        let p = hilbert_from_witness(&witness(&[&[&[1, 2]]]), 1).unwrap();
        assert_eq!(p.dim(), 2);
        assert!(matches!(
            hilbert_from_witness(&witness(&[&[&[1, 2]]]), 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            hilbert_from_witness(&witness(&[&[&[1, 2]]]), 2),
            Err(Error::LevelOutOfRange { .. })
        ));
        assert_eq!(
            hilbert_from_witness(&witness(&[&[&[1, 2]], &[&[3]]]), 2),
            Err(Error::NotNormalized)
        );
    }

    #[test]
    fn decompose_examples() {
        let p = prog(&[1.0, 0.5], &[(1, &[1.0, 0.0])]);
        let d = orthogonal_decompose(&p, &[1].into());
        assert!((d.v1_norm_sq - 0.25).abs() < 1e-15);
        assert!((d.projection_coeffs[0] - 1.0).abs() < 1e-15);

        let d = orthogonal_decompose(&p, &[2].into());
        assert_eq!(d.v1_norm_sq, 1.25);
        assert!(d.vectors.is_empty());

        let p = prog(&[1.0, 0.0], &[(1, &[1.0, 1.0])]);
        let d = orthogonal_decompose(&p, &[1].into());
        assert!((d.v1_norm_sq - 0.5).abs() < 1e-15);
        assert!((d.residual[0] - 0.5).abs() < 1e-15 && (d.residual[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn decompose_dependent_vectors() {
        let p = prog(
            &[1.0, 1.0, 0.0],
            &[
                (1, &[1.0, 0.0, 0.0]),
                (1, &[2.0, 0.0, 0.0]),
                (2, &[0.0, 1.0, 0.0]),
            ],
        );
        let d = orthogonal_decompose(&p, &[1, 2].into());
        assert_eq!(d.v1_norm_sq, 0.0);
        assert_eq!(d.basis.len(), 2);
        let combo: Vec<f64> = (0..3)
            .map(|k| {
                p.all_vectors()
                    .iter()
                    .zip(&d.projection_coeffs)
                    .map(|(v, c)| c * v.2[k])
                    .sum()
            })
            .collect();
        for (x, y) in combo.iter().zip(p.target()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn realization_matches_membership_for_forbidden_layers() {
        let layers: Vec<Vec<ParticipantSet>> = (1..=4u32)
            .map(|i| {
                let rest: ParticipantSet = (1..=4u32).filter(|&j| j != i).collect();
                vec![rest]
            })
            .collect();
        let w = normalize_witness(&layers);
        for k in 1..=w.depth() {
            let p = hilbert_from_witness(&w, k).unwrap();
            for a in ParticipantSet::from([1, 2, 3, 4, 5]).subsets() {
                assert_eq!(
                    p.realizes(&a),
                    gdelta_membership(&w, &a, k).unwrap(),
                    "k={k} A={a}"
                );
            }
        }
    }

    #[test]
    fn simulate_is_reproducible_and_wraps() {
        let p = prog(&[1.0, 0.5], &[(1, &[1.0, 0.0])]);
        let a = simulate(&p, 1000, 3, true).unwrap();
        assert_eq!(a, simulate(&p, 1000, 3, true).unwrap());
        assert!(a.iter().all(|r| (0.0..1.0).contains(&r.secret)));
        assert!(simulate(&p, 0, 3, false).is_err());
    }

    #[test]
    fn secret_variance_matches_norm() {
        let p = prog(&[1.0, 0.5], &[(1, &[1.0, 0.0])]);
        let xs = simulate(&p, 100_000, 17, false).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().map(|r| r.secret).sum::<f64>() / n;
        let var = xs.iter().map(|r| (r.secret - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = 1.25 * (2.0 / (n - 1.0)).sqrt();
        assert!((var - 1.25).abs() < 4.0 * se, "{var}");
    }

    #[test]
    fn conditional_check_examples() {
        let p = prog(&[1.0, 0.5], &[(1, &[1.0, 0.0])]);
        let r = conditional_check(&p, &[1].into(), 100_000, 5, false).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!((r.residual_variance - 0.25).abs() < 4.0 * r.standard_error);

        let r = conditional_check(&p, &[2].into(), 100_000, 5, false).unwrap();
        assert_eq!(r.v1_norm_sq, 1.25);
        assert!(r.passed());

        let q = prog(&[1.0, 0.5], &[(1, &[1.0, 0.0]), (2, &[0.0, 1.0])]);
        assert_eq!(
            conditional_check(&q, &[1, 2].into(), 1000, 5, false),
            Err(Error::Qualified([1, 2].into()))
        );
    }

    #[test]
    fn wrapped_check_passes() {
        let p = prog(&[1.0, 0.5], &[(1, &[1.0, 0.0])]);
        let r = conditional_check(&p, &[1].into(), 100_000, 8, true).unwrap();
        let w = r.wrapped.as_ref().unwrap();
        assert!(w.passed, "{w:?}");
        assert!(w.max_ratio > 1.0 && w.max_ratio <= w.c + 5.0 * w.max_standard_error);
    }

    #[test]
    fn text_round_trip() {
        let w = normalize_witness(&[vec![[1, 2].into()], vec![[1, 2].into()]]);
        let p = hilbert_from_witness(&w, 2).unwrap();
        let back = HilbertProgram::parse(&p.to_text()).unwrap();
        assert_eq!(back.target(), p.target());
        assert_eq!(back.assignment(), p.assignment());
        assert!(matches!(
            HilbertProgram::parse("hilbert v1\ndim 2\ntarget 1\n"),
            Err(Error::Format { line: 3, .. })
        ));
    }
}
