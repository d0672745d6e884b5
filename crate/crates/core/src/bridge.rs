//! End-to-end pipelines with plain-text verdict reports.
//!
//! A pipeline runs its stages in order and stops at the first failure. The report
//! always lists the stages that ran, so a failing report names the stage that broke
//! and carries a witness (a set, an atom or a residual) that can be checked by hand.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use crate::access_structure::{
    gdelta_membership, minimize_generators, structure_to_text, support, GDeltaWitness,
    MonotoneStructure, ParticipantSet,
};
use crate::classifier::{format_rational, Label};
use crate::error::{Error, Result};
use crate::gaussian_ramp::{conditional_check, hilbert_from_witness, HilbertProgram};
use crate::linear_scheme::{classify_program, RecoveryPlan, ENUMERATION_BOUND};
use crate::span_program::{SpanProgram, BRUTE_FORCE_BOUND};
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageVerdict {
    pub name: String,
    pub passed: bool,
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub pipeline: String,
    /// SHA-256 of the canonical text of the inputs, hex encoded.
    pub inputs_digest: String,
    pub stages: Vec<StageVerdict>,
    /// Wall-clock time; kept out of the text form so reports stay reproducible.
    pub elapsed: Duration,
}

impl PartialEq for PipelineReport {
    fn eq(&self, other: &Self) -> bool {
        self.pipeline == other.pipeline
            && self.inputs_digest == other.inputs_digest
            && self.stages == other.stages
    }
}

impl PipelineReport {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(|s| s.passed)
    }

    pub fn first_failure(&self) -> Option<&StageVerdict> {
        self.stages.iter().find(|s| !s.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "report v1\npipeline {}\ninputs sha256:{}\n",
            self.pipeline, self.inputs_digest
        );
        for s in &self.stages {
            let _ = writeln!(
                out,
                "stage {} {}",
                s.name,
                if s.passed { "pass" } else { "fail" }
            );
            for w in &s.witnesses {
                let _ = writeln!(out, "witness {w}");
            }
        }
        let _ = writeln!(
            out,
            "verdict {}",
            if self.passed() { "pass" } else { "fail" }
        );
        out
    }

    pub fn parse(input: &str) -> Result<Self> {
        let mut lines = text::lines(input);
        text::expect_header(&mut lines, "report v1")?;
        let mut pipeline = None;
        let mut digest = None;
        let mut stages: Vec<StageVerdict> = Vec::new();
        let mut verdict = None;
        for line in lines {
            let (key, rest) = line.text.split_once(' ').unwrap_or((line.text, ""));
            match key {
                "pipeline" => pipeline = Some(rest.to_string()),
                "inputs" => {
                    let hex = rest
                        .strip_prefix("sha256:")
                        .ok_or_else(|| line.err("expected `inputs sha256:<hex>`"))?;
                    digest = Some(hex.to_string());
                }
                "stage" => {
                    let (name, status) = rest
                        .split_once(' ')
                        .ok_or_else(|| line.err("expected `stage <name> <pass|fail>`"))?;
                    let passed = match status {
                        "pass" => true,
                        "fail" => false,
                        _ => return Err(line.err(format!("bad stage status `{status}`"))),
                    };
                    stages.push(StageVerdict {
                        name: name.to_string(),
                        passed,
                        witnesses: Vec::new(),
                    });
                }
                "witness" => stages
                    .last_mut()
                    .ok_or_else(|| line.err("witness before any stage"))?
                    .witnesses
                    .push(rest.to_string()),
                "verdict" => verdict = Some(rest == "pass"),
                _ => return Err(line.err(format!("unknown key `{key}`"))),
            }
        }
        let missing = |what: &str| Error::Format {
            line: 0,
            msg: format!("missing `{what}` line"),
        };
        let report = PipelineReport {
            pipeline: pipeline.ok_or_else(|| missing("pipeline"))?,
            inputs_digest: digest.ok_or_else(|| missing("inputs"))?,
            stages,
            elapsed: Duration::ZERO,
        };
        if verdict.ok_or_else(|| missing("verdict"))? != report.passed() {
            return Err(Error::Format {
                line: 0,
                msg: "verdict disagrees with the stages".into(),
            });
        }
        Ok(report)
    }
}

struct Runner {
    report: PipelineReport,
    start: Instant,
}

impl Runner {
    fn new(pipeline: &str, canonical_inputs: &str) -> Self {
        Runner {
            report: PipelineReport {
                pipeline: pipeline.to_string(),
                inputs_digest: hex::encode(Sha256::digest(canonical_inputs.as_bytes())),
                stages: Vec::new(),
                elapsed: Duration::ZERO,
            },
            start: Instant::now(),
        }
    }

    /// Records a stage; returns whether the pipeline may continue.
    fn stage(&mut self, name: &str, outcome: Result<(bool, Vec<String>)>) -> bool {
        let (passed, witnesses) = outcome.unwrap_or_else(|e| (false, vec![format!("error {e}")]));
        self.report.stages.push(StageVerdict {
            name: name.to_string(),
            passed,
            witnesses,
        });
        passed
    }

    fn finish(mut self) -> PipelineReport {
        self.report.elapsed = self.start.elapsed();
        self.report
    }
}

fn set_list(sets: &[ParticipantSet]) -> String {
    sets.iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Generators → span program → enumerated scheme → classification.
///
/// Stages: `structure` (constructor rules), `program` (construction),
/// `realization` (brute-force structure equals the minimized generators),
/// `recovery` (every generator's coefficients rebuild the target exactly) and
/// `perfection` (exact classification is perfect).
pub fn run_perfect_pipeline(generators: &[ParticipantSet], p: u64) -> PipelineReport {
    let inputs = format!("{}p {p}\n", structure_to_text(generators));
    let mut run = Runner::new("perfect", &inputs);
    let mut structure = None;
    let ok = run.stage(
        "structure",
        MonotoneStructure::new(generators.to_vec()).map(|s| {
            let w = vec![format!("minimal {}", set_list(s.generators()))];
            structure = Some(s);
            (true, w)
        }),
    );
    if !ok {
        return run.finish();
    }
    let structure = structure.expect("structure stage passed");
    let mut program = None;
    let ok = run.stage(
        "program",
        SpanProgram::from_generators(structure.generators(), p).map(|prog| {
            let w = vec![format!("dim {}", prog.dim())];
            program = Some(prog);
            (true, w)
        }),
    );
    if !ok {
        return run.finish();
    }
    let program = program.expect("program stage passed");
    let universe = support(generators);
    let ok = run.stage(
        "realization",
        program
            .realized_structure(&universe, BRUTE_FORCE_BOUND)
            .map(|found| {
                let expected = minimize_generators(generators);
                if found == expected {
                    (true, vec![format!("realized {}", set_list(&found))])
                } else {
                    let diff = found
                        .iter()
                        .find(|s| !expected.contains(s))
                        .or_else(|| expected.iter().find(|s| !found.contains(s)))
                        .expect("families differ");
                    (false, vec![format!("differs_at {diff}")])
                }
            }),
    );
    if !ok {
        return run.finish();
    }
    let ok = run.stage(
        "recovery",
        (|| {
            let f = program.field();
            for g in structure.generators() {
                let refs = program.vectors_of(g)?;
                let lambda = program
                    .reconstruction(g)?
                    .ok_or_else(|| Error::NotQualified(g.clone()))?;
                let combo: Vec<u64> = (0..program.dim())
                    .map(|k| {
                        refs.iter()
                            .zip(&lambda)
                            .fold(0, |acc, (r, &l)| f.add(acc, f.mul(l, r.vector[k])))
                    })
                    .collect();
                if combo != program.target() {
                    return Ok((false, vec![format!("generator {g}")]));
                }
                RecoveryPlan::new(&program, g)?;
            }
            Ok((
                true,
                vec![format!("generators {}", structure.generators().len())],
            ))
        })(),
    );
    if !ok {
        return run.finish();
    }
    run.stage(
        "perfection",
        classify_program(&program, &structure, ENUMERATION_BOUND).map(|c| {
            let mut w = vec![format!("label {}", c.label)];
            if let Some(c) = &c.c {
                w.push(format!("c {}", format_rational(c)));
            }
            if let Some(v) = c.violations.first() {
                w.push(v.to_string());
            }
            (c.label == Label::Perfect, w)
        }),
    );
    run.finish()
}

/// Maximal subsets of `universe` outside the structure, canonical order.
fn maximal_unqualified(
    universe: &ParticipantSet,
    qualified: impl Fn(&ParticipantSet) -> bool,
) -> Vec<ParticipantSet> {
    let subsets = universe.subsets();
    let unqualified: Vec<&ParticipantSet> = subsets.iter().filter(|s| !qualified(s)).collect();
    unqualified
        .iter()
        .filter(|s| {
            !unqualified
                .iter()
                .any(|t| t.len() > s.len() && s.is_subset(t))
        })
        .map(|s| (*s).clone())
        .collect()
}

/// Witness → Hilbert program → Gaussian checks.
///
/// Stages: `witness` (normalized, levels in range), `program` (construction),
/// `realization` (span test agrees with witness membership on every subset of the
/// participants), `conditional` (residual variance per maximal unqualified set)
/// and `wrapped` (histogram band for the fractional-part scheme on the same sets).
/// Set number `j` in canonical order is simulated with seed `seed + j`.
pub fn run_ramp_pipeline(
    witness: &GDeltaWitness,
    levels: usize,
    samples: usize,
    seed: u64,
) -> PipelineReport {
    let inputs = format!(
        "{}truncation {levels}\nsamples {samples}\nseed {seed}\n",
        witness.to_text()
    );
    let mut run = Runner::new("ramp", &inputs);
    let ok = run.stage(
        "witness",
        (|| {
            if witness.depth() == 0 {
                return Err(Error::InvalidArgument("witness has no levels".into()));
            }
            if !witness.is_normalized() {
                return Err(Error::NotNormalized);
            }
            if levels == 0 || levels > witness.depth() {
                return Err(Error::LevelOutOfRange {
                    level: levels,
                    depth: witness.depth(),
                });
            }
            Ok((true, vec![format!("depth {}", witness.depth())]))
        })(),
    );
    if !ok {
        return run.finish();
    }
    let mut program: Option<HilbertProgram> = None;
    let ok = run.stage(
        "program",
        hilbert_from_witness(witness, levels).map(|p| {
            let w = vec![format!("dim {}", p.dim())];
            program = Some(p);
            (true, w)
        }),
    );
    if !ok {
        return run.finish();
    }
    let program = program.expect("program stage passed");
    let universe = witness.participants(levels);
    let ok = run.stage(
        "realization",
        (|| {
            if universe.len() > BRUTE_FORCE_BOUND {
                return Err(Error::UniverseTooLarge {
                    size: universe.len(),
                    bound: BRUTE_FORCE_BOUND,
                });
            }
            let mut qualified = Vec::new();
            for a in universe.subsets() {
                let span = program.realizes(&a);
                if span != gdelta_membership(witness, &a, levels)? {
                    let d = crate::gaussian_ramp::orthogonal_decompose(&program, &a);
                    return Ok((
                        false,
                        vec![format!("set {a} span {span} residual {:.3e}", d.v1_norm_sq)],
                    ));
                }
                if span {
                    qualified.push(a);
                }
            }
            let minimal = minimize_generators(&qualified);
            Ok((true, vec![format!("minimal {}", set_list(&minimal))]))
        })(),
    );
    if !ok {
        return run.finish();
    }
    let targets = maximal_unqualified(&universe, |s| program.realizes(s));
    let mut reports = Vec::new();
    let ok = run.stage(
        "conditional",
        (|| {
            let mut w = Vec::new();
            let mut passed = true;
            for (j, b) in targets.iter().enumerate() {
                let r = conditional_check(&program, b, samples, seed.wrapping_add(j as u64), true)?;
                w.push(format!(
                    "set {} v1_norm_sq {:.6} residual_variance {:.6} se {:.6} {}",
                    b,
                    r.v1_norm_sq,
                    r.residual_variance,
                    r.standard_error,
                    if r.variance_passed { "pass" } else { "fail" }
                ));
                passed &= r.variance_passed;
                reports.push(r);
            }
            Ok((passed, w))
        })(),
    );
    if !ok {
        return run.finish();
    }
    run.stage(
        "wrapped",
        Ok({
            let mut w = Vec::new();
            let mut passed = true;
            for r in &reports {
                let h = r.wrapped.as_ref().expect("wrapped check requested");
                w.push(format!(
                    "set {} c {:.6} ratio_min {:.6} ratio_max {:.6} {}",
                    r.set,
                    h.c,
                    h.min_ratio,
                    h.max_ratio,
                    if h.passed { "pass" } else { "fail" }
                ));
                passed &= h.passed;
            }
            (passed, w)
        }),
    );
    run.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access_structure::{normalize_witness, threshold_generators};

    #[test]
    fn perfect_pipeline_examples() {
        let r = run_perfect_pipeline(&[[1, 2].into()], 2);
        assert!(r.passed(), "{}", r.to_text());
        assert!(r.to_text().contains("witness label perfect"));

        let r = run_perfect_pipeline(&threshold_generators(3, 2), 3);
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r.stages.len(), 5);

        let r = run_perfect_pipeline(&[[1].into()], 2);
        assert!(!r.passed());
        assert_eq!(r.first_failure().unwrap().name, "structure");
        assert_eq!(r.stages.len(), 1);
    }

    #[test]
    fn perfect_pipeline_bad_prime() {
        let r = run_perfect_pipeline(&[[1, 2].into()], 4);
        assert_eq!(r.first_failure().unwrap().name, "program");
    }

    #[test]
    fn ramp_pipeline_pair() {
        let w = normalize_witness(&[vec![[1, 2].into()], vec![[1, 2].into()]]);
        let r = run_ramp_pipeline(&w, 2, 20_000, 1);
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r, run_ramp_pipeline(&w, 2, 20_000, 1));
        assert_eq!(r.to_text(), run_ramp_pipeline(&w, 2, 20_000, 1).to_text());
    }

    #[test]
    fn ramp_pipeline_empty_witness() {
        let r = run_ramp_pipeline(&GDeltaWitness::from_levels(vec![]), 1, 100, 1);
        assert_eq!(r.first_failure().unwrap().name, "witness");
    }

    #[test]
    fn report_round_trip() {
        let r = run_perfect_pipeline(&[[1, 2].into(), [2, 3].into()], 2);
        let back = PipelineReport::parse(&r.to_text()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_text(), r.to_text());
    }
}
