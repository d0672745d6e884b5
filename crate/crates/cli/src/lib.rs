//! Command-line front end.
//!
//! Exit codes: 0 success or passing check, 1 failing check (or a domain error such
//! as an unqualified set), 2 usage error, 3 unreadable or malformed input.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use probsss::access_structure::{
    builtin_structure, diagonal_refutation, gen_membership, minimize_generators, normalize_witness,
    parse_layers, parse_structure, structure_to_text, BuiltinName, BuiltinParams, GDeltaWitness,
    MonotoneStructure, ParticipantSet,
};
use probsss::bridge::{run_perfect_pipeline, run_ramp_pipeline};
use probsss::classifier::{classify, JointDistributionTable, Label};
use probsss::gaussian_ramp::{
    conditional_check, hilbert_from_witness, orthogonal_decompose, simulate, HilbertProgram,
};
use probsss::linear_scheme::{
    classify_program, deal, joint_distribution, recover, DealtShares, ENUMERATION_BOUND,
};
use probsss::span_program::{SpanProgram, BRUTE_FORCE_BOUND};
use probsss::tail_threshold::{
    conditional_secret_distribution, eventual_value_recover, sample, Recovery,
};
use probsss::wrapped::wrapped_density_bounds;
use probsss::Error;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Parser)]
#[command(
    name = "probsss",
    version,
    about = "Secret sharing schemes from span programs"
)]
struct Cli {
    /// Worker threads for enumeration and Monte Carlo (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Access structures and witnesses.
    #[command(subcommand)]
    Structure(StructureCmd),
    /// Span programs over prime fields.
    #[command(subcommand)]
    Span(SpanCmd),
    /// The linear scheme of a span program.
    #[command(subcommand)]
    Scheme(SchemeCmd),
    /// Real programs and the Gaussian scheme.
    #[command(subcommand)]
    Gauss(GaussCmd),
    /// The geometric-threshold scheme.
    #[command(subcommand)]
    Tail(TailCmd),
    /// End-to-end pipelines.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
}

#[derive(Debug, Subcommand)]
enum StructureCmd {
    /// Drop generators that contain other generators.
    Minimize {
        #[arg(long)]
        generators: PathBuf,
    },
    /// Is the set generated? Exit 1 if not.
    Member {
        #[arg(long)]
        generators: PathBuf,
        #[arg(long, value_parser = parse_set)]
        set: ParticipantSet,
    },
    /// Turn open layers into a decreasing chain.
    Normalize {
        #[arg(long)]
        witness: PathBuf,
    },
    /// Emit one of the example structures.
    Builtin {
        /// all_infinite, forbidden, grid_rows or disjoint
        #[arg(long, value_parser = parse_builtin)]
        name: BuiltinName,
        #[arg(long, default_value_t = 0)]
        max_index: u32,
        #[arg(long, default_value_t = 0)]
        levels: usize,
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// Forbidden sets separated by `;`.
        #[arg(long, value_parser = parse_set, value_delimiter = ';')]
        forbidden: Vec<ParticipantSet>,
    },
    /// Find a set the witness accepts that extends none of the disjoint sets.
    Refute {
        /// Disjoint sets separated by `;`.
        #[arg(long, value_parser = parse_set, value_delimiter = ';', required = true)]
        sets: Vec<ParticipantSet>,
        #[arg(long)]
        witness: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum SpanCmd {
    /// Build the program realizing a generator family.
    Build {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        generators: PathBuf,
    },
    /// Does the set span the target? Prints the coefficients; exit 1 if not.
    Realize {
        #[arg(long)]
        program: PathBuf,
        #[arg(long, value_parser = parse_set)]
        set: ParticipantSet,
    },
    /// Minimal qualified sets by brute force.
    Structure {
        #[arg(long)]
        program: PathBuf,
        /// Defaults to the program's participants.
        #[arg(long, value_parser = parse_set)]
        universe: Option<ParticipantSet>,
    },
}

#[derive(Debug, Subcommand)]
enum SchemeCmd {
    /// Deal shares from seeded randomness.
    Deal {
        #[arg(long)]
        program: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Recombine the shares of a qualified set.
    Recover {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        dealing: PathBuf,
        #[arg(long, value_parser = parse_set)]
        set: ParticipantSet,
    },
    /// Exact joint distribution of some shares and the secret.
    Enumerate {
        #[arg(long)]
        program: PathBuf,
        #[arg(long, value_parser = parse_set)]
        observed: ParticipantSet,
        #[arg(long, default_value_t = ENUMERATION_BOUND)]
        bound: u64,
    },
    /// Classify a program's scheme or a table against a structure; exit 1 on `none`.
    Classify {
        #[arg(long, conflicts_with = "table", required_unless_present = "table")]
        program: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, default_value_t = ENUMERATION_BOUND)]
        bound: u64,
    },
}

#[derive(Debug, Args)]
struct MonteCarlo {
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Use the fractional part of the secret.
    #[arg(long)]
    wrap: bool,
}

#[derive(Debug, Subcommand)]
enum GaussCmd {
    /// Build the real program of a normalized witness.
    Build {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        levels: usize,
    },
    /// Project the target onto the span of a set.
    Decompose {
        #[arg(long)]
        program: PathBuf,
        #[arg(long, value_parser = parse_set)]
        set: ParticipantSet,
    },
    /// Draw records: share values then the secret, tab separated.
    Simulate {
        #[arg(long)]
        program: PathBuf,
        #[command(flatten)]
        mc: MonteCarlo,
    },
    /// Monte Carlo check of the conditional law given a set's shares.
    Check {
        #[arg(long)]
        program: PathBuf,
        #[arg(long, value_parser = parse_set)]
        set: ParticipantSet,
        #[command(flatten)]
        mc: MonteCarlo,
    },
    /// Density ratio bound of the wrapped normal.
    Bounds {
        #[arg(long)]
        sigma: f64,
    },
}

#[derive(Debug, Subcommand)]
enum TailCmd {
    /// Sample one dealing.
    Sample {
        #[arg(long)]
        prefix: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Exact posterior of the secret given observed shares.
    Posterior {
        /// `index=value` pairs separated by `,` or spaces.
        #[arg(long, value_parser = parse_obs)]
        obs: Option<BTreeMap<u64, u64>>,
        /// File of `obs <index> <value>` lines.
        #[arg(long, conflicts_with = "obs")]
        obs_file: Option<PathBuf>,
        #[arg(long)]
        cap: u64,
    },
    /// Read the secret off a trailing run of equal shares; exit 1 if undetermined.
    Recover {
        /// Share values separated by `,`.
        #[arg(long, value_parser = parse_values, value_delimiter = ',', required = true)]
        shares: Vec<u64>,
        #[arg(long)]
        run_length: usize,
    },
}

#[derive(Debug, Subcommand)]
enum PipelineCmd {
    /// Generators to span program to perfect scheme.
    Perfect {
        #[arg(long)]
        generators: PathBuf,
        #[arg(long)]
        prime: u64,
    },
    /// Witness to real program to Gaussian checks.
    Ramp {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn parse_set(s: &str) -> Result<ParticipantSet, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_builtin(s: &str) -> Result<BuiltinName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_values(s: &str) -> Result<u64, String> {
    s.trim().parse().map_err(|_| format!("bad value `{s}`"))
}

fn parse_obs(s: &str) -> Result<BTreeMap<u64, u64>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (i, v) = t
                .split_once('=')
                .ok_or_else(|| format!("expected index=value, got `{t}`"))?;
            let i = i.parse().map_err(|_| format!("bad index `{i}`"))?;
            let v = v.parse().map_err(|_| format!("bad value `{v}`"))?;
            Ok((i, v))
        })
        .collect()
}

enum Failure {
    Usage(String),
    Input(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Format { .. } => Failure::Input(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

/// Text to print and whether the command's check passed.
struct Outcome {
    text: String,
    passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, passed: true }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: probsss::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Format { .. } => Failure::Input(format!("{}: {e}", path.display())),
        other => Failure::from(other),
    })
}

fn read_structure(path: &Path) -> Result<Vec<ParticipantSet>, Failure> {
    with_path(path, parse_structure(&read(path)?))
}

fn read_span(path: &Path) -> Result<SpanProgram, Failure> {
    with_path(path, SpanProgram::parse(&read(path)?))
}

fn read_hilbert(path: &Path) -> Result<HilbertProgram, Failure> {
    with_path(path, HilbertProgram::parse(&read(path)?))
}

fn read_witness(path: &Path) -> Result<GDeltaWitness, Failure> {
    with_path(path, GDeltaWitness::parse(&read(path)?))
}

fn read_obs_file(path: &Path) -> Result<BTreeMap<u64, u64>, Failure> {
    let text = read(path)?;
    let mut obs = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let parsed = match toks[..] {
            ["obs", i, v] => i.parse().ok().zip(v.parse().ok()),
            _ => None,
        };
        let (i, v) = parsed.ok_or_else(|| {
            Failure::Input(format!(
                "{}: line {}: expected `obs <index> <value>`",
                path.display(),
                n + 1
            ))
        })?;
        obs.insert(i, v);
    }
    Ok(obs)
}

fn structure_cmd(cmd: StructureCmd) -> Result<Outcome, Failure> {
    match cmd {
        StructureCmd::Minimize { generators } => {
            let g = read_structure(&generators)?;
            Ok(Outcome::ok(structure_to_text(&minimize_generators(&g))))
        }
        StructureCmd::Member { generators, set } => {
            let g = read_structure(&generators)?;
            let member = gen_membership(&g, &set);
            Ok(Outcome {
                text: format!("{member}\n"),
                passed: member,
            })
        }
        StructureCmd::Normalize { witness } => {
            let layers = with_path(&witness, parse_layers(&read(&witness)?))?;
            Ok(Outcome::ok(normalize_witness(&layers).to_text()))
        }
        StructureCmd::Builtin {
            name,
            max_index,
            levels,
            m,
            forbidden,
        } => {
            let params = BuiltinParams {
                max_index,
                levels,
                m,
                forbidden,
            };
            Ok(Outcome::ok(builtin_structure(name, &params)?.to_text()))
        }
        StructureCmd::Refute { sets, witness } => {
            let w = read_witness(&witness)?;
            let b = diagonal_refutation(&sets, &w)?;
            Ok(Outcome::ok(format!("{}\n", b.to_line())))
        }
    }
}

fn span_cmd(cmd: SpanCmd) -> Result<Outcome, Failure> {
    match cmd {
        SpanCmd::Build { prime, generators } => {
            let g = read_structure(&generators)?;
            Ok(Outcome::ok(
                SpanProgram::from_generators(&g, prime)?.to_text(),
            ))
        }
        SpanCmd::Realize { program, set } => {
            let prog = read_span(&program)?;
            Ok(match prog.reconstruction(&set)? {
                Some(coeffs) => {
                    let c: Vec<String> = coeffs.iter().map(|x| x.to_string()).collect();
                    Outcome::ok(format!("true\ncoefficients {}\n", c.join(" ")))
                }
                None => Outcome {
                    text: "false\n".into(),
                    passed: false,
                },
            })
        }
        SpanCmd::Structure { program, universe } => {
            let prog = read_span(&program)?;
            let universe = universe.unwrap_or_else(|| prog.participants());
            let found = prog.realized_structure(&universe, BRUTE_FORCE_BOUND)?;
            Ok(Outcome::ok(structure_to_text(&found)))
        }
    }
}

fn scheme_cmd(cmd: SchemeCmd) -> Result<Outcome, Failure> {
    match cmd {
        SchemeCmd::Deal { program, seed } => {
            Ok(Outcome::ok(deal(&read_span(&program)?, seed).to_text()))
        }
        SchemeCmd::Recover {
            program,
            dealing,
            set,
        } => {
            let prog = read_span(&program)?;
            let dealt = with_path(&dealing, DealtShares::parse(&read(&dealing)?))?;
            let secret = recover(&prog, &set, &dealt.shares)?;
            Ok(Outcome::ok(format!("{secret}\n")))
        }
        SchemeCmd::Enumerate {
            program,
            observed,
            bound,
        } => {
            let prog = read_span(&program)?;
            Ok(Outcome::ok(
                joint_distribution(&prog, &observed, bound)?.to_text(),
            ))
        }
        SchemeCmd::Classify {
            program,
            table,
            structure,
            bound,
        } => {
            let s = MonotoneStructure::new(read_structure(&structure)?)?;
            let c = match (program, table) {
                (Some(p), _) => classify_program(&read_span(&p)?, &s, bound)?,
                (None, Some(t)) => {
                    let table = with_path(&t, JointDistributionTable::parse(&read(&t)?))?;
                    classify(&table, &s)?
                }
                (None, None) => return Err(Failure::Usage("need --program or --table".into())),
            };
            Ok(Outcome {
                passed: c.label != Label::None,
                text: c.to_text(),
            })
        }
    }
}

fn gauss_cmd(cmd: GaussCmd) -> Result<Outcome, Failure> {
    match cmd {
        GaussCmd::Build { witness, levels } => {
            let w = read_witness(&witness)?;
            Ok(Outcome::ok(hilbert_from_witness(&w, levels)?.to_text()))
        }
        GaussCmd::Decompose { program, set } => {
            let p = read_hilbert(&program)?;
            let d = orthogonal_decompose(&p, &set);
            let mut text = format!(
                "v1_norm_sq {}\nv2_norm_sq {}\ntarget_norm_sq {}\n",
                d.v1_norm_sq, d.v2_norm_sq, d.target_norm_sq
            );
            for ((id, i), c) in d.vectors.iter().zip(&d.projection_coeffs) {
                text.push_str(&format!("coeff {id} {i} {c}\n"));
            }
            Ok(Outcome::ok(text))
        }
        GaussCmd::Simulate { program, mc } => {
            let p = read_hilbert(&program)?;
            let records = simulate(&p, mc.samples, mc.seed, mc.wrap)?;
            let mut text = String::with_capacity(records.len() * 24);
            for r in &records {
                text.push_str(&r.to_line());
                text.push('\n');
            }
            Ok(Outcome::ok(text))
        }
        GaussCmd::Check { program, set, mc } => {
            let p = read_hilbert(&program)?;
            let r = conditional_check(&p, &set, mc.samples, mc.seed, mc.wrap)?;
            Ok(Outcome {
                passed: r.passed(),
                text: r.to_text(),
            })
        }
        GaussCmd::Bounds { sigma } => Ok(Outcome::ok(format!(
            "c {:.12}\n",
            wrapped_density_bounds(sigma)?
        ))),
    }
}

fn tail_cmd(cmd: TailCmd) -> Result<Outcome, Failure> {
    match cmd {
        TailCmd::Sample { prefix, seed } => Ok(Outcome::ok(sample(prefix, seed)?.to_text())),
        TailCmd::Posterior { obs, obs_file, cap } => {
            let obs = match (obs, obs_file) {
                (Some(o), _) => o,
                (None, Some(path)) => read_obs_file(&path)?,
                (None, None) => BTreeMap::new(),
            };
            Ok(Outcome::ok(
                conditional_secret_distribution(&obs, cap)?.to_text(),
            ))
        }
        TailCmd::Recover { shares, run_length } => {
            Ok(match eventual_value_recover(&shares, run_length) {
                Recovery::Secret(s) => Outcome::ok(format!("{s}\n")),
                Recovery::Undetermined => Outcome {
                    text: "undetermined\n".into(),
                    passed: false,
                },
            })
        }
    }
}

fn pipeline_cmd(cmd: PipelineCmd) -> Result<Outcome, Failure> {
    let report = match cmd {
        PipelineCmd::Perfect { generators, prime } => {
            run_perfect_pipeline(&read_structure(&generators)?, prime)
        }
        PipelineCmd::Ramp {
            witness,
            levels,
            samples,
            seed,
        } => run_ramp_pipeline(&read_witness(&witness)?, levels, samples, seed),
    };
    Ok(Outcome {
        passed: report.passed(),
        text: report.to_text(),
    })
}

fn dispatch(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Structure(c) => structure_cmd(c),
        Command::Span(c) => span_cmd(c),
        Command::Scheme(c) => scheme_cmd(c),
        Command::Gauss(c) => gauss_cmd(c),
        Command::Tail(c) => tail_cmd(c),
        Command::Pipeline(c) => pipeline_cmd(c),
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let result = match cli.workers {
        Some(0) => Err(Failure::Usage("--workers must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure::Usage(format!("cannot start {n} workers: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(outcome) => {
            let written = match &cli.out {
                Some(path) => {
                    fs::write(path, &outcome.text).map_err(|e| format!("{}: {e}", path.display()))
                }
                None => stdout
                    .write_all(outcome.text.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 3;
            }
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            3
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}
