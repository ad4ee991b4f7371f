//! The `posslearn` command line.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classical::AfpConfig;
use crate::horn::{all_clauses, equivalent, HornClause, HornKB, Variable};
use crate::learner::LearnerError;
use crate::oracle::OracleError;
use crate::pac::{empirical_error, pac_learn, EqSource, ExampleDistribution, PacError, Sampler};
use crate::poss_kb::{parse_clause_list, poss_equivalent, PossClause, PossKB};
use crate::possibilistic::{
    classical_via_possibilistic, learn_eq_only, learn_mq_eq, learn_mq_fixed_precision_levels,
    learn_mq_fixed_precision_naive, BaseBounds, LiftedOracle,
};
use crate::teacher::{find_counterexample, CexStrategy, Target, Teacher, Transcript};
use crate::valuation::Valuation;

pub const EXIT_OK: u8 = 0;
/// The learner produced a wrong hypothesis or broke the protocol.
pub const EXIT_BUG: u8 = 1;
/// Unreadable input or an invalid configuration.
pub const EXIT_CONFIG: u8 = 2;
/// A cap, budget, script, or sampler ran out.
pub const EXIT_EXHAUSTED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "posslearn", version, about = "Exact learning of possibilistic Horn knowledge bases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a target KB against a simulated teacher.
    Learn(LearnArgs),
    /// Check two KBs for possibilistic equivalence.
    Verify { a: PathBuf, b: PathBuf },
    /// Cross-check the necessity measure of the least specific
    /// distribution against syntactic valuations.
    OracleCheck {
        path: PathBuf,
        /// Largest signature to enumerate interpretations for.
        #[arg(long, default_value_t = 16)]
        cap: usize,
        /// Largest antecedent of the checked clauses.
        #[arg(long)]
        max_antecedent: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    MqEq,
    MqOnly,
    EqOnly,
    Pac,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    ClauseExact,
    AdversarialLow,
    Random,
    Scripted,
}

#[derive(Debug, Clone, Args)]
pub struct LearnArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub target: PathBuf,
    /// Fixed precision for mq-only; starting precision for mq-eq.
    #[arg(long)]
    pub precision: Option<u32>,
    #[arg(long, value_enum, default_value = "clause-exact")]
    pub cex_strategy: Strategy,
    /// Counterexamples for the scripted strategy, one per line.
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hypotheses for eq-only, or queries per base run for mq-only.
    #[arg(long, default_value_t = 100_000)]
    pub cap: usize,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Valuation digits of pac samples.
    #[arg(long, default_value_t = 2)]
    pub sample_precision: u32,
    /// Largest antecedent for the mq-only base learner.
    #[arg(long)]
    pub max_antecedent: Option<usize>,
    /// Use one base run per grid point in mq-only mode.
    #[arg(long)]
    pub naive: bool,
    /// Saturate new antecedent sets right away.
    #[arg(long)]
    pub eager_consequents: bool,
    /// Shrink counterexample antecedents before refinement.
    #[arg(long)]
    pub minimize: bool,
    #[arg(long)]
    pub out_hypothesis: Option<PathBuf>,
    #[arg(long)]
    pub out_transcript: Option<PathBuf>,
    #[arg(long)]
    pub out_stats: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Stats {
    pub mq_count: usize,
    pub eq_count: usize,
    pub instances_spawned: usize,
    pub escalations: u32,
    pub wall_steps: usize,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn config(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, message: message.into() }
}

impl From<LearnerError> for Failure {
    fn from(e: LearnerError) -> Self {
        let code = match &e {
            LearnerError::Oracle(OracleError::StrategyExhausted | OracleError::SamplerExhausted)
            | LearnerError::CapReached(_)
            | LearnerError::BudgetExceeded { .. }
            | LearnerError::PrecisionExhausted(_) => EXIT_EXHAUSTED,
            LearnerError::Oracle(OracleError::InvalidScript(_) | OracleError::SignatureMismatch(_))
            | LearnerError::BadPrecision(_) => EXIT_CONFIG,
            _ => EXIT_BUG,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<PacError> for Failure {
    fn from(e: PacError) -> Self {
        match e {
            PacError::Learner(l) => l.into(),
            other => config(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| config(format!("{}: {e}", path.display())))
}

pub fn read_poss_kb(path: &Path) -> Result<PossKB, Failure> {
    read(path)?.parse().map_err(|e| config(format!("{}: {e}", path.display())))
}

fn read_horn_kb(path: &Path) -> Result<HornKB, Failure> {
    read(path)?.parse().map_err(|e| config(format!("{}: {e}", path.display())))
}

fn strategy<E>(args: &LearnArgs, script: impl FnOnce(&str) -> Result<VecDeque<E>, Failure>) -> Result<CexStrategy<E>, Failure> {
    Ok(match args.cex_strategy {
        Strategy::ClauseExact => CexStrategy::ClauseExact,
        Strategy::AdversarialLow => CexStrategy::AdversarialLow { precision: args.precision.unwrap_or(1) },
        Strategy::Random => CexStrategy::Random,
        Strategy::Scripted => {
            let path = args.script.as_ref().ok_or_else(|| config("--cex-strategy scripted needs --script"))?;
            CexStrategy::Scripted(script(&read(path)?)?)
        }
    })
}

fn poss_script(text: &str) -> Result<VecDeque<PossClause>, Failure> {
    Ok(parse_clause_list(text).map_err(|e| config(format!("script: {e}")))?.into())
}

fn horn_script(text: &str) -> Result<VecDeque<HornClause>, Failure> {
    let mut out = VecDeque::new();
    for (i, line) in text.lines().enumerate() {
        let line = crate::horn::content(line);
        if !line.is_empty() {
            out.push_back(line.parse().map_err(|e| config(format!("script line {}: {e}", i + 1)))?);
        }
    }
    Ok(out)
}

enum Learned {
    Poss(PossKB),
    Horn(HornKB),
}

struct Session {
    learned: Learned,
    verified: bool,
    stats: Stats,
    transcript: Transcript,
    note: Option<String>,
}

fn afp_config(args: &LearnArgs) -> AfpConfig {
    AfpConfig { eager_consequents: args.eager_consequents, minimize_antecedents: args.minimize }
}

fn counts<K: Target>(t: &Teacher<K>, stats: &mut Stats) {
    stats.mq_count = t.counts().mq;
    stats.eq_count = t.counts().eq;
}

fn run_session(args: &LearnArgs) -> Result<Session, Failure> {
    let mut stats = Stats::default();
    if args.mode == Mode::Classical {
        let target = read_horn_kb(&args.target)?;
        let sig = target.signature().clone();
        let mut teacher = Teacher::new(target.clone(), strategy(args, horn_script)?, args.seed);
        let mut lifted = LiftedOracle::new(&mut teacher);
        let (h, report) = classical_via_possibilistic(&sig, &mut lifted, afp_config(args))?;
        let note = format!("{} lifted counterexamples, all at valuation 1", lifted.lifted().len());
        counts(&teacher, &mut stats);
        stats.instances_spawned = report.instances_spawned();
        stats.escalations = report.escalations;
        stats.wall_steps = report.steps();
        return Ok(Session {
            verified: equivalent(&h, &target),
            learned: Learned::Horn(h),
            stats,
            transcript: teacher.into_transcript(),
            note: Some(note),
        });
    }

    let target = read_poss_kb(&args.target)?;
    let sig: BTreeSet<Variable> = target.signature().clone();
    let mut teacher = Teacher::new(target.clone(), strategy(args, poss_script)?, args.seed);
    let mut note = None;
    let h = match args.mode {
        Mode::MqEq => {
            let (h, report) = learn_mq_eq(&sig, args.precision.unwrap_or(1), &mut teacher, afp_config(args))?;
            stats.instances_spawned = report.instances_spawned();
            stats.escalations = report.escalations;
            stats.wall_steps = report.steps();
            h
        }
        Mode::MqOnly => {
            let p = args.precision.ok_or_else(|| config("--mode mq-only needs --precision"))?;
            let bounds = BaseBounds {
                max_antecedent: args.max_antecedent.unwrap_or(sig.len()),
                budget: args.cap as u128,
            };
            let h = if args.naive {
                let h = learn_mq_fixed_precision_naive(&sig, p, bounds, &mut teacher)?;
                stats.instances_spawned = 10usize.pow(p);
                h
            } else {
                let run = learn_mq_fixed_precision_levels(&sig, p, bounds, &mut teacher)?;
                stats.instances_spawned = run.iterations() + 1;
                note = Some(format!("{} level iterations", run.iterations()));
                run.hypothesis
            };
            stats.wall_steps = teacher.counts().mq;
            h
        }
        Mode::EqOnly => {
            let (h, n) = learn_eq_only(&sig, &mut teacher, args.cap)?;
            stats.wall_steps = n;
            h
        }
        Mode::Pac => {
            let dist = ExampleDistribution::Uniform { precision: args.sample_precision };
            let sampler = Sampler::new(&dist, &sig, args.seed)?;
            let run = pac_learn(&sig, &mut teacher, EqSource::Sampling(sampler), args.epsilon, args.delta, afp_config(args))?;
            stats.instances_spawned = run.report.instances_spawned();
            stats.escalations = run.report.escalations;
            stats.wall_steps = run.report.steps();
            let mut test = Sampler::new(&dist, &sig, args.seed.wrapping_add(1))?;
            let err = empirical_error(&run.hypothesis, &teacher, &mut test, 10_000).map_err(LearnerError::from)?;
            note = Some(format!("{} samples drawn; empirical error {err:.4} on 10000 fresh samples", run.samples_used));
            counts(&teacher, &mut stats);
            let exact = poss_equivalent(&run.hypothesis, &target);
            return Ok(Session {
                verified: exact || err <= args.epsilon,
                learned: Learned::Poss(run.hypothesis),
                stats,
                transcript: teacher.into_transcript(),
                note,
            });
        }
        Mode::Classical => unreachable!("handled above"),
    };
    counts(&teacher, &mut stats);
    Ok(Session {
        verified: poss_equivalent(&h, &target),
        learned: Learned::Poss(h),
        stats,
        transcript: teacher.into_transcript(),
        note,
    })
}

pub fn cmd_learn(args: &LearnArgs) -> Result<u8, Failure> {
    let session = run_session(args)?;
    let text = match &session.learned {
        Learned::Poss(h) => h.to_string(),
        Learned::Horn(h) => h.to_string(),
    };
    if let Some(p) = &args.out_hypothesis {
        write(p, &text)?;
    }
    if let Some(p) = &args.out_transcript {
        write(p, &session.transcript.to_jsonl())?;
    }
    if let Some(p) = &args.out_stats {
        write(p, &(serde_json::to_string_pretty(&session.stats).expect("stats serialize") + "\n"))?;
    }
    print!("{text}");
    let s = &session.stats;
    println!(
        "# {} membership queries, {} equivalence queries, {} instances, {} escalations",
        s.mq_count, s.eq_count, s.instances_spawned, s.escalations
    );
    if let Some(n) = &session.note {
        println!("# {n}");
    }
    if session.verified {
        println!("# verified against the target");
        Ok(EXIT_OK)
    } else {
        eprintln!("learned hypothesis is not equivalent to the target");
        Ok(EXIT_BUG)
    }
}

pub fn cmd_verify(a: &Path, b: &Path) -> Result<u8, Failure> {
    let ka = read_poss_kb(a)?;
    let kb = read_poss_kb(b)?;
    if poss_equivalent(&ka, &kb) {
        println!("equivalent");
        return Ok(EXIT_OK);
    }
    let w = find_counterexample(&ka, &kb).expect("inequivalent KBs have a witness");
    let (yes, no) = if ka.entails(&w) { (a, b) } else { (b, a) };
    println!("not equivalent; witness {w} is entailed by {} but not by {}", yes.display(), no.display());
    Ok(EXIT_BUG)
}

/// A clause on which two valuation functions disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub formula: HornClause,
    pub necessity: Valuation,
    pub valuation: Valuation,
}

/// Compares `N(φ)` under `π_K` with `val(k, φ)` (computed by `val`) for
/// every clause over the signature. Returns the number of clauses checked.
pub fn semantic_check(
    k: &PossKB,
    cap: usize,
    max_antecedent: Option<usize>,
    val: &dyn Fn(&PossKB, &HornClause) -> Option<Valuation>,
) -> Result<Result<usize, Mismatch>, Failure> {
    let pi = k.pi_k(cap).map_err(|e| config(e.to_string()))?;
    let clauses = all_clauses(k.signature(), max_antecedent);
    for f in &clauses {
        let n = pi.necessity(f).map_err(|e| config(e.to_string()))?;
        let v = val(k, f).unwrap_or(Valuation::ZERO);
        if n != v {
            return Ok(Err(Mismatch { formula: f.clone(), necessity: n, valuation: v }));
        }
    }
    Ok(Ok(clauses.len()))
}

/// [`cmd_oracle_check`] with a replaceable valuation function.
pub fn cmd_oracle_check_with(
    path: &Path,
    cap: usize,
    max_antecedent: Option<usize>,
    val: &dyn Fn(&PossKB, &HornClause) -> Option<Valuation>,
) -> Result<u8, Failure> {
    let k = read_poss_kb(path)?;
    match semantic_check(&k, cap, max_antecedent, val)? {
        Ok(n) => {
            println!("necessity agrees with val on all {n} clauses");
            Ok(EXIT_OK)
        }
        Err(m) => {
            println!("disagreement on {}: necessity {} but val {}", m.formula, m.necessity, m.valuation);
            Ok(EXIT_BUG)
        }
    }
}

pub fn cmd_oracle_check(path: &Path, cap: usize, max_antecedent: Option<usize>) -> Result<u8, Failure> {
    cmd_oracle_check_with(path, cap, max_antecedent, &|k, f| k.val_of(f))
}

pub fn run(cli: Cli) -> u8 {
    let result = match &cli.command {
        Command::Learn(args) => cmd_learn(args),
        Command::Verify { a, b } => cmd_verify(a, b),
        Command::OracleCheck { path, cap, max_antecedent } => cmd_oracle_check(path, *cap, *max_antecedent),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            f.code
        }
    }
}
