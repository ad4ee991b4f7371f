//! PAC learning with membership queries: equivalence queries are answered
//! by sampling labeled examples.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::AfpConfig;
use crate::horn::{all_clauses, HornClause, Variable};
use crate::learner::LearnerError;
use crate::oracle::{EqAnswer, EquivalenceOracle, MembershipOracle, OracleError};
use crate::possibilistic::{learn_mq_eq, MqEqReport};
use crate::poss_kb::{PossClause, PossKB};
use crate::teacher::Teacher;
use crate::valuation::{Valuation, MAX_PRECISION};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PacError {
    #[error("epsilon and delta must lie strictly between 0 and 1, got {epsilon} and {delta}")]
    BadParameters { epsilon: f64, delta: f64 },
    #[error("invalid distribution: {0}")]
    BadDistribution(String),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExampleDistribution {
    /// Uniform over every clause of the signature paired with every
    /// positive grid point at `precision`.
    Uniform { precision: u32 },
    /// Independent draws proportional to the weights.
    Weighted(Vec<(PossClause, f64)>),
    /// A finite list replayed in order.
    Sequence(Vec<PossClause>),
}

impl ExampleDistribution {
    pub fn describe(&self) -> String {
        match self {
            ExampleDistribution::Uniform { precision } => format!("uniform clause grid at precision {precision}"),
            ExampleDistribution::Weighted(w) => format!("weighted list of {} examples", w.len()),
            ExampleDistribution::Sequence(s) => format!("sequence of {} examples", s.len()),
        }
    }
}

enum Source {
    Uniform { clauses: Vec<HornClause>, precision: u32 },
    Weighted { items: Vec<PossClause>, index: WeightedIndex<f64> },
    Sequence { items: Vec<PossClause>, next: usize },
}

/// Seeded example generator for one distribution.
pub struct Sampler {
    source: Source,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(dist: &ExampleDistribution, signature: &BTreeSet<Variable>, seed: u64) -> Result<Self, PacError> {
        let source = match dist {
            ExampleDistribution::Uniform { precision } => {
                if !(1..=MAX_PRECISION).contains(precision) {
                    return Err(PacError::BadDistribution(format!("precision {precision}")));
                }
                Source::Uniform { clauses: all_clauses(signature, None), precision: *precision }
            }
            ExampleDistribution::Weighted(list) => {
                let index = WeightedIndex::new(list.iter().map(|(_, w)| *w))
                    .map_err(|e| PacError::BadDistribution(e.to_string()))?;
                Source::Weighted { items: list.iter().map(|(c, _)| c.clone()).collect(), index }
            }
            ExampleDistribution::Sequence(items) => Source::Sequence { items: items.clone(), next: 0 },
        };
        Ok(Sampler { source, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn sample(&mut self) -> Result<PossClause, OracleError> {
        match &mut self.source {
            Source::Uniform { clauses, precision } => {
                let formula = clauses[self.rng.gen_range(0..clauses.len())].clone();
                let index = self.rng.gen_range(1..=10u64.pow(*precision));
                let v = Valuation::grid_point(index, *precision).expect("grid point");
                Ok(PossClause::new(formula, v).expect("positive"))
            }
            Source::Weighted { items, index } => Ok(items[index.sample(&mut self.rng)].clone()),
            Source::Sequence { items, next } => {
                let e = items.get(*next).cloned().ok_or(OracleError::SamplerExhausted)?;
                *next += 1;
                Ok(e)
            }
        }
    }
}

/// Samples needed for the `i`-th equivalence query (from 1):
/// `ceil((ln(1/δ) + i·ln 2) / ε)`.
pub fn sample_size(i: usize, epsilon: f64, delta: f64) -> u64 {
    ((1.0 / epsilon) * ((1.0 / delta).ln() + i as f64 * std::f64::consts::LN_2)).ceil() as u64
}

/// How equivalence queries are answered.
#[allow(clippy::large_enum_variant)]
pub enum EqSource {
    Sampling(Sampler),
    /// The teacher's exact equivalence query.
    Exact,
}

/// Membership queries go to the teacher; equivalence queries to `source`.
pub struct PacOracle<'a> {
    teacher: &'a mut Teacher<PossKB>,
    source: EqSource,
    epsilon: f64,
    delta: f64,
    eq_index: usize,
    samples_used: u64,
}

impl<'a> PacOracle<'a> {
    pub fn new(teacher: &'a mut Teacher<PossKB>, source: EqSource, epsilon: f64, delta: f64) -> Result<Self, PacError> {
        if !(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) {
            return Err(PacError::BadParameters { epsilon, delta });
        }
        Ok(PacOracle { teacher, source, epsilon, delta, eq_index: 0, samples_used: 0 })
    }

    pub fn samples_used(&self) -> u64 {
        self.samples_used
    }
}

impl MembershipOracle<PossClause> for PacOracle<'_> {
    fn membership(&mut self, example: &PossClause) -> Result<bool, OracleError> {
        self.teacher.membership(example)
    }

    fn set_instance(&mut self, label: Option<&str>) {
        self.teacher.set_instance(label)
    }
}

impl EquivalenceOracle<PossClause, PossKB> for PacOracle<'_> {
    fn equivalence(&mut self, hypothesis: &PossKB) -> Result<EqAnswer<PossClause>, OracleError> {
        let sampler = match &mut self.source {
            EqSource::Exact => return self.teacher.equivalence(hypothesis),
            EqSource::Sampling(s) => s,
        };
        self.eq_index += 1;
        let mut answer = EqAnswer::Yes;
        for _ in 0..sample_size(self.eq_index, self.epsilon, self.delta) {
            let e = sampler.sample()?;
            self.samples_used += 1;
            if hypothesis.entails(&e) != self.teacher.label(&e) {
                answer = EqAnswer::Counterexample(e);
                break;
            }
        }
        self.teacher.record_eq(hypothesis, &answer);
        Ok(answer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacRun {
    pub hypothesis: PossKB,
    pub report: MqEqReport,
    pub samples_used: u64,
}

/// Runs the membership and equivalence query learner from precision 1 with
/// equivalence queries answered by `source`.
pub fn pac_learn(
    signature: &BTreeSet<Variable>,
    teacher: &mut Teacher<PossKB>,
    source: EqSource,
    epsilon: f64,
    delta: f64,
    config: AfpConfig,
) -> Result<PacRun, PacError> {
    let mut oracle = PacOracle::new(teacher, source, epsilon, delta)?;
    let (hypothesis, report) = learn_mq_eq(signature, 1, &mut oracle, config)?;
    Ok(PacRun { hypothesis, report, samples_used: oracle.samples_used })
}

/// Fraction of `n` fresh samples on which `h` and the target disagree.
pub fn empirical_error(h: &PossKB, teacher: &Teacher<PossKB>, sampler: &mut Sampler, n: usize) -> Result<f64, OracleError> {
    assert!(n >= 1, "empirical error needs at least one sample");
    let mut wrong = 0usize;
    for _ in 0..n {
        let e = sampler.sample()?;
        if h.entails(&e) != teacher.label(&e) {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub samples_used: u64,
    pub empirical_error: f64,
    pub success: bool,
}

/// One seeded trial: learn with sampled equivalence queries, then measure
/// the error on `test_size` fresh samples drawn with a different seed.
pub fn run_trial(
    target: &PossKB,
    dist: &ExampleDistribution,
    epsilon: f64,
    delta: f64,
    seed: u64,
    test_size: usize,
) -> Result<TrialReport, PacError> {
    let sig = target.signature().clone();
    let mut teacher = Teacher::new(target.clone(), crate::teacher::CexStrategy::ClauseExact, seed);
    let sampler = Sampler::new(dist, &sig, seed)?;
    let run = pac_learn(&sig, &mut teacher, EqSource::Sampling(sampler), epsilon, delta, AfpConfig::default())?;
    let mut test = Sampler::new(dist, &sig, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let err = empirical_error(&run.hypothesis, &teacher, &mut test, test_size).map_err(LearnerError::from)?;
    Ok(TrialReport {
        seed,
        epsilon,
        delta,
        samples_used: run.samples_used,
        empirical_error: err,
        success: err <= epsilon,
    })
}
