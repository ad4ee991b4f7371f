//! Teachers: oracles that hold a hidden target and answer membership and
//! equivalence queries about it, counting and logging every query.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::horn::{equivalent, HornClause, HornKB, Variable};
use crate::oracle::{EqAnswer, EquivalenceOracle, MembershipOracle, OracleError};
use crate::poss_kb::{poss_equivalent, PossClause, PossKB};
use crate::valuation::Valuation;

/// What a teacher needs to know about the concept class it teaches.
pub trait Target: Clone {
    type Example: Clone + fmt::Display + PartialEq;

    fn signature(&self) -> &BTreeSet<Variable>;
    fn formula(example: &Self::Example) -> &HornClause;
    fn valuation(example: &Self::Example) -> Option<Valuation>;
    fn entails(&self, example: &Self::Example) -> bool;
    /// The clauses of the KB, viewed as examples.
    fn examples(&self) -> Vec<Self::Example>;
    fn equivalent(&self, other: &Self) -> bool;
    /// Same formula as `example`, with the valuation moved to a random grid
    /// point at `precision` that the target still entails and `hypothesis`
    /// does not. Identity for classical targets.
    fn lower(&self, hypothesis: &Self, example: Self::Example, precision: u32, rng: &mut ChaCha8Rng)
        -> Self::Example;

    fn render(&self) -> String;
}

impl Target for HornKB {
    type Example = HornClause;

    fn signature(&self) -> &BTreeSet<Variable> {
        HornKB::signature(self)
    }

    fn formula(example: &HornClause) -> &HornClause {
        example
    }

    fn valuation(_: &HornClause) -> Option<Valuation> {
        None
    }

    fn entails(&self, example: &HornClause) -> bool {
        HornKB::entails(self, example)
    }

    fn examples(&self) -> Vec<HornClause> {
        self.clauses().cloned().collect()
    }

    fn equivalent(&self, other: &Self) -> bool {
        equivalent(self, other)
    }

    fn lower(&self, _: &Self, example: HornClause, _: u32, _: &mut ChaCha8Rng) -> HornClause {
        example
    }

    fn render(&self) -> String {
        self.clauses().map(|c| c.to_string()).collect::<Vec<_>>().join("; ")
    }
}

impl Target for PossKB {
    type Example = PossClause;

    fn signature(&self) -> &BTreeSet<Variable> {
        PossKB::signature(self)
    }

    fn formula(example: &PossClause) -> &HornClause {
        &example.formula
    }

    fn valuation(example: &PossClause) -> Option<Valuation> {
        Some(example.valuation())
    }

    fn entails(&self, example: &PossClause) -> bool {
        PossKB::entails(self, example)
    }

    fn examples(&self) -> Vec<PossClause> {
        self.clauses().cloned().collect()
    }

    fn equivalent(&self, other: &Self) -> bool {
        poss_equivalent(self, other)
    }

    fn lower(&self, hypothesis: &Self, example: PossClause, precision: u32, rng: &mut ChaCha8Rng) -> PossClause {
        let Some(top) = self.val_of(&example.formula) else {
            return example;
        };
        let floor = hypothesis.val_of(&example.formula).unwrap_or(Valuation::ZERO);
        if floor >= top {
            return example;
        }
        let lo = floor.grid_index(precision) + 1;
        let hi = top.grid_index(precision);
        if lo > hi {
            return example;
        }
        let index = rng.gen_range(lo..=hi);
        match Valuation::grid_point(index, precision) {
            Ok(v) => PossClause::new(example.formula.clone(), v).unwrap_or(example),
            Err(_) => example,
        }
    }

    fn render(&self) -> String {
        self.clauses().map(|c| c.to_string()).collect::<Vec<_>>().join("; ")
    }
}

/// A counterexample for `t` and `h`: first a clause of `t` that `h` does not
/// entail, otherwise a clause of `h` that `t` does not entail.
pub fn find_counterexample<K: Target>(t: &K, h: &K) -> Option<K::Example> {
    t.examples()
        .into_iter()
        .find(|e| !h.entails(e))
        .or_else(|| h.examples().into_iter().find(|e| !t.entails(e)))
}

/// Counterexample selection policy.
#[derive(Debug, Clone, PartialEq)]
pub enum CexStrategy<E> {
    /// The first clause found by [`find_counterexample`].
    ClauseExact,
    /// The clause-exact counterexample with its valuation lowered to a random
    /// grid point of the given precision that is still a counterexample.
    AdversarialLow { precision: u32 },
    /// Uniform choice among all clause-level counterexamples, positive ones
    /// preferred.
    Random,
    /// Replays a fixed list in order.
    Scripted(VecDeque<E>),
}

impl<E> CexStrategy<E> {
    pub fn name(&self) -> &'static str {
        match self {
            CexStrategy::ClauseExact => "clause-exact",
            CexStrategy::AdversarialLow { .. } => "adversarial-low",
            CexStrategy::Random => "random",
            CexStrategy::Scripted(_) => "scripted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Mq,
    Eq,
}

/// One line of a JSON-lines transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub index: usize,
    pub event: EventKind,
    pub instance: Option<String>,
    pub input: String,
    pub valuation: Option<String>,
    pub answer: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    events: Vec<Event>,
}

impl Transcript {
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn push(
        &mut self,
        event: EventKind,
        instance: Option<String>,
        input: String,
        valuation: Option<String>,
        answer: String,
    ) {
        let index = self.events.len();
        self.events.push(Event { index, event, instance, input, valuation, answer });
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(s: &str) -> Result<Self, serde_json::Error> {
        let events = s
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<Event>, _>>()?;
        Ok(Transcript { events })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub mq: usize,
    pub eq: usize,
}

pub struct Teacher<K: Target> {
    target: K,
    strategy: CexStrategy<K::Example>,
    rng: ChaCha8Rng,
    counts: QueryCounts,
    transcript: Transcript,
    instance: Option<String>,
}

impl<K: Target> Teacher<K> {
    pub fn new(target: K, strategy: CexStrategy<K::Example>, seed: u64) -> Self {
        Teacher {
            target,
            strategy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            counts: QueryCounts::default(),
            transcript: Transcript::default(),
            instance: None,
        }
    }

    pub fn target(&self) -> &K {
        &self.target
    }

    pub fn signature(&self) -> &BTreeSet<Variable> {
        self.target.signature()
    }

    pub fn counts(&self) -> QueryCounts {
        self.counts
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    pub fn instance(&self) -> Option<&str> {
        self.instance.as_deref()
    }

    /// Appends an EQ event answered outside the teacher (sampled EQs).
    pub fn record_eq(&mut self, hypothesis: &K, answer: &EqAnswer<K::Example>) {
        self.counts.eq += 1;
        let answer = match answer {
            EqAnswer::Yes => "yes".to_string(),
            EqAnswer::Counterexample(e) => format!("cex {e}"),
        };
        self.transcript.push(EventKind::Eq, self.instance.clone(), hypothesis.render(), None, answer);
    }

    /// Membership check against the target without counting or logging.
    pub fn label(&self, example: &K::Example) -> bool {
        self.target.entails(example)
    }

    fn is_counterexample(&self, h: &K, e: &K::Example) -> bool {
        self.target.entails(e) != h.entails(e)
    }

    fn choose(&mut self, h: &K) -> Result<K::Example, OracleError> {
        let cex = match &mut self.strategy {
            CexStrategy::ClauseExact => find_counterexample(&self.target, h),
            CexStrategy::AdversarialLow { precision } => {
                let precision = *precision;
                find_counterexample(&self.target, h).map(|e| {
                    if self.target.entails(&e) {
                        self.target.lower(h, e, precision, &mut self.rng)
                    } else {
                        e
                    }
                })
            }
            CexStrategy::Random => {
                let positives: Vec<_> = self.target.examples().into_iter().filter(|e| !h.entails(e)).collect();
                let pool = if positives.is_empty() {
                    h.examples().into_iter().filter(|e| !self.target.entails(e)).collect()
                } else {
                    positives
                };
                pool.choose(&mut self.rng).cloned()
            }
            CexStrategy::Scripted(queue) => {
                let e = queue.pop_front().ok_or(OracleError::StrategyExhausted)?;
                if !(self.target.entails(&e) != h.entails(&e)) {
                    return Err(OracleError::InvalidScript(e.to_string()));
                }
                Some(e)
            }
        };
        let e = cex.expect("inequivalent KBs always have a clause-level counterexample");
        assert!(self.is_counterexample(h, &e), "teacher produced an unsound counterexample {e}");
        Ok(e)
    }

    fn check_signature(&self, formula: &HornClause) -> Result<(), OracleError> {
        match formula.variables().find(|v| !self.target.signature().contains(*v)) {
            Some(v) => Err(OracleError::SignatureMismatch(v.to_string())),
            None => Ok(()),
        }
    }
}

impl<K: Target> MembershipOracle<K::Example> for Teacher<K> {
    fn membership(&mut self, example: &K::Example) -> Result<bool, OracleError> {
        self.check_signature(K::formula(example))?;
        let answer = self.target.entails(example);
        self.counts.mq += 1;
        self.transcript.push(
            EventKind::Mq,
            self.instance.clone(),
            K::formula(example).to_string(),
            K::valuation(example).map(|v| v.to_string()),
            if answer { "yes" } else { "no" }.to_string(),
        );
        Ok(answer)
    }

    fn set_instance(&mut self, label: Option<&str>) {
        self.instance = label.map(str::to_string);
    }
}

impl<K: Target> EquivalenceOracle<K::Example, K> for Teacher<K> {
    fn equivalence(&mut self, hypothesis: &K) -> Result<EqAnswer<K::Example>, OracleError> {
        let answer = if self.target.equivalent(hypothesis) {
            EqAnswer::Yes
        } else {
            EqAnswer::Counterexample(self.choose(hypothesis)?)
        };
        self.record_eq(hypothesis, &answer);
        Ok(answer)
    }
}
