//! Learning with membership and equivalence queries: one classical learner
//! per valuation level, coordinated through a single possibilistic teacher.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::valuation_search::{check_precision, normalize_cached, ValuationCache};
use crate::classical::{AfpConfig, AfpLearner};
use crate::horn::{HornClause, Variable};
use crate::learner::{Answer, Learner, LearnerError, Status};
use crate::oracle::{EqAnswer, EquivalenceOracle, MembershipOracle};
use crate::poss_kb::{PossClause, PossKB};
use crate::valuation::{Valuation, MAX_PRECISION};

/// Label of the instance learning the cut at `level`.
pub fn instance_label(level: Valuation) -> String {
    format!("A_{level}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dispatch {
    /// 1-based index of the answered equivalence query.
    pub eq: usize,
    pub formula: HornClause,
    pub levels: Vec<Valuation>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub precision: u32,
    /// Instance levels in spawn order.
    pub spawned: Vec<Valuation>,
    pub dispatches: Vec<Dispatch>,
    pub eq_calls: usize,
    /// Learner steps over all instances.
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Learned(PossKB),
    /// The counterexample showed that the target needs more digits.
    PrecisionTooLow(PossClause),
}

struct Instance {
    level: Valuation,
    learner: AfpLearner,
    pending: Option<Answer>,
}

impl Instance {
    fn new(level: Valuation, signature: &BTreeSet<Variable>, config: AfpConfig) -> Self {
        Instance { level, learner: AfpLearner::with_config(signature.clone(), config), pending: None }
    }

    fn waiting_hypothesis(&self) -> &crate::horn::HornKB {
        match self.learner.status() {
            Status::AwaitingEquivalence(h) => h,
            other => panic!("instance {} is not waiting at an equivalence query: {other:?}", self.level),
        }
    }
}

/// `x -> x` over the first signature variable, so the anchor stays within
/// the signature. An empty signature gets a fresh name.
fn anchor_formula(signature: &BTreeSet<Variable>) -> HornClause {
    let x = signature.iter().next().cloned().unwrap_or_else(|| Variable::new("top").expect("valid name"));
    HornClause::tautology(x)
}

/// Runs the instance pool at a fixed precision `p`.
pub fn orchestrate_mq_eq<O>(
    signature: &BTreeSet<Variable>,
    p: u32,
    oracle: &mut O,
    config: AfpConfig,
) -> Result<(Outcome, RunStats), LearnerError>
where
    O: MembershipOracle<PossClause> + EquivalenceOracle<PossClause, PossKB> + ?Sized,
{
    check_precision(p)?;
    let unit = Valuation::unit(p).expect("checked precision");
    let anchor = PossClause::new(anchor_formula(signature), unit).expect("positive");
    let mut stats = RunStats { precision: p, ..RunStats::default() };
    let mut pool = vec![Instance::new(unit, signature, config)];
    stats.spawned.push(unit);
    let mut cache = ValuationCache::default();

    loop {
        // Round-robin, one step per instance per pass, until every
        // instance waits at an equivalence query.
        loop {
            let mut progressed = false;
            for inst in pool.iter_mut() {
                let answer = match inst.learner.status() {
                    Status::Running => None,
                    Status::AwaitingMembership(q) => {
                        let label = instance_label(inst.level);
                        oracle.set_instance(Some(&label));
                        let example = PossClause::new(q.clone(), inst.level).expect("positive level");
                        Some(Answer::Membership(oracle.membership(&example)?))
                    }
                    Status::AwaitingEquivalence(_) => match inst.pending.take() {
                        Some(a) => Some(a),
                        None => continue,
                    },
                    Status::Done(_) => continue,
                };
                inst.learner.step(answer)?;
                stats.steps += 1;
                progressed = true;
            }
            if !progressed {
                break;
            }
        }

        let formulas: Vec<&HornClause> =
            pool.iter().flat_map(|inst| inst.waiting_hypothesis().clauses()).collect();
        let body = normalize_cached(formulas, p, oracle, &mut cache, &PossKB::new())?;
        let mut h = PossKB::new();
        h.extend_signature(signature.iter().cloned());
        h.insert(anchor.clone());
        for c in body.clauses() {
            h.insert(c.clone());
        }
        debug_assert_eq!(h.prec(), p);

        oracle.set_instance(None);
        stats.eq_calls += 1;
        let cex = match oracle.equivalence(&h)? {
            EqAnswer::Yes => return Ok((Outcome::Learned(h), stats)),
            EqAnswer::Counterexample(c) => c,
        };
        if h.entails(&cex) {
            return Err(LearnerError::NegativeCounterexample(cex.to_string()));
        }
        let beta = cache.get(oracle, p, &cex.formula)?;
        if beta.is_zero() {
            return Ok((Outcome::PrecisionTooLow(cex), stats));
        }
        match pool.iter().position(|inst| inst.level == beta) {
            None => {
                pool.push(Instance::new(beta, signature, config));
                stats.spawned.push(beta);
            }
            Some(i) if pool[i].waiting_hypothesis().entails(&cex.formula) => {
                return Ok((Outcome::PrecisionTooLow(cex), stats));
            }
            Some(_) => {
                let mut levels = Vec::new();
                for inst in pool.iter_mut() {
                    if inst.level <= beta && !inst.waiting_hypothesis().entails(&cex.formula) {
                        inst.pending = Some(Answer::Equivalence(EqAnswer::Counterexample(cex.formula.clone())));
                        levels.push(inst.level);
                    }
                }
                stats.dispatches.push(Dispatch { eq: stats.eq_calls, formula: cex.formula.clone(), levels });
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MqEqReport {
    /// Precision of the successful run.
    pub precision: u32,
    pub escalations: u32,
    pub runs: Vec<RunStats>,
}

impl MqEqReport {
    pub fn instances_spawned(&self) -> usize {
        self.runs.iter().map(|r| r.spawned.len()).sum()
    }

    pub fn steps(&self) -> usize {
        self.runs.iter().map(|r| r.steps).sum()
    }
}

/// Starts at precision `start` and restarts from scratch one digit higher
/// whenever a counterexample shows the precision is too low.
pub fn learn_mq_eq<O>(
    signature: &BTreeSet<Variable>,
    start: u32,
    oracle: &mut O,
    config: AfpConfig,
) -> Result<(PossKB, MqEqReport), LearnerError>
where
    O: MembershipOracle<PossClause> + EquivalenceOracle<PossClause, PossKB> + ?Sized,
{
    check_precision(start)?;
    let mut report = MqEqReport::default();
    for p in start..=MAX_PRECISION {
        let (outcome, stats) = orchestrate_mq_eq(signature, p, oracle, config)?;
        report.runs.push(stats);
        match outcome {
            Outcome::Learned(h) => {
                report.precision = p;
                return Ok((h, report));
            }
            Outcome::PrecisionTooLow(_) => report.escalations += 1,
        }
    }
    Err(LearnerError::PrecisionExhausted(MAX_PRECISION))
}
