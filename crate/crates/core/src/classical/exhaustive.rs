//! Membership-only learning by asking every candidate clause.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::horn::{all_clauses, count_clauses, HornClause, HornKB, Variable};
use crate::learner::{run_membership_only, Answer, Counters, Learner, LearnerError, Status};
use crate::oracle::MembershipOracle;

/// Asks every clause with at most `max_antecedent` antecedent variables and
/// keeps the confirmed ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveLearner {
    signature: BTreeSet<Variable>,
    candidates: Vec<HornClause>,
    next: usize,
    kept: Vec<HornClause>,
    status: Status,
    counters: Counters,
}

impl ExhaustiveLearner {
    /// Fails when the candidate space exceeds `budget` queries.
    pub fn new(signature: BTreeSet<Variable>, max_antecedent: usize, budget: u128) -> Result<Self, LearnerError> {
        let needed = count_clauses(signature.len(), max_antecedent);
        if needed > budget {
            return Err(LearnerError::BudgetExceeded { needed, budget });
        }
        let candidates = all_clauses(&signature, Some(max_antecedent));
        Ok(ExhaustiveLearner {
            signature,
            candidates,
            next: 0,
            kept: Vec::new(),
            status: Status::Running,
            counters: Counters::default(),
        })
    }

    fn advance(&mut self) {
        if let Some(q) = self.candidates.get(self.next) {
            self.counters.mq += 1;
            self.status = Status::AwaitingMembership(q.clone());
        } else {
            let mut h = HornKB::with_signature(self.signature.clone());
            for c in &self.kept {
                h.insert(c.clone());
            }
            self.status = Status::Done(h);
        }
    }
}

impl Learner for ExhaustiveLearner {
    fn status(&self) -> &Status {
        &self.status
    }

    fn step(&mut self, answer: Option<Answer>) -> Result<&Status, LearnerError> {
        match (&self.status, answer) {
            (Status::Running, None) => {}
            (Status::AwaitingMembership(q), Some(Answer::Membership(a))) => {
                if a {
                    self.kept.push(q.clone());
                }
                self.next += 1;
            }
            (status, answer) => {
                return Err(LearnerError::Protocol(format!("answer {answer:?} does not fit status {status:?}")))
            }
        }
        self.counters.steps += 1;
        self.advance();
        Ok(&self.status)
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}

pub fn exhaustive_mq_learner<O>(
    signature: &BTreeSet<Variable>,
    max_antecedent: usize,
    budget: u128,
    oracle: &mut O,
) -> Result<HornKB, LearnerError>
where
    O: MembershipOracle<HornClause> + ?Sized,
{
    let mut learner = ExhaustiveLearner::new(signature.clone(), max_antecedent, budget)?;
    run_membership_only(&mut learner, oracle)
}
