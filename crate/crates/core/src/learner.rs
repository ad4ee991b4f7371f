//! The learning-system protocol: a learner is a resumable state machine
//! that stops whenever it needs an oracle answer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::horn::{HornClause, HornKB};
use crate::oracle::{EqAnswer, EquivalenceOracle, MembershipOracle, OracleError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// Not started yet; the next step takes no answer.
    Running,
    AwaitingMembership(HornClause),
    AwaitingEquivalence(HornKB),
    Done(HornKB),
}

impl Status {
    pub fn is_done(&self) -> bool {
        matches!(self, Status::Done(_))
    }

    /// The hypothesis of a pending equivalence query or a finished run.
    pub fn hypothesis(&self) -> Option<&HornKB> {
        match self {
            Status::AwaitingEquivalence(h) | Status::Done(h) => Some(h),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Answer {
    Membership(bool),
    Equivalence(EqAnswer<HornClause>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub steps: usize,
    pub mq: usize,
    pub eq: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnerError {
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("counterexample `{0}` is negative; hypotheses must stay entailed by the target")]
    NegativeCounterexample(String),
    #[error("clause space of {needed} queries exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("enumeration cap of {0} hypotheses reached")]
    CapReached(usize),
    #[error("hypothesis clause `{0}` is not entailed by the target")]
    UnconfirmedClause(String),
    #[error("no progress: level {level} does not exceed {previous}")]
    NoProgress { level: String, previous: String },
    #[error("precision must be between 1 and 18, got {0}")]
    BadPrecision(u32),
    #[error("no success up to the maximum precision of {0} digits")]
    PrecisionExhausted(u32),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// A learner for classical Horn KBs driven one oracle answer at a time.
pub trait Learner {
    fn status(&self) -> &Status;

    /// Advances the machine. `answer` must be `None` for a fresh learner and
    /// must match the pending query otherwise.
    fn step(&mut self, answer: Option<Answer>) -> Result<&Status, LearnerError>;

    fn counters(&self) -> Counters;
}

/// Runs a learner to completion against a full teacher.
pub fn run_to_completion<L, O>(learner: &mut L, oracle: &mut O) -> Result<HornKB, LearnerError>
where
    L: Learner + ?Sized,
    O: MembershipOracle<HornClause> + EquivalenceOracle<HornClause, HornKB> + ?Sized,
{
    let mut answer = None;
    loop {
        let status = learner.step(answer.take())?.clone();
        answer = Some(match status {
            Status::Running => return Err(LearnerError::Protocol("learner did not start".into())),
            Status::AwaitingMembership(q) => Answer::Membership(oracle.membership(&q)?),
            Status::AwaitingEquivalence(h) => Answer::Equivalence(oracle.equivalence(&h)?),
            Status::Done(h) => return Ok(h),
        });
    }
}

/// Runs a membership-only learner to completion.
pub fn run_membership_only<L, O>(learner: &mut L, oracle: &mut O) -> Result<HornKB, LearnerError>
where
    L: Learner + ?Sized,
    O: MembershipOracle<HornClause> + ?Sized,
{
    let mut answer = None;
    loop {
        let status = learner.step(answer.take())?.clone();
        answer = Some(match status {
            Status::AwaitingMembership(q) => Answer::Membership(oracle.membership(&q)?),
            Status::Done(h) => return Ok(h),
            other => {
                return Err(LearnerError::Protocol(format!(
                    "membership-only learner entered {other:?}"
                )))
            }
        });
    }
}
