//! Query interfaces between learners and teachers.
//!
//! Learners only ever see these traits; the target stays behind them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EqAnswer<E> {
    Yes,
    Counterexample(E),
}

impl<E> EqAnswer<E> {
    pub fn is_yes(&self) -> bool {
        matches!(self, EqAnswer::Yes)
    }

    pub fn map<F, T>(self, f: F) -> EqAnswer<T>
    where
        F: FnOnce(E) -> T,
    {
        match self {
            EqAnswer::Yes => EqAnswer::Yes,
            EqAnswer::Counterexample(e) => EqAnswer::Counterexample(f(e)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("query mentions `{0}`, which is not in the target signature")]
    SignatureMismatch(String),
    #[error("scripted counterexamples exhausted while the hypothesis is not equivalent")]
    StrategyExhausted,
    #[error("scripted counterexample `{0}` is not a counterexample for the hypothesis")]
    InvalidScript(String),
    #[error("example sampler exhausted")]
    SamplerExhausted,
}

pub trait MembershipOracle<E> {
    fn membership(&mut self, example: &E) -> Result<bool, OracleError>;

    /// Tags subsequent queries with the asking instance, for transcripts.
    fn set_instance(&mut self, _label: Option<&str>) {}
}

pub trait EquivalenceOracle<E, H> {
    fn equivalence(&mut self, hypothesis: &H) -> Result<EqAnswer<E>, OracleError>;
}

impl<E, T: MembershipOracle<E> + ?Sized> MembershipOracle<E> for &mut T {
    fn membership(&mut self, example: &E) -> Result<bool, OracleError> {
        (**self).membership(example)
    }

    fn set_instance(&mut self, label: Option<&str>) {
        (**self).set_instance(label)
    }
}

impl<E, H, T: EquivalenceOracle<E, H> + ?Sized> EquivalenceOracle<E, H> for &mut T {
    fn equivalence(&mut self, hypothesis: &H) -> Result<EqAnswer<E>, OracleError> {
        (**self).equivalence(hypothesis)
    }
}

/// Adapts a closure into a membership oracle.
pub struct FnMembership<F>(pub F);

impl<E, F> MembershipOracle<E> for FnMembership<F>
where
    F: FnMut(&E) -> Result<bool, OracleError>,
{
    fn membership(&mut self, example: &E) -> Result<bool, OracleError> {
        (self.0)(example)
    }
}
