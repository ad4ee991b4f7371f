//! Possibilistic learners built on the classical ones.

mod eq_only;
mod mq_only;
mod orchestrator;
mod reverse;
mod valuation_search;

pub use eq_only::{learn_eq_only, PossEnumeration};
pub use mq_only::{learn_mq_fixed_precision_levels, learn_mq_fixed_precision_naive, BaseBounds, LevelsRun};
pub use orchestrator::{
    instance_label, learn_mq_eq, orchestrate_mq_eq, Dispatch, MqEqReport, Outcome, RunStats,
};
pub use reverse::{classical_via_possibilistic, LiftedOracle};
pub use valuation_search::{assemble, find_valuation, normalize_hypothesis, FIND_VALUATION};

#[cfg(test)]
mod tests;
