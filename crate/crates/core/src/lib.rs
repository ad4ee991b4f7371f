//! Exact learning of possibilistic propositional Horn knowledge bases.
//!
//! Learners for classical Horn KBs are lifted to possibilistic ones by
//! running one classical instance per valuation level and locating each
//! level with membership queries. Everything is driven through oracle
//! traits, so the same learners run against exact teachers, scripted
//! teachers, or PAC sampling.

pub mod classical;
pub mod cli;
pub mod generate;
pub mod horn;
pub mod learner;
pub mod oracle;
pub mod pac;
pub mod poss_kb;
pub mod possibilistic;
pub mod teacher;
pub mod valuation;

pub use horn::{HornClause, HornKB, Variable};
pub use poss_kb::{PossClause, PossKB};
pub use valuation::Valuation;
