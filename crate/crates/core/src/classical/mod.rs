//! Exact learners for classical propositional Horn KBs.

mod afp;
mod enumeration;
mod exhaustive;

pub use afp::{AfpConfig, AfpLearner, Entry};
pub use enumeration::{eq_enum_learner, HornEnumeration};
pub use exhaustive::{exhaustive_mq_learner, ExhaustiveLearner};
