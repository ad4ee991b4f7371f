//! Equivalence-only learning by enumerating hypotheses.

use std::collections::BTreeSet;

use crate::horn::{all_clauses, combinations, Combinations, HornClause, HornKB, Variable};
use crate::learner::LearnerError;
use crate::oracle::{EqAnswer, EquivalenceOracle};

/// Every Horn KB over a signature, by number of clauses, then by the
/// lexicographic order of clause indices into [`all_clauses`].
pub struct HornEnumeration {
    signature: BTreeSet<Variable>,
    clauses: Vec<HornClause>,
    size: usize,
    pending: Combinations,
}

impl HornEnumeration {
    pub fn new(signature: BTreeSet<Variable>) -> Self {
        let clauses = all_clauses(&signature, None);
        HornEnumeration { signature, clauses, size: 0, pending: combinations(0, 0) }
    }
}

impl Iterator for HornEnumeration {
    type Item = HornKB;

    fn next(&mut self) -> Option<HornKB> {
        loop {
            if let Some(idx) = self.pending.next() {
                let mut h = HornKB::with_signature(self.signature.clone());
                for i in idx {
                    h.insert(self.clauses[i].clone());
                }
                return Some(h);
            }
            self.size += 1;
            if self.size > self.clauses.len() {
                return None;
            }
            self.pending = combinations(self.clauses.len(), self.size);
        }
    }
}

/// Asks each enumerated hypothesis in turn, at most `cap` of them. Returns
/// the accepted hypothesis and the number of queries spent.
pub fn eq_enum_learner<H, E, I, O>(enumeration: I, oracle: &mut O, cap: usize) -> Result<(H, usize), LearnerError>
where
    I: IntoIterator<Item = H>,
    O: EquivalenceOracle<E, H> + ?Sized,
{
    for (n, h) in enumeration.into_iter().take(cap).enumerate() {
        if let EqAnswer::Yes = oracle.equivalence(&h)? {
            return Ok((h, n + 1));
        }
    }
    Err(LearnerError::CapReached(cap))
}
