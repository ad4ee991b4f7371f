//! Learning with equivalence queries only, by dovetailed enumeration.

use std::collections::BTreeSet;

use crate::classical::eq_enum_learner;
use crate::horn::{all_clauses, combinations, Combinations, HornClause, Variable};
use crate::learner::LearnerError;
use crate::oracle::EquivalenceOracle;
use crate::poss_kb::{PossClause, PossKB};
use crate::valuation::{Valuation, MAX_PRECISION};

/// Every possibilistic Horn KB over a signature. The empty KB comes first,
/// then strata `d = 2, 3, ...`; stratum `d` holds the KBs of `s` clauses
/// with valuations of at most `d - s` digits, for `s = 1, ..., d - 1`.
///
/// Within a stratum, items are the pairs of a clause of [`all_clauses`] and
/// a positive grid point, indexed clause-major, and KBs are combinations of
/// items in lexicographic order. KBs recur across strata.
pub struct PossEnumeration {
    signature: BTreeSet<Variable>,
    clauses: Vec<HornClause>,
    started: bool,
    depth: u32,
    size: u32,
    pending: Combinations,
}

impl PossEnumeration {
    pub fn new(signature: BTreeSet<Variable>) -> Self {
        let clauses = all_clauses(&signature, None);
        PossEnumeration { signature, clauses, started: false, depth: 1, size: 0, pending: combinations(0, 1) }
    }

    fn precision(&self) -> u32 {
        self.depth - self.size
    }

    fn item(&self, index: usize) -> PossClause {
        let per = 10usize.pow(self.precision());
        let v = Valuation::grid_point((index % per) as u64 + 1, self.precision()).expect("grid point");
        PossClause::new(self.clauses[index / per].clone(), v).expect("positive")
    }
}

impl Iterator for PossEnumeration {
    type Item = PossKB;

    fn next(&mut self) -> Option<PossKB> {
        if !self.started {
            self.started = true;
            let mut empty = PossKB::new();
            empty.extend_signature(self.signature.iter().cloned());
            return Some(empty);
        }
        loop {
            if let Some(idx) = self.pending.next() {
                let mut h = PossKB::new();
                h.extend_signature(self.signature.iter().cloned());
                for i in idx {
                    h.insert(self.item(i));
                }
                return Some(h);
            }
            if self.size + 1 < self.depth {
                self.size += 1;
            } else {
                self.depth += 1;
                self.size = 1;
            }
            if self.precision() > MAX_PRECISION {
                continue;
            }
            let items = 10usize.checked_pow(self.precision()).and_then(|g| g.checked_mul(self.clauses.len()));
            let Some(items) = items else { continue };
            self.pending = combinations(items, self.size as usize);
        }
    }
}

/// Asks enumerated hypotheses until one is accepted, at most `cap` of them.
/// Returns the hypothesis and the number of equivalence queries.
pub fn learn_eq_only<O>(signature: &BTreeSet<Variable>, oracle: &mut O, cap: usize) -> Result<(PossKB, usize), LearnerError>
where
    O: EquivalenceOracle<PossClause, PossKB> + ?Sized,
{
    eq_enum_learner(PossEnumeration::new(signature.clone()), oracle, cap)
}
